use std::fs::File;
use std::io::BufReader;

use proptest::prelude::*;

use signphon::coarticulation::{scan, AffectedHands, DetectorThresholds, Direction, PrevalenceReport, Split};
use signphon::corpus::{filter_tokens, parse_corpus};
use signphon::{data, Corpus, ExclusionPolicy, Hand, HandshapeId, Inventory, Lexicon, Purpose, SignClass, SignToken, Tier, Utterance};

fn fixture(inv: &Inventory) -> Corpus {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/coartic_corpus.jsonl");
    parse_corpus(BufReader::new(File::open(path).unwrap()), inv).unwrap()
}

#[derive(Debug, Clone)]
struct Draw {
    entry: usize,
    ndh_only: bool,
    dom: (usize, Option<usize>),
    ndh: (usize, usize),
    excluded: bool,
}

fn draw() -> impl Strategy<Value = Draw> {
    (
        0usize..1000,
        prop::bool::weighted(0.1),
        (0usize..40, prop::option::weighted(0.9, 0usize..40)),
        (0usize..40, 0usize..40),
        prop::bool::weighted(0.15),
        prop::bool::weighted(0.5),
    )
        .prop_map(|(entry, ndh_only, dom, ndh, excluded, keep)| {
            // Half the time keep the citation form so deviations are sparse.
            let dom = if keep { (usize::MAX, dom.1.map(|_| usize::MAX)) } else { dom };
            Draw { entry, ndh_only, dom, ndh, excluded }
        })
}

fn build(inv: &Inventory, lex: &Lexicon, draws: &[Draw], id: usize) -> Utterance {
    let ids: Vec<HandshapeId> = inv.ids().collect();
    let entries: Vec<_> = lex.iter().collect();
    let mut frame = 0;
    let tokens = draws
        .iter()
        .map(|d| {
            let e = entries[d.entry % entries.len()];
            let pick = |i: usize, canon: HandshapeId| if i == usize::MAX { canon } else { ids[i % ids.len()] };
            let two = e.ndh_start.is_some();
            let tier = match (d.ndh_only, two) {
                (true, _) => Tier::Nondominant,
                (false, true) => Tier::Both,
                (false, false) => Tier::Dominant,
            };
            let dom = (pick(d.dom.0, e.dom_start), d.dom.1.map(|i| pick(i, e.dom_end)));
            let ndh = (ids[d.ndh.0 % ids.len()], Some(ids[d.ndh.1 % ids.len()]));
            let t = SignToken {
                gloss: e.gloss.clone(),
                tier,
                start_frame: frame,
                end_frame: frame + 5,
                dom_hs: tier.covers(Hand::Dominant).then_some(dom),
                ndh_hs: tier.covers(Hand::Nondominant).then_some(ndh),
                class_tags: if d.excluded { [SignClass::Index].into() } else { Default::default() },
                reduction_tags: Default::default(),
            };
            frame += 7;
            t
        })
        .collect();
    Utterance::new(format!("r{id}"), "S", 30, tokens).unwrap()
}

fn corpus() -> impl Strategy<Value = Vec<Vec<Draw>>> {
    prop::collection::vec(prop::collection::vec(draw(), 1..12), 1..6)
}

fn make(draws: &[Vec<Draw>]) -> (Inventory, Lexicon, Corpus) {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let utterances = draws.iter().enumerate().map(|(i, d)| build(&inv, &lex, d, i)).collect();
    (inv, lex, Corpus { utterances })
}

fn run(c: &Corpus, lex: &Lexicon, inv: &Inventory, th: DetectorThresholds) -> PrevalenceReport {
    scan(c, lex, inv, &ExclusionPolicy::default(), &th).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn scan_is_deterministic_and_consistent(draws in corpus()) {
        let (inv, lex, c) = make(&draws);
        let th = DetectorThresholds::default();
        let a = run(&c, &lex, &inv, th);
        prop_assert_eq!(&a, &run(&c, &lex, &inv, th));
        prop_assert!(a.total_coarticulated <= a.total_examined);
        prop_assert_eq!(a.records.len(), a.total_coarticulated);
        prop_assert_eq!(a.severity.subtle + a.severity.moderate + a.severity.major, a.total_coarticulated);
        for s in [a.direction.one_handed, a.direction.two_handed_dom_only, a.direction.two_handed_ndh_affected] {
            prop_assert_eq!(s.perseverative + s.anticipatory - s.both, s.affected);
        }
        let affected: usize = [a.direction.one_handed, a.direction.two_handed_dom_only, a.direction.two_handed_ndh_affected]
            .iter().map(|s| s.affected).sum();
        prop_assert_eq!(affected, a.total_coarticulated);
        for r in &a.records {
            prop_assert!(!r.deviations.is_empty());
            prop_assert_eq!(r.severity, th.severity(r.max_distance()));
            let has_prev = matches!(r.direction, Direction::Perseverative | Direction::Both);
            let has_next = matches!(r.direction, Direction::Anticipatory | Direction::Both);
            prop_assert_eq!(r.trigger_prev.is_some(), has_prev);
            prop_assert_eq!(r.trigger_next.is_some(), has_next);
            if r.split() == Split::TwoHandedDomOnly {
                prop_assert_eq!(r.hands, AffectedHands::Dom);
            }
            for d in &r.deviations {
                prop_assert_ne!(d.observed, d.canonical);
                prop_assert!(inv.distance(d.observed, d.trigger) < inv.distance(d.canonical, d.trigger) || d.via_spread);
            }
        }
    }

    #[test]
    fn raising_subtle_threshold_never_shrinks_subtle(draws in corpus(), lo in 0.0f64..1.0, step in 0.0f64..1.0) {
        let (inv, lex, c) = make(&draws);
        let th = |t: f64| DetectorThresholds { tau_subtle: t, tau_major: 3.0, ..Default::default() };
        let a = run(&c, &lex, &inv, th(lo));
        let b = run(&c, &lex, &inv, th(lo + step));
        prop_assert!(b.severity.subtle >= a.severity.subtle);
        prop_assert_eq!(a.total_coarticulated, b.total_coarticulated);
    }

    #[test]
    fn exact_match_mode_is_a_subset_of_toward_mode(draws in corpus()) {
        let (inv, lex, c) = make(&draws);
        let toward = run(&c, &lex, &inv, DetectorThresholds::default());
        let exact = run(&c, &lex, &inv, DetectorThresholds { require_movement_toward: false, ..Default::default() });
        prop_assert!(exact.total_coarticulated <= toward.total_coarticulated);
        prop_assert_eq!(exact.total_examined, toward.total_examined);
    }

    #[test]
    fn split_reports_merge_to_the_whole(draws in corpus(), cut in 0usize..6) {
        let (inv, lex, c) = make(&draws);
        let whole = run(&c, &lex, &inv, DetectorThresholds::default());
        let cut = cut.min(c.utterances.len());
        let left = Corpus { utterances: c.utterances[..cut].to_vec() };
        let right = Corpus { utterances: c.utterances[cut..].to_vec() };
        let mut merged = run(&left, &lex, &inv, DetectorThresholds::default());
        merged.merge(run(&right, &lex, &inv, DetectorThresholds::default()));
        prop_assert_eq!(merged.total_examined, whole.total_examined);
        prop_assert_eq!(merged.total_coarticulated, whole.total_coarticulated);
        prop_assert_eq!(merged.per_class, whole.per_class);
        prop_assert_eq!(merged.direction, whole.direction);
    }

    #[test]
    fn filtering_never_changes_neighbors(draws in corpus()) {
        let (_, _, c) = make(&draws);
        let kept = filter_tokens(&c, &ExclusionPolicy::default(), Purpose::Coarticulation);
        for r in kept {
            let utt = &c.utterances[r.utterance];
            let hand = if utt.token(r.token).tier == Tier::Nondominant { Hand::Nondominant } else { Hand::Dominant };
            let seq = utt.tier(hand);
            let pos = seq.iter().position(|&i| i == r.token).unwrap();
            let (p, n) = utt.neighbors(r.token, hand).unwrap();
            prop_assert_eq!(p, pos.checked_sub(1).map(|i| seq[i]));
            prop_assert_eq!(n, seq.get(pos + 1).copied());
        }
    }
}

#[test]
fn invalid_thresholds_rejected() {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let th = DetectorThresholds { tau_subtle: -1.0, ..Default::default() };
    assert!(scan(&Corpus::default(), &lex, &inv, &ExclusionPolicy::default(), &th).is_err());
}

#[test]
fn fixture_records_are_well_formed() {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let c = fixture(&inv);
    let r = run(&c, &lex, &inv, DetectorThresholds::default());
    assert_eq!(r.skipped.missing_end, 0);
    let spread = r.records.iter().filter(|x| x.spread_to_both_hands).count();
    assert!(spread > 0);
    for rec in r.records.iter().filter(|x| x.spread_to_both_hands) {
        assert!(rec.two_handed);
        assert!(rec.deviations.iter().any(|d| d.hand == Hand::Nondominant));
        assert_ne!(rec.hands, AffectedHands::Dom);
    }
    let ndh = r.direction.two_handed_ndh_affected;
    assert_eq!(ndh.affected, 158 - 90 - 47);
    let text = r.render_text();
    assert!(text.contains("overall: 158/11077 = 1.43%"), "{text}");
}

#[test]
fn exact_match_mode_on_fixture_keeps_exact_triggers() {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let c = fixture(&inv);
    let th = DetectorThresholds { require_movement_toward: false, ..Default::default() };
    let r = run(&c, &lex, &inv, th);
    // Every fixture trigger presents exactly the observed handshape.
    assert_eq!(r.total_coarticulated, 158);
    for rec in &r.records {
        assert!(rec.deviations.iter().all(|d| d.observed == d.trigger));
    }
}
