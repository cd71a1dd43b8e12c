//! Regenerates the bundled fixture files under `data/`.
//!
//! ```text
//! cargo run -p signphon-core --example gen_fixtures
//! ```
//!
//! Output is fully deterministic. The coarticulation corpus is assembled from
//! a list of record plans (split, direction, severity, class) laid
//! out among citation-form fillers; every deviating endpoint sits next to an
//! excluded trigger token whose adjacent handshape equals the observed one.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use signphon::coarticulation::{Direction, Severity, Split};
use signphon::corpus::{corpus_to_string, ReductionTag};
use signphon::inventory::{HandshapeClass, HandshapeId, Inventory};
use signphon::lexicon::{Handedness, Lexicon, LexiconEntry, SignClass};
use signphon::{data, Corpus, SignToken, Tier, TransitionTable, Utterance};

type Pair = (HandshapeId, HandshapeId);

const FPS: u32 = 30;

/// Per-class (coarticulated, occurrences) among class-sampled utterances.
const CLASS_TABLE: [(HandshapeClass, usize, usize); 7] = [
    (HandshapeClass::Class1, 24, 405),
    (HandshapeClass::Class2, 55, 992),
    (HandshapeClass::Class3, 6, 191),
    (HandshapeClass::Class4, 11, 459),
    (HandshapeClass::ClassY, 4, 10),
    (HandshapeClass::ClassPK, 3, 14),
    (HandshapeClass::Other, 0, 240),
];
const TOTAL_EXAMINED: usize = 11_077;
const TOTAL_COARTICULATED: usize = 158;
/// (split, perseverative only, anticipatory only, both)
const SPLITS: [(Split, usize, usize, usize); 3] = [
    (Split::OneHanded, 22, 61, 7),
    (Split::TwoHandedDomOnly, 12, 32, 3),
    (Split::TwoHandedNdhAffected, 4, 13, 4),
];
const SEVERITY: [(Severity, usize); 3] = [(Severity::Subtle, 56), (Severity::Moderate, 27), (Severity::Major, 75)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NdhMode {
    /// One-handed trigger on the dominant tier; the weak hand copies the dominant change.
    Spread,
    /// Two-handed trigger; both hands deviate.
    BothHands,
    /// Weak-hand trigger; only the weak hand deviates.
    WeakOnly,
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    split: Split,
    direction: Direction,
    severity: Severity,
    class: HandshapeClass,
    in_sample: bool,
}

struct Draft {
    gloss: String,
    tier: Tier,
    dom: Option<Pair>,
    ndh: Option<Pair>,
    tags: Vec<SignClass>,
    reductions: Vec<ReductionTag>,
}

impl Draft {
    fn citation(e: &LexiconEntry) -> Self {
        let two = e.handedness == Handedness::Two;
        Draft {
            gloss: e.gloss.clone(),
            tier: if two { Tier::Both } else { Tier::Dominant },
            dom: Some((e.dom_start, e.dom_end)),
            ndh: if two { Some((e.ndh_start.unwrap(), e.ndh_end.unwrap())) } else { None },
            tags: Vec::new(),
            reductions: Vec::new(),
        }
    }
}

enum Item {
    Filler(Draft),
    Unit(Vec<Draft>),
}

struct Gen<'a> {
    inv: &'a Inventory,
    lex: &'a Lexicon,
    counters: BTreeMap<String, usize>,
    trigger_no: usize,
}

impl<'a> Gen<'a> {
    fn next(&mut self, key: &str) -> usize {
        let c = self.counters.entry(key.to_string()).or_default();
        *c += 1;
        *c - 1
    }

    fn entries(&self, two: bool, class: Option<HandshapeClass>) -> Vec<&'a LexiconEntry> {
        self.lex
            .iter()
            .filter(|e| e.sign_class == SignClass::Lexical && !e.gloss.starts_with('('))
            .filter(|e| (e.handedness == Handedness::Two) == two)
            .filter(|e| class.is_none_or(|c| self.inv.class_of(e.dom_start) == c))
            .collect()
    }

    fn feasible(&self, plan: &Plan) -> bool {
        !self.eligible(plan.split != Split::OneHanded, plan.class, plan.severity).is_empty()
    }

    fn eligible(&self, two: bool, class: HandshapeClass, severity: Severity) -> Vec<&'a LexiconEntry> {
        self
            .entries(two, Some(class))
            .into_iter()
            .filter(|e| {
                [Some(e.dom_start), Some(e.dom_end), e.ndh_start, e.ndh_end]
                    .into_iter()
                    .flatten()
                    .all(|h| !self.band(h, severity).is_empty())
            })
            .collect()
    }

    fn pick_entry(&mut self, two: bool, class: HandshapeClass, severity: Severity) -> &'a LexiconEntry {
        let pool = self.eligible(two, class, severity);
        assert!(!pool.is_empty(), "no {class:?} {severity:?} entries (two-handed: {two})");
        let k = self.next(&format!("entry-{two}-{class:?}"));
        pool[k % pool.len()]
    }

    /// A handshape at a distance from `canon` inside the severity band.
    fn pick_observed(&mut self, canon: HandshapeId, severity: Severity) -> HandshapeId {
        let pool = self.band(canon, severity);
        assert!(!pool.is_empty(), "no {severity:?} alternative for {}", self.inv.label(canon));
        let k = self.next(&format!("obs-{}-{severity:?}", self.inv.label(canon)));
        pool[k % pool.len()]
    }

    fn band(&self, canon: HandshapeId, severity: Severity) -> Vec<HandshapeId> {
        let inv = self.inv;
        let mut pool: Vec<HandshapeId> = inv
            .ids()
            .filter(|&h| {
                let d = inv.distance(canon, h);
                d > 0.0
                    && match severity {
                        Severity::Subtle => d <= 0.5,
                        Severity::Moderate => d > 0.5 && d < 1.0,
                        Severity::Major => d >= 1.0,
                    }
            })
            .collect();
        pool.sort_by(|&a, &b| inv.cmp_labels(a, b));
        pool
    }

    fn trigger(&mut self, tier: Tier, dom: Option<Pair>, ndh: Option<Pair>) -> Draft {
        let n = self.trigger_no;
        self.trigger_no += 1;
        let shape = dom.or(ndh).map(|p| self.inv.label(p.1).to_string()).unwrap();
        let (gloss, tag) = match (tier, n % 3) {
            (Tier::Dominant, 0) => (format!("fs-{}", ["ANN", "BOB", "LISA", "TOM"][n % 4]), SignClass::Fingerspelled),
            (Tier::Dominant, 1) | (Tier::Nondominant, 0) => (format!("gest:{shape}"), SignClass::Gesture),
            _ => (format!("CL:{shape}"), SignClass::Classifier),
        };
        Draft {
            gloss,
            tier,
            dom,
            ndh,
            tags: vec![tag],
            reductions: Vec::new(),
        }
    }

    fn unit(&mut self, plan: Plan, mode_counter: &mut usize) -> Vec<Draft> {
        let two = plan.split != Split::OneHanded;
        let entry = self.pick_entry(two, plan.class, plan.severity);
        let mut target = Draft::citation(entry);
        let persev = matches!(plan.direction, Direction::Perseverative | Direction::Both);
        let antic = matches!(plan.direction, Direction::Anticipatory | Direction::Both);

        let mode = if plan.split == Split::TwoHandedNdhAffected {
            let m = [NdhMode::Spread, NdhMode::BothHands, NdhMode::WeakOnly][*mode_counter % 3];
            *mode_counter += 1;
            let same = entry.ndh_start == Some(entry.dom_start) && entry.ndh_end == Some(entry.dom_end);
            if m == NdhMode::Spread && !same {
                NdhMode::BothHands
            } else {
                m
            }
        } else {
            NdhMode::BothHands
        };
        let dom_moves = plan.split != Split::TwoHandedNdhAffected || mode != NdhMode::WeakOnly;
        let ndh_moves = plan.split == Split::TwoHandedNdhAffected;

        let (cs, ce) = (entry.dom_start, entry.dom_end);
        let mut dom = (cs, ce);
        let mut ndh = target.ndh;
        if dom_moves {
            if persev {
                dom.0 = self.pick_observed(cs, plan.severity);
            }
            if antic {
                dom.1 = self.pick_observed(ce, plan.severity);
            }
        }
        if ndh_moves {
            let (ns, ne) = ndh.unwrap();
            let mut n = (ns, ne);
            if mode == NdhMode::Spread {
                n = dom;
            } else {
                if persev {
                    n.0 = if ns == cs && dom_moves { dom.0 } else { self.pick_observed(ns, plan.severity) };
                }
                if antic {
                    n.1 = if ne == ce && dom_moves { dom.1 } else { self.pick_observed(ne, plan.severity) };
                }
            }
            ndh = Some(n);
        }
        target.dom = Some(dom);
        target.ndh = ndh;

        let filler_shape = self.inv.id("B").unwrap();
        let mut out = Vec::new();
        let make = |g: &mut Self, at_start: bool| -> Draft {
            let d_adj = if at_start { dom.0 } else { dom.1 };
            let n_adj = ndh.map(|n| if at_start { n.0 } else { n.1 });
            // Previous triggers end in the adjacent shape; next triggers start in it.
            let shape = |adj: HandshapeId| if at_start { (filler_shape, adj) } else { (adj, filler_shape) };
            match (plan.split, mode) {
                (Split::TwoHandedNdhAffected, NdhMode::BothHands) => {
                    g.trigger(Tier::Both, Some(shape(d_adj)), Some(shape(n_adj.unwrap())))
                }
                (Split::TwoHandedNdhAffected, NdhMode::WeakOnly) => g.trigger(Tier::Nondominant, None, Some(shape(n_adj.unwrap()))),
                _ => g.trigger(Tier::Dominant, Some(shape(d_adj)), None),
            }
        };
        if persev {
            out.push(make(self, true));
        }
        out.push(target);
        if antic {
            out.push(make(self, false));
        }
        out
    }
}

/// Spread `k` values over `n` slots without clustering (stride permutation).
fn stride_order(n: usize, stride: usize) -> Vec<usize> {
    let mut s = stride;
    while gcd(s, n) != 1 {
        s += 1;
    }
    (0..n).map(|i| (i * s) % n).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn plans() -> Vec<Plan> {
    let mut dirs = Vec::new();
    for (split, p, a, b) in SPLITS {
        dirs.extend(std::iter::repeat_n((split, Direction::Perseverative), p));
        dirs.extend(std::iter::repeat_n((split, Direction::Anticipatory), a));
        dirs.extend(std::iter::repeat_n((split, Direction::Both), b));
    }
    assert_eq!(dirs.len(), TOTAL_COARTICULATED);
    let mut sev = Vec::new();
    for (s, n) in SEVERITY {
        sev.extend(std::iter::repeat_n(s, n));
    }
    assert_eq!(sev.len(), TOTAL_COARTICULATED);
    let mut classes: Vec<(HandshapeClass, bool)> = Vec::new();
    for (c, k, _) in CLASS_TABLE {
        classes.extend(std::iter::repeat_n((c, true), k));
    }
    let cycle = [
        HandshapeClass::Class1,
        HandshapeClass::Class2,
        HandshapeClass::Class2,
        HandshapeClass::Class3,
        HandshapeClass::Class4,
        HandshapeClass::Other,
    ];
    let mut i = 0;
    while classes.len() < TOTAL_COARTICULATED {
        classes.push((cycle[i % cycle.len()], false));
        i += 1;
    }
    let sev_order = stride_order(TOTAL_COARTICULATED, 31);
    let class_order = stride_order(TOTAL_COARTICULATED, 47);
    dirs.iter()
        .enumerate()
        .map(|(i, &(split, direction))| {
            let (class, in_sample) = classes[class_order[i]];
            Plan {
                split,
                direction,
                severity: sev[sev_order[i]],
                class,
                in_sample,
            }
        })
        .collect()
}

fn fillers(g: &mut Gen<'_>, counts: &[(Option<HandshapeClass>, usize)]) -> Vec<Draft> {
    let mut out = Vec::new();
    let mut queues: Vec<(Option<HandshapeClass>, usize)> = counts.to_vec();
    // Round-robin across classes so utterances mix them.
    while queues.iter().any(|q| q.1 > 0) {
        for q in queues.iter_mut().filter(|q| q.1 > 0) {
            q.1 -= 1;
            let k = g.next(&format!("filler-{:?}", q.0));
            let mut pool = g.entries(false, q.0);
            pool.extend(g.entries(true, q.0));
            let e = pool[k % pool.len()];
            let mut d = Draft::citation(e);
            if d.tier == Tier::Both && k % 11 == 3 {
                d.reductions.push(ReductionTag::WeakFreeze);
            }
            out.push(d);
        }
    }
    out
}

fn interleave(fillers: Vec<Draft>, units: Vec<Vec<Draft>>) -> Vec<Item> {
    let total = fillers.len() + units.len();
    let mut unit_slots: Vec<usize> = (0..units.len()).map(|i| (i * total + total / 2) / units.len().max(1)).collect();
    unit_slots.dedup();
    assert_eq!(unit_slots.len(), units.len());
    let mut units = units.into_iter();
    let mut fillers = fillers.into_iter();
    let mut out = Vec::with_capacity(total);
    let mut next_slot = unit_slots.iter().peekable();
    for pos in 0..total {
        if next_slot.peek() == Some(&&pos) {
            next_slot.next();
            out.push(Item::Unit(units.next().unwrap()));
        } else {
            out.push(Item::Filler(fillers.next().unwrap()));
        }
    }
    out
}

fn build_utterances(items: Vec<Item>, prefix: &str, in_sample: bool, first_no: usize) -> Vec<Utterance> {
    let signers = ["s01", "s02", "s03", "s04", "s05"];
    let mut out = Vec::new();
    let mut current: Vec<Draft> = Vec::new();
    let mut examined = 0;
    let mut no = first_no;
    let mut items = items.into_iter().peekable();
    while let Some(item) = items.next() {
        examined += 1;
        match item {
            Item::Filler(d) => current.push(d),
            Item::Unit(ds) => current.extend(ds),
        }
        let size = 6 + no % 4;
        if examined >= size || items.peek().is_none() {
            out.push(assemble(std::mem::take(&mut current), &format!("{prefix}-{no:04}"), signers[no % signers.len()], in_sample));
            examined = 0;
            no += 1;
        }
    }
    out
}

fn assemble(drafts: Vec<Draft>, id: &str, signer: &str, in_sample: bool) -> Utterance {
    let mut frame = 3;
    let mut tokens = Vec::new();
    for (i, d) in drafts.into_iter().enumerate() {
        let len = 6 + ((i * 7 + id.len()) % 9) as u32;
        let gap = 1 + (i % 3) as u32;
        tokens.push(SignToken {
            gloss: d.gloss,
            tier: d.tier,
            start_frame: frame,
            end_frame: frame + len - 1,
            dom_hs: d.dom.map(|(a, b)| (a, Some(b))),
            ndh_hs: d.ndh.map(|(a, b)| (a, Some(b))),
            class_tags: d.tags.into_iter().collect(),
            reduction_tags: d.reductions.into_iter().collect(),
        });
        frame += len + gap;
    }
    Utterance::new(id, signer, FPS, tokens)
        .expect("generated utterance is valid")
        .with_class_sample(in_sample)
}

fn coartic_corpus(inv: &Inventory, lex: &Lexicon) -> Corpus {
    let mut g = Gen {
        inv,
        lex,
        counters: BTreeMap::new(),
        trigger_no: 0,
    };
    let mut plans = plans();
    // Swap severities until every record has a gloss that can realise its band.
    for i in 0..plans.len() {
        if g.feasible(&plans[i]) {
            continue;
        }
        let j = (0..plans.len())
            .find(|&j| {
                let (mut a, mut b) = (plans[i], plans[j]);
                std::mem::swap(&mut a.severity, &mut b.severity);
                g.feasible(&a) && g.feasible(&b)
            })
            .expect("a feasible severity swap exists");
        let sev = plans[i].severity;
        plans[i].severity = plans[j].severity;
        plans[j].severity = sev;
    }
    let mut mode_counter = 0;
    let mut in_units = Vec::new();
    let mut out_units = Vec::new();
    let mut in_class: BTreeMap<HandshapeClass, usize> = BTreeMap::new();
    for plan in &plans {
        let u = g.unit(*plan, &mut mode_counter);
        if plan.in_sample {
            *in_class.entry(plan.class).or_default() += 1;
            in_units.push(u);
        } else {
            out_units.push(u);
        }
    }
    let in_counts: Vec<(Option<HandshapeClass>, usize)> = CLASS_TABLE
        .iter()
        .map(|&(c, k, occ)| {
            assert_eq!(in_class.get(&c).copied().unwrap_or(0), k);
            (Some(c), occ - k)
        })
        .collect();
    let in_total: usize = CLASS_TABLE.iter().map(|c| c.2).sum();
    let out_fillers = TOTAL_EXAMINED - in_total - out_units.len();
    let in_items = interleave(fillers(&mut g, &in_counts), in_units);
    let out_items = interleave(fillers(&mut g, &[(None, out_fillers)]), out_units);
    let mut utterances = build_utterances(in_items, "cs", true, 1);
    utterances.extend(build_utterances(out_items, "cx", false, 1));
    Corpus { utterances }
}

fn start_end_corpus(inv: &Inventory, lex: &Lexicon, table: &TransitionTable) -> Corpus {
    let mut utterances = Vec::new();
    let mut no = 1;
    for s in inv.ids() {
        let glosses: Vec<&str> = lex
            .iter()
            .filter(|e| e.handedness == Handedness::One && e.sign_class == SignClass::Lexical && e.dom_start == s)
            .map(|e| e.gloss.as_str())
            .collect();
        let mut k = 0;
        for e in inv.ids() {
            for _ in 0..table.count(s, e) {
                let gloss = if glosses.is_empty() {
                    format!("SIGN-{}", inv.label(s))
                } else {
                    glosses[k % glosses.len()].to_string()
                };
                k += 1;
                let token = SignToken {
                    gloss,
                    tier: Tier::Dominant,
                    start_frame: 0,
                    end_frame: 11 + (no % 7) as u32,
                    dom_hs: Some((s, Some(e))),
                    ndh_hs: None,
                    class_tags: Default::default(),
                    reduction_tags: Default::default(),
                };
                utterances.push(
                    Utterance::new(format!("iso-{no:04}"), format!("s{:02}", 1 + no % 6), FPS, vec![token]).unwrap(),
                );
                no += 1;
            }
        }
    }
    Corpus { utterances }
}

struct Tok<'a> {
    gloss: &'a str,
    tier: Tier,
    frames: (u32, u32),
    dom: Option<(&'a str, &'a str)>,
    ndh: Option<(&'a str, &'a str)>,
    tags: &'a [SignClass],
}

fn scenario(inv: &Inventory, id: &str, translation: &str, toks: &[Tok<'_>]) -> Utterance {
    let pair = |p: Option<(&str, &str)>| p.map(|(a, b)| (inv.id(a).unwrap(), Some(inv.id(b).unwrap())));
    let tokens = toks
        .iter()
        .map(|t| SignToken {
            gloss: t.gloss.to_string(),
            tier: t.tier,
            start_frame: t.frames.0,
            end_frame: t.frames.1,
            dom_hs: pair(t.dom),
            ndh_hs: pair(t.ndh),
            class_tags: t.tags.iter().copied().collect(),
            reduction_tags: Default::default(),
        })
        .collect();
    Utterance::new(id, "s01", FPS, tokens)
        .unwrap()
        .with_translation(Some(translation.to_string()))
}

fn disambiguation_corpus(inv: &Inventory) -> Corpus {
    use Tier::*;
    let none: &[SignClass] = &[];
    let index: &[SignClass] = &[SignClass::Index];
    let fs: &[SignClass] = &[SignClass::Fingerspelled];
    let t = |gloss, tier, frames, dom, ndh, tags| Tok {
        gloss,
        tier,
        frames,
        dom,
        ndh,
        tags,
    };
    let utterances = vec![
        scenario(
            inv,
            "hold",
            "I drove; where did you go?",
            &[
                t("DRIVE", Both, (0, 14), Some(("S", "S")), Some(("S", "S")), none),
                t("DRIVE", Nondominant, (15, 60), None, Some(("S", "S")), none),
                t("IX-1p", Dominant, (16, 28), Some(("1", "1")), None, index),
                t("WHERE", Dominant, (30, 45), Some(("1", "1")), None, none),
            ],
        ),
        scenario(
            inv,
            "mirroring",
            "that one, over there",
            &[
                t("KNOW", Dominant, (0, 10), Some(("B-L", "B-L")), None, none),
                t("IX-loc", Dominant, (12, 22), Some(("1", "1")), None, index),
                t("IX-loc", Nondominant, (12, 22), None, Some(("1", "1")), index),
            ],
        ),
        scenario(
            inv,
            "two-independent",
            "on the phone, I have experience",
            &[
                t("PHONE", Nondominant, (0, 40), None, Some(("Y", "Y")), none),
                t("EXPERIENCE", Dominant, (5, 30), Some(("5", "flat-O")), None, none),
            ],
        ),
        scenario(
            inv,
            "focus-marker",
            "LISA, that one",
            &[
                t("1\"focus\"", Nondominant, (0, 40), None, Some(("1", "1")), none),
                t("fs-LISA", Dominant, (5, 30), Some(("L", "A")), None, fs),
            ],
        ),
        scenario(
            inv,
            "theme-buoy",
            "the first topic: I myself know",
            &[
                t("BUOY-THEME", Nondominant, (0, 50), None, Some(("1", "1")), none),
                t("SELF", Dominant, (5, 20), Some(("10", "10")), None, none),
                t("GOOD", Dominant, (25, 40), Some(("B-L", "B-L")), None, none),
            ],
        ),
        scenario(
            inv,
            "weak-drop",
            "I am angry",
            &[
                t("IX-1p", Dominant, (0, 8), Some(("1", "1")), None, index),
                t("(1h)ANGRY", Dominant, (10, 24), Some(("crvd-5", "crvd-5")), None, none),
            ],
        ),
    ];
    Corpus { utterances }
}

fn write(dir: &Path, name: &str, text: &str) {
    let path = dir.join(name);
    fs::write(&path, text).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
    println!("wrote {} ({} bytes)", path.display(), text.len());
}

fn main() {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"));
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let table = data::start_end_stats(&inv);

    write(&dir, "start_end_stats.json", &table.to_json_string(&inv));
    let iso = start_end_corpus(&inv, &lex, &table);
    let refit = TransitionTable::fit(iso.utterances.iter().flat_map(|u| u.tokens()), &inv);
    assert_eq!(refit.table, table, "isolated-sign corpus must reproduce the stats");
    write(&dir, "start_end_corpus.jsonl", &corpus_to_string(&iso, &inv));
    write(&dir, "coartic_corpus.jsonl", &corpus_to_string(&coartic_corpus(&inv, &lex), &inv));
    write(&dir, "disambiguation.jsonl", &corpus_to_string(&disambiguation_corpus(&inv), &inv));
}
