use proptest::prelude::*;

use signphon::data;
use signphon::lexicon::{
    check_dominance, check_symmetry, classify_sign_type, validate_entry, Check, MovementRelation,
    OrientationRelation,
};
use signphon::{Handedness, HandshapeClass, HandshapeId, Inventory, Lexicon, LexiconEntry, SignClass, SignType};

#[test]
fn distance_is_a_metric_on_the_whole_inventory() {
    let inv = Inventory::default_asl();
    let ids: Vec<HandshapeId> = inv.ids().collect();
    for &a in &ids {
        assert_eq!(inv.distance(a, a), 0.0);
        for &b in &ids {
            let ab = inv.distance(a, b);
            assert_eq!(ab, inv.distance(b, a));
            assert!((0.0..=6.0).contains(&ab));
            assert_eq!(ab == 0.0, inv.features(a) == inv.features(b));
            for &c in &ids {
                assert!(inv.distance(a, c) <= ab + inv.distance(b, c) + 1e-12);
            }
        }
    }
}

#[test]
fn every_handshape_has_one_class_and_classes_are_used() {
    let inv = Inventory::default_asl();
    let mut seen = std::collections::BTreeSet::new();
    for id in inv.ids() {
        let c = inv.class_of(id);
        assert_eq!(HandshapeClass::ALL.iter().filter(|&&k| k == c).count(), 1);
        seen.insert(c);
    }
    assert_eq!(seen.len(), HandshapeClass::ALL.len());
}

#[test]
fn unmarked_set_is_six_self_based_shapes() {
    let inv = Inventory::default_asl();
    let bases = inv.unmarked_bases();
    assert_eq!(bases.len(), 6);
    for &b in bases {
        assert_eq!(inv.base(b), b);
        assert!(inv.is_unmarked(b));
    }
    for id in inv.ids() {
        assert_eq!(inv.is_unmarked(id), bases.contains(&inv.base(id)));
    }
}

#[test]
fn inventory_and_lexicon_text_round_trip() {
    let inv = Inventory::default_asl();
    let text = inv.to_canonical_string();
    assert_eq!(Inventory::load(text.as_bytes()).unwrap().to_canonical_string(), text);
    let lex = data::default_lexicon(&inv);
    let again = Lexicon::parse_str(&lex.to_canonical_string(&inv), &inv).unwrap();
    assert_eq!(again.to_canonical_string(&inv), lex.to_canonical_string(&inv));
}

#[test]
fn unknown_labels_are_errors() {
    let inv = Inventory::default_asl();
    assert!(inv.id("no-such-shape").is_err());
    assert!(inv.distance_labels("1", "no-such-shape").is_err());
}

#[test]
fn shipped_lexicon_is_well_formed_and_typed() {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    assert!(!lex.is_empty());
    for e in lex.iter() {
        let report = validate_entry(e, &inv);
        assert!(report.is_well_formed(), "{}: {:?}", e.gloss, report.problems());
        let t = classify_sign_type(e, &inv).unwrap();
        let one = matches!(t, SignType::Type0 | SignType::TypeX);
        assert_eq!(one, e.handedness == Handedness::One, "{}", e.gloss);
    }
}

#[test]
fn hand_prefix_resolves_to_base_entry() {
    let inv = Inventory::default_asl();
    let lex = data::default_lexicon(&inv);
    let r = lex.resolve("(1h)ANGRY").unwrap();
    assert_eq!(r.entry.gloss, "ANGRY");
    assert_eq!(r.effective_handedness(), Handedness::One);
    assert!(lex.resolve("NOT-A-SIGN").is_err());
}

fn entry() -> impl Strategy<Value = LexiconEntry> {
    let n = Inventory::default_asl().len();
    let hs = 0..n;
    (
        (prop::sample::select(Handedness::ALL), hs.clone(), hs.clone()),
        (prop::option::of(hs.clone()), prop::option::of(hs)),
        (any::<bool>(), any::<bool>(), any::<bool>()),
        prop::sample::select(MovementRelation::ALL),
        prop::sample::select(OrientationRelation::ALL),
    )
        .prop_map(|((handedness, ds, de), (ns, ne), (moves, body, loc), mv, or)| {
            let ids: Vec<HandshapeId> = Inventory::default_asl().ids().collect();
            LexiconEntry {
                gloss: "G".into(),
                handedness,
                dom_start: ids[ds],
                dom_end: ids[de],
                ndh_start: ns.map(|i| ids[i]),
                ndh_end: ne.map(|i| ids[i]),
                both_hands_move: moves,
                movement_relation: mv,
                contacts_body: body,
                ndh_is_location: loc,
                orientation_relation: or,
                sign_class: SignClass::Lexical,
            }
        })
}

proptest! {
    #[test]
    fn symmetry_applies_exactly_when_both_hands_move(e in entry()) {
        let inv = Inventory::default_asl();
        prop_assert_eq!(check_symmetry(&e, &inv) == Check::NotApplicable, !e.both_hands_move);
        prop_assert_eq!(check_dominance(&e, &inv) == Check::NotApplicable, !e.ndh_is_location);
    }

    #[test]
    fn classification_accepts_exactly_well_formed_entries(e in entry()) {
        let inv = Inventory::default_asl();
        let ok = validate_entry(&e, &inv).is_well_formed();
        let typed = classify_sign_type(&e, &inv);
        prop_assert_eq!(typed.is_ok(), ok);
        if let Ok(t) = typed {
            match t {
                SignType::Type0 => prop_assert!(e.handedness == Handedness::One && !e.contacts_body),
                SignType::TypeX => prop_assert!(e.handedness == Handedness::One && e.contacts_body),
                SignType::Type1 => prop_assert!(e.both_hands_move),
                SignType::Type2 => prop_assert!(inv.same_base(e.ndh_start.unwrap(), e.dom_start)),
                SignType::Type3 => {
                    prop_assert!(!inv.same_base(e.ndh_start.unwrap(), e.dom_start));
                    prop_assert!(inv.is_unmarked(e.ndh_start.unwrap()));
                }
            }
        }
    }

    #[test]
    fn distance_labels_agree_with_ids(a in 0usize..40, b in 0usize..40) {
        let inv = Inventory::default_asl();
        let ids: Vec<HandshapeId> = inv.ids().collect();
        let (a, b) = (ids[a % ids.len()], ids[b % ids.len()]);
        prop_assert_eq!(inv.distance_labels(inv.label(a), inv.label(b)).unwrap(), inv.distance(a, b));
    }
}
