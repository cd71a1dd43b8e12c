use proptest::prelude::*;

use signphon::reranker::{evaluate, read_dataset, rerank, synth_generate, write_dataset, NoiseModel, ObservationPair};
use signphon::transitions::{JointPrior, SmoothingConfig};
use signphon::{data, Inventory};

fn prior(inv: &Inventory) -> JointPrior {
    data::start_end_stats(inv).joint_prior(SmoothingConfig::default()).unwrap()
}

#[test]
fn frozen_noisy_accuracy() {
    let inv = Inventory::default_asl();
    let p = prior(&inv);
    let set = synth_generate(&p, &NoiseModel::new(0.5, 42).unwrap(), 2_000, &inv).unwrap();
    let a0 = evaluate(&set, &p, 0.0, &inv).unwrap();
    let a1 = evaluate(&set, &p, 1.0, &inv).unwrap();
    assert!(a1.rank1_accuracy - a0.rank1_accuracy >= 0.48, "{a0:?} {a1:?}");
    for m in [a0, a1] {
        assert_eq!(m.samples, 2_000);
        assert!(m.mean_reciprocal_rank >= m.rank1_accuracy);
        assert!(m.mean_reciprocal_rank <= 1.0);
    }
}

#[test]
fn generation_is_seeded() {
    let inv = Inventory::default_asl();
    let p = prior(&inv);
    let gen = |seed| synth_generate(&p, &NoiseModel::new(0.3, seed).unwrap(), 200, &inv).unwrap();
    assert_eq!(gen(1), gen(1));
    assert_ne!(gen(1), gen(2));
}

#[test]
fn dataset_round_trips_through_jsonl() {
    let inv = Inventory::default_asl();
    let p = prior(&inv);
    let set = synth_generate(&p, &NoiseModel::new(0.7, 9).unwrap(), 300, &inv).unwrap();
    let mut buf = Vec::new();
    write_dataset(&set, &inv, &mut buf).unwrap();
    assert_eq!(read_dataset(buf.as_slice(), &inv).unwrap(), set);
}

#[test]
fn out_of_range_parameters_rejected() {
    let inv = Inventory::default_asl();
    let p = prior(&inv);
    assert!(NoiseModel::new(1.5, 0).is_err());
    assert!(NoiseModel::new(-0.1, 0).is_err());
    let obs = ObservationPair::one_hot(inv.id("A").unwrap(), inv.id("A").unwrap(), &inv);
    assert!(rerank(&obs, &p, -1.0, &inv).is_err());
    assert!(rerank(&obs, &p, 1.5, &inv).is_err());
    assert!(rerank(&obs, &p, f64::NAN, &inv).is_err());
    assert!(evaluate(&[], &p, 1.0, &inv).is_err());
    assert!(read_dataset(r#"{"true":["A","ZZ"],"start_scores":{},"end_scores":{}}"#.as_bytes(), &inv).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clean_observations_are_always_recovered(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let inv = Inventory::default_asl();
        let p = prior(&inv);
        let set = synth_generate(&p, &NoiseModel::new(0.0, seed).unwrap(), 50, &inv).unwrap();
        prop_assert_eq!(evaluate(&set, &p, lambda, &inv).unwrap().rank1_accuracy, 1.0);
    }

    #[test]
    fn ranking_is_a_permutation_of_supported_pairs(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let inv = Inventory::default_asl();
        let p = prior(&inv);
        let s = &synth_generate(&p, &NoiseModel::new(0.9, seed).unwrap(), 1, &inv).unwrap()[0];
        let r = rerank(&s.obs, &p, lambda, &inv).unwrap();
        let support = |v: &[f64]| v.iter().filter(|x| **x > 0.0).count();
        prop_assert_eq!(r.ranked.len(), support(s.obs.start()) * support(s.obs.end()));
        prop_assert!(r.ranked.windows(2).all(|w| w[0].score >= w[1].score));
    }
}
