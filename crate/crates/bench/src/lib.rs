//! Shared inputs for the pipeline benchmarks.

use signphon::corpus::parse_corpus;
use signphon::reranker::{synth_generate, NoiseModel, Sample};
use signphon::transitions::{JointPrior, SmoothingConfig};
use signphon::{data, Corpus, Inventory, Lexicon};

const COARTIC: &str = include_str!("../../core/data/coartic_corpus.jsonl");
const START_END: &str = include_str!("../../core/data/start_end_corpus.jsonl");
const DISAMBIGUATION: &str = include_str!("../../core/data/disambiguation.jsonl");

pub struct Fixtures {
    pub inv: Inventory,
    pub lex: Lexicon,
    pub coartic: Corpus,
    pub start_end: Corpus,
    pub disambiguation: Corpus,
    pub prior: JointPrior,
}

impl Fixtures {
    pub fn load() -> Fixtures {
        let inv = Inventory::default_asl();
        let lex = data::default_lexicon(&inv);
        let parse = |text: &str| parse_corpus(text.as_bytes(), &inv).expect("shipped corpus parses");
        let coartic = parse(COARTIC);
        let start_end = parse(START_END);
        let disambiguation = parse(DISAMBIGUATION);
        let prior = data::start_end_stats(&inv)
            .joint_prior(SmoothingConfig::default())
            .expect("smoothed prior");
        Fixtures {
            inv,
            lex,
            coartic,
            start_end,
            disambiguation,
            prior,
        }
    }

    pub fn noisy(&self, kappa: f64, n: usize) -> Vec<Sample> {
        let noise = NoiseModel::new(kappa, 42).expect("kappa in range");
        synth_generate(&self.prior, &noise, n, &self.inv).expect("generation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        let f = Fixtures::load();
        assert_eq!(f.start_end.token_count(), 2858);
        assert_eq!(f.noisy(0.5, 10).len(), 10);
    }
}
