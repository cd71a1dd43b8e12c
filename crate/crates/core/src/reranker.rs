//! Prior-weighted re-ranking of noisy start/end handshape hypotheses.
//!
//! A pair `(s, e)` scores `start(s) · end(e) · P(s, e)^λ`. With `λ = 0` the
//! prior drops out (including zero-prior pairs) and the ranking is pure
//! likelihood. Ties are broken by start label, then end label.
//!
//! The synthetic front end confuses handshapes in proportion to
//! `exp(-d / σ)` over the inventory distance. With probability `κ` the peak
//! of an endpoint's score vector lands on a confuser rather than the truth;
//! the scores then mix a one-hot on that peak (weight `1 − κ`) with the
//! peak's confusion kernel (weight `κ`). Sampling uses ChaCha8 seeded from a
//! `u64`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::inventory::{HandshapeId, Inventory};
use crate::lexicon::SignType;
use crate::transitions::JointPrior;

/// Likelihood vectors over the inventory for the start and end handshape.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPair {
    start: Vec<f64>,
    end: Vec<f64>,
}

fn check_scores(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidObservation(format!(
            "{name} scores cover {} handshapes, inventory has {n}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidObservation(format!("{name} scores must be finite and non-negative")));
    }
    if !v.iter().any(|x| *x > 0.0) {
        return Err(Error::InvalidObservation(format!("{name} scores are all zero")));
    }
    Ok(())
}

impl ObservationPair {
    pub fn new(start: Vec<f64>, end: Vec<f64>, inv: &Inventory) -> Result<Self> {
        check_scores("start", &start, inv.len())?;
        check_scores("end", &end, inv.len())?;
        Ok(Self { start, end })
    }

    /// Build from sparse label maps; missing labels score zero.
    pub fn from_labels<S: AsRef<str>>(start: &[(S, f64)], end: &[(S, f64)], inv: &Inventory) -> Result<Self> {
        let dense = |pairs: &[(S, f64)]| -> Result<Vec<f64>> {
            let mut v = vec![0.0; inv.len()];
            for (label, score) in pairs {
                v[inv.id(label.as_ref())?.index()] = *score;
            }
            Ok(v)
        };
        Self::new(dense(start)?, dense(end)?, inv)
    }

    pub fn one_hot(s: HandshapeId, e: HandshapeId, inv: &Inventory) -> Self {
        let mut start = vec![0.0; inv.len()];
        let mut end = vec![0.0; inv.len()];
        start[s.index()] = 1.0;
        end[e.index()] = 1.0;
        Self { start, end }
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn end(&self) -> &[f64] {
        &self.end
    }

    pub fn start_score(&self, h: HandshapeId) -> f64 {
        self.start[h.index()]
    }

    pub fn end_score(&self, h: HandshapeId) -> f64 {
        self.end[h.index()]
    }

    pub fn scaled(&self, start_by: f64, end_by: f64) -> Self {
        Self {
            start: self.start.iter().map(|x| x * start_by).collect(),
            end: self.end.iter().map(|x| x * end_by).collect(),
        }
    }
}

/// Highest-scoring handshape, ties to the lexicographically smaller label.
pub fn argmax(scores: &[f64], inv: &Inventory) -> HandshapeId {
    inv.ids()
        .max_by(|&a, &b| {
            scores[a.index()]
                .total_cmp(&scores[b.index()])
                .then_with(|| inv.cmp_labels(b, a))
        })
        .expect("inventory is never empty")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedPair {
    pub start: HandshapeId,
    pub end: HandshapeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankResult {
    pub ranked: Vec<RankedPair>,
}

impl RerankResult {
    pub fn top(&self) -> Option<(HandshapeId, HandshapeId)> {
        self.ranked.first().map(|r| (r.start, r.end))
    }

    /// One-based position of a pair, if it scored above zero.
    pub fn rank_of(&self, s: HandshapeId, e: HandshapeId) -> Option<usize> {
        self.ranked.iter().position(|r| r.start == s && r.end == e).map(|i| i + 1)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange {
            name: "lambda",
            range: "[0, 1]",
            value: lambda,
        });
    }
    Ok(())
}

fn pair_score(obs: &ObservationPair, prior: &JointPrior, lambda: f64, s: HandshapeId, e: HandshapeId) -> f64 {
    let p = if lambda == 0.0 { 1.0 } else { prior.get(s, e).powf(lambda) };
    obs.start_score(s) * obs.end_score(e) * p
}

/// Ranking order: score descending, then start label, then end label.
fn rank_cmp(inv: &Inventory, a: &RankedPair, b: &RankedPair) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| inv.cmp_labels(a.start, b.start))
        .then_with(|| inv.cmp_labels(a.end, b.end))
}

fn check_prior(prior: &JointPrior, inv: &Inventory) -> Result<()> {
    if prior.size() != inv.len() {
        return Err(Error::InventorySizeMismatch {
            file: prior.size(),
            inventory: inv.len(),
        });
    }
    Ok(())
}

pub fn rerank(obs: &ObservationPair, prior: &JointPrior, lambda: f64, inv: &Inventory) -> Result<RerankResult> {
    check_lambda(lambda)?;
    check_prior(prior, inv)?;
    let mut ranked = Vec::new();
    for s in inv.ids().filter(|&s| obs.start_score(s) > 0.0) {
        for e in inv.ids().filter(|&e| obs.end_score(e) > 0.0) {
            let score = pair_score(obs, prior, lambda, s, e);
            if score > 0.0 {
                ranked.push(RankedPair { start: s, end: e, score });
            }
        }
    }
    ranked.sort_by(|a, b| rank_cmp(inv, a, b));
    Ok(RerankResult { ranked })
}

/// Rank of one pair in the full ranking, computed by counting.
fn rank_by_count(obs: &ObservationPair, prior: &JointPrior, lambda: f64, inv: &Inventory, s: HandshapeId, e: HandshapeId) -> Option<usize> {
    let target = RankedPair {
        start: s,
        end: e,
        score: pair_score(obs, prior, lambda, s, e),
    };
    if target.score <= 0.0 {
        return None;
    }
    let mut ahead = 0;
    for s2 in inv.ids().filter(|&x| obs.start_score(x) > 0.0) {
        for e2 in inv.ids().filter(|&x| obs.end_score(x) > 0.0) {
            let other = RankedPair {
                start: s2,
                end: e2,
                score: pair_score(obs, prior, lambda, s2, e2),
            };
            if rank_cmp(inv, &other, &target) == Ordering::Less {
                ahead += 1;
            }
        }
    }
    Some(ahead + 1)
}

/// Observations for the two hands after applying sign-type constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledObservation {
    pub dom: ObservationPair,
    pub ndh: ObservationPair,
}

fn normalize(v: &mut [f64]) -> bool {
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= total);
    true
}

fn geometric_pool(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x * y).sqrt()).collect();
    if !normalize(&mut out) {
        return Err(Error::InvalidObservation("the two hands share no handshape with positive score".into()));
    }
    Ok(out)
}

/// Combine evidence from both hands.
///
/// Same-handshape types pool by normalized geometric mean, so a zero on
/// either hand vetoes a handshape. Different-handshape types keep the
/// dominant scores and restrict the passive hand to the unmarked set.
pub fn pool_two_hands(
    dom: &ObservationPair,
    ndh: &ObservationPair,
    sign_type: SignType,
    inv: &Inventory,
) -> Result<PooledObservation> {
    match sign_type {
        SignType::Type1 | SignType::Type2 => {
            let pooled = ObservationPair {
                start: geometric_pool(&dom.start, &ndh.start)?,
                end: geometric_pool(&dom.end, &ndh.end)?,
            };
            Ok(PooledObservation {
                dom: pooled.clone(),
                ndh: pooled,
            })
        }
        SignType::Type3 => {
            let mask = |v: &[f64]| -> Result<Vec<f64>> {
                let mut out: Vec<f64> = inv
                    .ids()
                    .map(|h| if inv.is_unmarked(h) { v[h.index()] } else { 0.0 })
                    .collect();
                if !normalize(&mut out) {
                    return Err(Error::DegenerateMask);
                }
                Ok(out)
            };
            Ok(PooledObservation {
                dom: dom.clone(),
                ndh: ObservationPair {
                    start: mask(&ndh.start)?,
                    end: mask(&ndh.end)?,
                },
            })
        }
        other => Err(Error::NotTwoHanded(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kappa: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kappa: f64, seed: u64) -> Result<Self> {
        let m = Self { kappa, sigma: 0.5, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::OutOfRange {
                name: "kappa",
                range: "[0, 1]",
                value: self.kappa,
            });
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::OutOfRange {
                name: "sigma",
                range: "(0, inf)",
                value: self.sigma,
            });
        }
        Ok(())
    }

    /// Normalized confusion weights around `center`, including `center` itself.
    pub fn kernel(&self, center: HandshapeId, inv: &Inventory) -> Vec<f64> {
        let mut k: Vec<f64> = inv
            .ids()
            .map(|x| (-inv.distance(center, x) / self.sigma).exp())
            .collect();
        normalize(&mut k);
        k
    }

    fn emit(&self, truth: HandshapeId, kernels: &[Vec<f64>], confusers: &[Option<WeightedIndex<f64>>], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let peak = match &confusers[truth.index()] {
            Some(dist) if self.kappa > 0.0 && rng.gen_bool(self.kappa) => dist.sample(rng),
            _ => truth.index(),
        };
        let mut v: Vec<f64> = kernels[peak].iter().map(|k| self.kappa * k).collect();
        v[peak] += 1.0 - self.kappa;
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub truth: (HandshapeId, HandshapeId),
    pub obs: ObservationPair,
}

/// Draw `n` labelled observations; identical seeds give identical datasets.
pub fn synth_generate(prior: &JointPrior, noise: &NoiseModel, n: usize, inv: &Inventory) -> Result<Vec<Sample>> {
    noise.validate()?;
    check_prior(prior, inv)?;
    let size = inv.len();
    let truth_dist = WeightedIndex::new(prior.as_slice()).map_err(|_| Error::UndefinedPrior)?;
    let kernels: Vec<Vec<f64>> = inv.ids().map(|h| noise.kernel(h, inv)).collect();
    let confusers: Vec<Option<WeightedIndex<f64>>> = inv
        .ids()
        .map(|h| {
            let w = kernels[h.index()]
                .iter()
                .enumerate()
                .map(|(i, k)| if i == h.index() { 0.0 } else { *k });
            WeightedIndex::new(w).ok()
        })
        .collect();
    let ids: Vec<HandshapeId> = inv.ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let cell = truth_dist.sample(&mut rng);
        let (s, e) = (ids[cell / size], ids[cell % size]);
        let start = noise.emit(s, &kernels, &confusers, &mut rng);
        let end = noise.emit(e, &kernels, &confusers, &mut rng);
        out.push(Sample {
            truth: (s, e),
            obs: ObservationPair { start, end },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub rank1_accuracy: f64,
    pub mean_reciprocal_rank: f64,
    pub samples: usize,
}

pub fn evaluate(dataset: &[Sample], prior: &JointPrior, lambda: f64, inv: &Inventory) -> Result<Metrics> {
    check_lambda(lambda)?;
    check_prior(prior, inv)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut hits = 0usize;
    let mut rr = 0.0;
    for sample in dataset {
        let (s, e) = sample.truth;
        if let Some(rank) = rank_by_count(&sample.obs, prior, lambda, inv, s, e) {
            if rank == 1 {
                hits += 1;
            }
            rr += 1.0 / rank as f64;
        }
    }
    let n = dataset.len() as f64;
    Ok(Metrics {
        rank1_accuracy: hits as f64 / n,
        mean_reciprocal_rank: rr / n,
        samples: dataset.len(),
    })
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    #[serde(rename = "true")]
    truth: [String; 2],
    start_scores: BTreeMap<String, f64>,
    end_scores: BTreeMap<String, f64>,
}

fn sparse(v: &[f64], inv: &Inventory) -> BTreeMap<String, f64> {
    inv.ids()
        .filter(|h| v[h.index()] > 0.0)
        .map(|h| (inv.label(h).to_string(), v[h.index()]))
        .collect()
}

pub fn write_dataset<W: Write>(dataset: &[Sample], inv: &Inventory, mut sink: W) -> Result<()> {
    for sample in dataset {
        let rec = SampleRecord {
            truth: [inv.label(sample.truth.0).into(), inv.label(sample.truth.1).into()],
            start_scores: sparse(&sample.obs.start, inv),
            end_scores: sparse(&sample.obs.end, inv),
        };
        serde_json::to_writer(&mut sink, &rec)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(source: R, inv: &Inventory) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        let pairs = |m: &BTreeMap<String, f64>| m.iter().map(|(k, v)| (k.clone(), *v)).collect::<Vec<_>>();
        let obs = ObservationPair::from_labels(&pairs(&rec.start_scores), &pairs(&rec.end_scores), inv)
            .map_err(|e| parse_err(i + 1, e.to_string()))?;
        let truth = (
            inv.id(&rec.truth[0]).map_err(|e| parse_err(i + 1, e.to_string()))?,
            inv.id(&rec.truth[1]).map_err(|e| parse_err(i + 1, e.to_string()))?,
        );
        out.push(Sample { truth, obs });
    }
    Ok(out)
}
