//! Start→end handshape co-occurrence statistics.
//!
//! A [`TransitionTable`] counts, for every start handshape, how often each end
//! handshape follows it within a sign. Conditional and joint probabilities use
//! additive smoothing with constant `alpha` over the whole inventory.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::{Hand, SignToken};
use crate::error::{Error, Result};
use crate::inventory::{HandshapeId, Inventory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    pub alpha: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { alpha: 0.1 }
    }
}

impl SmoothingConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::OutOfRange {
                name: "alpha",
                range: "[0, inf)",
                value: alpha,
            });
        }
        Ok(Self { alpha })
    }

    pub fn unsmoothed() -> Self {
        Self { alpha: 0.0 }
    }
}

/// Dense count matrix over an inventory of `inventory_size` handshapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    inventory_size: usize,
    counts: Vec<u64>,
    start_totals: Vec<u64>,
}

/// Result of fitting: the table and the number of tokens skipped for
/// missing handshapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitOutcome {
    pub table: TransitionTable,
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondProb {
    pub p: f64,
    /// Set when the start row is empty and no smoothing is applied.
    pub undefined_row: bool,
}

impl TransitionTable {
    pub fn new(inventory_size: usize) -> Self {
        Self {
            inventory_size,
            counts: vec![0; inventory_size * inventory_size],
            start_totals: vec![0; inventory_size],
        }
    }

    pub fn inventory_size(&self) -> usize {
        self.inventory_size
    }

    fn idx(&self, s: HandshapeId, e: HandshapeId) -> usize {
        s.index() * self.inventory_size + e.index()
    }

    pub fn count(&self, s: HandshapeId, e: HandshapeId) -> u64 {
        self.counts[self.idx(s, e)]
    }

    pub fn start_total(&self, s: HandshapeId) -> u64 {
        self.start_totals[s.index()]
    }

    pub fn total(&self) -> u64 {
        self.start_totals.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn add(&mut self, s: HandshapeId, e: HandshapeId, n: u64) {
        let i = self.idx(s, e);
        self.counts[i] += n;
        self.start_totals[s.index()] += n;
    }

    /// Pointwise count addition.
    pub fn merge(&mut self, other: &TransitionTable) {
        assert_eq!(self.inventory_size, other.inventory_size, "tables over different inventories");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.start_totals.iter_mut().zip(&other.start_totals) {
            *a += b;
        }
    }

    /// Check that each start total equals the sum of its row.
    pub fn check_row_sums(&self, inv: &Inventory) -> Result<()> {
        let n = self.inventory_size;
        for s in 0..n {
            let sum: u64 = self.counts[s * n..(s + 1) * n].iter().sum();
            if sum != self.start_totals[s] {
                return Err(Error::RowSum {
                    start: inv.label(inv.ids().nth(s).expect("row within inventory")).to_string(),
                    sum,
                    total: self.start_totals[s],
                });
            }
        }
        Ok(())
    }

    /// Count dominant-hand (start, end) pairs.
    pub fn fit<'a, I>(tokens: I, inv: &Inventory) -> FitOutcome
    where
        I: IntoIterator<Item = &'a SignToken>,
    {
        Self::fit_hand(tokens, inv, Hand::Dominant)
    }

    pub fn fit_hand<'a, I>(tokens: I, inv: &Inventory, hand: Hand) -> FitOutcome
    where
        I: IntoIterator<Item = &'a SignToken>,
    {
        let mut table = TransitionTable::new(inv.len());
        let mut skipped = 0;
        for t in tokens {
            match t.observed(hand) {
                Some((s, e)) => table.add(s, e, 1),
                None => skipped += 1,
            }
        }
        FitOutcome { table, skipped }
    }

    pub fn cond_prob(&self, s: HandshapeId, e: HandshapeId, cfg: SmoothingConfig) -> CondProb {
        let total = self.start_total(s) as f64;
        let denom = total + cfg.alpha * self.inventory_size as f64;
        if denom == 0.0 {
            return CondProb {
                p: 0.0,
                undefined_row: true,
            };
        }
        CondProb {
            p: (self.count(s, e) as f64 + cfg.alpha) / denom,
            undefined_row: false,
        }
    }

    /// Unsmoothed conditional probability as an exact fraction.
    pub fn exact_cond_prob(&self, s: HandshapeId, e: HandshapeId) -> Option<Ratio<u64>> {
        let total = self.start_total(s);
        (total > 0).then(|| Ratio::new(self.count(s, e), total))
    }

    pub fn joint_prior(&self, cfg: SmoothingConfig) -> Result<JointPrior> {
        let n = self.inventory_size;
        let total = self.total() as f64;
        let denom = total + cfg.alpha * (n * n) as f64;
        if denom == 0.0 {
            return Err(Error::UndefinedPrior);
        }
        let probs = self.counts.iter().map(|&c| (c as f64 + cfg.alpha) / denom).collect();
        Ok(JointPrior { size: n, probs })
    }

    /// Rows by descending start total, ends by descending count; ties go to
    /// the lexicographically smaller label.
    pub fn report(&self, inv: &Inventory, cfg: SmoothingConfig) -> FrequencyChart {
        let mut starts: Vec<HandshapeId> = inv.ids().filter(|&s| self.start_total(s) > 0).collect();
        starts.sort_by(|&a, &b| {
            self.start_total(b)
                .cmp(&self.start_total(a))
                .then_with(|| inv.cmp_labels(a, b))
        });
        let rows = starts
            .into_iter()
            .map(|s| {
                let mut ends: Vec<HandshapeId> = inv.ids().filter(|&e| self.count(s, e) > 0).collect();
                ends.sort_by(|&a, &b| {
                    self.count(s, b)
                        .cmp(&self.count(s, a))
                        .then_with(|| inv.cmp_labels(a, b))
                });
                let total = self.start_total(s);
                let ends: Vec<ChartCell> = ends
                    .into_iter()
                    .map(|e| ChartCell {
                        end: e,
                        count: self.count(s, e),
                        share: self.count(s, e) as f64 / total as f64,
                        smoothed: self.cond_prob(s, e, cfg).p,
                    })
                    .collect();
                let other_ends_above_one_percent = ends
                    .iter()
                    .filter(|c| c.end != s && c.count * 100 > total)
                    .count();
                ChartRow {
                    start: s,
                    total,
                    ends,
                    other_ends_above_one_percent,
                }
            })
            .collect();
        FrequencyChart { rows }
    }

    pub fn load<R: Read>(source: R, inv: &Inventory) -> Result<TransitionTable> {
        let file: StatsFile = serde_json::from_reader(source)?;
        if file.inventory_size != inv.len() {
            return Err(Error::InventorySizeMismatch {
                file: file.inventory_size,
                inventory: inv.len(),
            });
        }
        let mut table = TransitionTable::new(inv.len());
        let mut seen_rows = vec![false; inv.len()];
        for row in &file.rows {
            let s = inv.id(&row.start)?;
            if std::mem::replace(&mut seen_rows[s.index()], true) {
                return Err(Error::Structure {
                    gloss: row.start.clone(),
                    message: "start handshape listed twice".into(),
                });
            }
            for cell in &row.ends {
                let e = inv.id(&cell.end)?;
                if table.count(s, e) != 0 {
                    return Err(Error::Structure {
                        gloss: row.start.clone(),
                        message: format!("end `{}` listed twice", cell.end),
                    });
                }
                let i = table.idx(s, e);
                table.counts[i] = cell.count;
            }
            table.start_totals[s.index()] = row.total;
        }
        table.check_row_sums(inv)?;
        Ok(table)
    }

    /// Stats file in report order.
    pub fn save<W: Write>(&self, inv: &Inventory, mut sink: W) -> Result<()> {
        let chart = self.report(inv, SmoothingConfig::unsmoothed());
        let file = StatsFile {
            inventory_size: self.inventory_size,
            rows: chart
                .rows
                .iter()
                .map(|r| StatsRow {
                    start: inv.label(r.start).to_string(),
                    total: r.total,
                    ends: r
                        .ends
                        .iter()
                        .map(|c| StatsCell {
                            end: inv.label(c.end).to_string(),
                            count: c.count,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut sink, &file)?;
        writeln!(sink)?;
        Ok(())
    }

    pub fn to_json_string(&self, inv: &Inventory) -> String {
        let mut buf = Vec::new();
        self.save(inv, &mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("stats are UTF-8")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsFile {
    inventory_size: usize,
    rows: Vec<StatsRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsRow {
    start: String,
    total: u64,
    ends: Vec<StatsCell>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsCell {
    end: String,
    count: u64,
}

/// Normalized joint distribution over (start, end) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrior {
    size: usize,
    probs: Vec<f64>,
}

impl JointPrior {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, s: HandshapeId, e: HandshapeId) -> f64 {
        self.probs[s.index() * self.size + e.index()]
    }

    /// Row-major probabilities, start index outermost.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartCell {
    #[serde(skip)]
    pub end: HandshapeId,
    pub count: u64,
    /// Unsmoothed share of the row.
    pub share: f64,
    pub smoothed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartRow {
    pub start: HandshapeId,
    pub total: u64,
    pub ends: Vec<ChartCell>,
    /// Ends other than the start handshape itself with unsmoothed share above 1%.
    pub other_ends_above_one_percent: usize,
}

impl ChartRow {
    pub fn most_likely_end(&self) -> Option<HandshapeId> {
        self.ends.first().map(|c| c.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChart {
    pub rows: Vec<ChartRow>,
}

impl FrequencyChart {
    /// Text chart: one line per start handshape, ends in decreasing order.
    pub fn render_text(&self, inv: &Inventory) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Dominant handshapes: start totals and co-occurring end handshapes");
        for row in &self.rows {
            let _ = write!(out, "{:<14}{:>6} |", inv.label(row.start), row.total);
            for c in &row.ends {
                let _ = write!(out, " {} {}", inv.label(c.end), c.count);
                let _ = write!(out, " ({:.2}%)", c.share * 100.0);
                out.push(';');
            }
            if out.ends_with(';') {
                out.pop();
            }
            let _ = writeln!(out, " | other ends >1%: {}", row.other_ends_above_one_percent);
        }
        out
    }

    pub fn to_json(&self, inv: &Inventory) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "start": inv.label(r.start),
                    "total": r.total,
                    "other_ends_above_one_percent": r.other_ends_above_one_percent,
                    "ends": r.ends.iter().map(|c| serde_json::json!({
                        "end": inv.label(c.end),
                        "count": c.count,
                        "share": c.share,
                        "smoothed": c.smoothed,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "rows": rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tier;
    use std::collections::BTreeSet;

    fn token(inv: &Inventory, s: &str, e: &str) -> SignToken {
        SignToken {
            gloss: "T".into(),
            tier: Tier::Dominant,
            start_frame: 0,
            end_frame: 1,
            dom_hs: Some((inv.id(s).unwrap(), Some(inv.id(e).unwrap()))),
            ndh_hs: None,
            class_tags: BTreeSet::new(),
            reduction_tags: BTreeSet::new(),
        }
    }

    #[test]
    fn empty_fit_is_all_zero() {
        let inv = Inventory::default_asl();
        let out = TransitionTable::fit(std::iter::empty(), &inv);
        assert!(out.table.is_empty());
        assert_eq!(out.skipped, 0);
        assert!(matches!(
            out.table.joint_prior(SmoothingConfig::unsmoothed()),
            Err(Error::UndefinedPrior)
        ));
    }

    #[test]
    fn single_token_fit() {
        let inv = Inventory::default_asl();
        let toks = [token(&inv, "1", "X")];
        let t = TransitionTable::fit(&toks, &inv).table;
        let (one, x) = (inv.id("1").unwrap(), inv.id("X").unwrap());
        assert_eq!(t.count(one, x), 1);
        assert_eq!(t.start_total(one), 1);
    }

    #[test]
    fn missing_handshapes_are_tallied() {
        let inv = Inventory::default_asl();
        let mut t = token(&inv, "1", "1");
        t.dom_hs = None;
        let out = TransitionTable::fit([&t], &inv);
        assert_eq!(out.skipped, 1);
        assert!(out.table.is_empty());
    }

    #[test]
    fn empty_row_is_flagged_without_smoothing() {
        let inv = Inventory::default_asl();
        let t = TransitionTable::new(inv.len());
        let y = inv.id("Y").unwrap();
        let cp = t.cond_prob(y, y, SmoothingConfig::unsmoothed());
        assert_eq!(cp.p, 0.0);
        assert!(cp.undefined_row);
        let cp = t.cond_prob(y, y, SmoothingConfig::new(1.0).unwrap());
        assert!(!cp.undefined_row);
        assert!((cp.p - 1.0 / inv.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn negative_alpha_rejected() {
        assert!(SmoothingConfig::new(-0.1).is_err());
        assert!(SmoothingConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn row_sum_mismatch_rejected() {
        let inv = Inventory::default_asl();
        let text = format!(
            r#"{{"inventory_size":{},"rows":[{{"start":"1","total":3,"ends":[{{"end":"1","count":2}}]}}]}}"#,
            inv.len()
        );
        assert!(matches!(
            TransitionTable::load(text.as_bytes(), &inv),
            Err(Error::RowSum { sum: 2, total: 3, .. })
        ));
    }

    #[test]
    fn unknown_label_and_size_mismatch_rejected() {
        let inv = Inventory::default_asl();
        let text = format!(
            r#"{{"inventory_size":{},"rows":[{{"start":"QQ","total":0,"ends":[]}}]}}"#,
            inv.len()
        );
        assert!(matches!(TransitionTable::load(text.as_bytes(), &inv), Err(Error::UnknownHandshape(_))));
        let text = r#"{"inventory_size":3,"rows":[]}"#;
        assert!(matches!(
            TransitionTable::load(text.as_bytes(), &inv),
            Err(Error::InventorySizeMismatch { file: 3, .. })
        ));
    }

    #[test]
    fn merge_keeps_row_sums() {
        let inv = Inventory::default_asl();
        let a = TransitionTable::fit(&[token(&inv, "1", "X"), token(&inv, "5", "S")], &inv).table;
        let b = TransitionTable::fit(&[token(&inv, "1", "1")], &inv).table;
        let mut m = a.clone();
        m.merge(&b);
        m.check_row_sums(&inv).unwrap();
        assert_eq!(m.start_total(inv.id("1").unwrap()), 2);
    }
}
