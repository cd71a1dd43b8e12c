//! Handshape coarticulation detection and prevalence reporting.
//!
//! A token's observed handshape at an endpoint *deviates* when it differs from
//! the citation form. A start deviation is perseverative when the observed
//! shape sits closer to the preceding sign's end handshape (on the same hand)
//! than the citation shape does; an end deviation is anticipatory when it sits
//! closer to the following sign's start handshape. Neighbors contribute their
//! observed handshape, falling back to their citation form.
//!
//! Two-handed signs with the same handshape on both hands may show a change
//! triggered on the dominant hand by a one-handed neighbor on both hands; the
//! non-dominant deviation is then attributed to the same trigger.
//!
//! Severity is banded by the largest feature distance between observed and
//! citation shapes across the qualifying endpoints: up to `tau_subtle` is
//! subtle, from `tau_major` on it is major, anything between is moderate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{filter_tokens, Corpus, ExclusionPolicy, Hand, Purpose, SignToken, Tier, TokenRef};
use crate::error::{Error, Result};
use crate::inventory::{HandshapeClass, HandshapeId, Inventory};
use crate::lexicon::{Handedness, Lexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Perseverative,
    Anticipatory,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AffectedHands {
    Dom,
    Ndh,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Subtle,
    Moderate,
    Major,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorThresholds {
    pub tau_subtle: f64,
    pub tau_major: f64,
    pub require_movement_toward: bool,
}

impl Default for DetectorThresholds {
    fn default() -> Self {
        Self {
            tau_subtle: 0.5,
            tau_major: 1.0,
            require_movement_toward: true,
        }
    }
}

impl DetectorThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.tau_subtle.is_nan() || self.tau_subtle < 0.0 {
            return Err(Error::OutOfRange {
                name: "tau_subtle",
                range: "[0, inf)",
                value: self.tau_subtle,
            });
        }
        if self.tau_major.is_nan() || self.tau_major < 0.0 {
            return Err(Error::OutOfRange {
                name: "tau_major",
                range: "[0, inf)",
                value: self.tau_major,
            });
        }
        Ok(())
    }

    pub fn severity(&self, max_distance: f64) -> Severity {
        if max_distance <= self.tau_subtle {
            Severity::Subtle
        } else if max_distance >= self.tau_major {
            Severity::Major
        } else {
            Severity::Moderate
        }
    }
}

/// One qualifying endpoint change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub hand: Hand,
    pub endpoint: Endpoint,
    #[serde(skip)]
    pub observed: HandshapeId,
    #[serde(skip)]
    pub canonical: HandshapeId,
    #[serde(skip)]
    pub trigger: HandshapeId,
    /// Feature distance between observed and citation handshape.
    pub distance: f64,
    /// Attributed through a same-handshape two-handed sign copying the dominant change.
    pub via_spread: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarticRecord {
    pub token: Option<TokenRef>,
    pub gloss: String,
    pub two_handed: bool,
    pub class: HandshapeClass,
    pub direction: Direction,
    pub hands: AffectedHands,
    pub severity: Severity,
    pub trigger_prev: Option<HandshapeId>,
    pub trigger_next: Option<HandshapeId>,
    pub spread_to_both_hands: bool,
    pub deviations: Vec<Deviation>,
}

impl CoarticRecord {
    pub fn max_distance(&self) -> f64 {
        self.deviations.iter().map(|d| d.distance).fold(0.0, f64::max)
    }

    pub fn split(&self) -> Split {
        match (self.two_handed, self.hands) {
            (false, _) => Split::OneHanded,
            (true, AffectedHands::Dom) => Split::TwoHandedDomOnly,
            (true, _) => Split::TwoHandedNdhAffected,
        }
    }

    pub fn to_json(&self, inv: &Inventory, corpus: Option<&Corpus>) -> serde_json::Value {
        let label = |h: Option<HandshapeId>| h.map(|h| inv.label(h).to_string());
        let utterance = match (self.token, corpus) {
            (Some(r), Some(c)) => Some(c.utterances[r.utterance].id.clone()),
            _ => None,
        };
        serde_json::json!({
            "utterance": utterance,
            "gloss": self.gloss,
            "class": self.class.display_name(),
            "direction": self.direction,
            "hands": self.hands,
            "severity": self.severity,
            "trigger_prev": label(self.trigger_prev),
            "trigger_next": label(self.trigger_next),
            "spread_to_both_hands": self.spread_to_both_hands,
            "deviations": self.deviations.iter().map(|d| serde_json::json!({
                "hand": d.hand,
                "endpoint": d.endpoint,
                "observed": inv.label(d.observed),
                "canonical": inv.label(d.canonical),
                "trigger": inv.label(d.trigger),
                "distance": d.distance,
                "via_spread": d.via_spread,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    OneHanded,
    TwoHandedDomOnly,
    TwoHandedNdhAffected,
}

/// Raw-tier neighbors of a token on each hand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neighbors<'a> {
    pub dom_prev: Option<&'a SignToken>,
    pub dom_next: Option<&'a SignToken>,
    pub ndh_prev: Option<&'a SignToken>,
    pub ndh_next: Option<&'a SignToken>,
}

impl<'a> Neighbors<'a> {
    fn get(&self, hand: Hand, endpoint: Endpoint) -> Option<&'a SignToken> {
        match (hand, endpoint) {
            (Hand::Dominant, Endpoint::Start) => self.dom_prev,
            (Hand::Dominant, Endpoint::End) => self.dom_next,
            (Hand::Nondominant, Endpoint::Start) => self.ndh_prev,
            (Hand::Nondominant, Endpoint::End) => self.ndh_next,
        }
    }
}

/// Why a token could not be examined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Skip {
    UnknownGloss(String),
    NoDominantHand,
}

type Span = (HandshapeId, HandshapeId);

/// Citation (start, end) handshapes per hand for a gloss, honouring hand prefixes.
fn citation(lexicon: &Lexicon, gloss: &str) -> Option<(Span, Option<Span>, bool)> {
    let r = lexicon.resolve(gloss).ok()?;
    let e = r.entry;
    let dom = (e.dom_start, e.dom_end);
    let two = r.effective_handedness() == Handedness::Two;
    let ndh = if two {
        match (e.ndh_start, e.ndh_end) {
            (Some(s), Some(t)) => Some((s, t)),
            // A normally one-handed sign doubled onto the weak hand.
            _ => Some(dom),
        }
    } else {
        None
    };
    Some((dom, ndh, two))
}

fn observed_at(token: &SignToken, hand: Hand, endpoint: Endpoint) -> Option<HandshapeId> {
    match endpoint {
        Endpoint::Start => token.observed_start(hand),
        Endpoint::End => token.observed_end(hand),
    }
}

/// Handshape a neighbor presents at the boundary facing the target.
fn adjacent_shape(lexicon: &Lexicon, neighbor: &SignToken, hand: Hand, endpoint: Endpoint) -> Option<HandshapeId> {
    // The previous sign's end faces a start; the next sign's start faces an end.
    let facing = match endpoint {
        Endpoint::Start => Endpoint::End,
        Endpoint::End => Endpoint::Start,
    };
    if let Some(h) = observed_at(neighbor, hand, facing) {
        return Some(h);
    }
    let (dom, ndh, _) = citation(lexicon, &neighbor.gloss)?;
    let pick = |p: (HandshapeId, HandshapeId)| match facing {
        Endpoint::Start => p.0,
        Endpoint::End => p.1,
    };
    match hand {
        Hand::Dominant => Some(pick(dom)),
        Hand::Nondominant => ndh.map(pick),
    }
}

/// Detect coarticulation on one token.
pub fn detect(
    token: &SignToken,
    neighbors: &Neighbors<'_>,
    lexicon: &Lexicon,
    inv: &Inventory,
    thresholds: &DetectorThresholds,
) -> std::result::Result<Option<CoarticRecord>, Skip> {
    if !token.tier.covers(Hand::Dominant) {
        return Err(Skip::NoDominantHand);
    }
    let (canon_dom, canon_ndh, two_handed) =
        citation(lexicon, &token.gloss).ok_or_else(|| Skip::UnknownGloss(token.gloss.clone()))?;

    let moved_toward = |obs: HandshapeId, canon: HandshapeId, adj: HandshapeId| {
        if thresholds.require_movement_toward {
            inv.distance(obs, adj) < inv.distance(canon, adj)
        } else {
            obs == adj
        }
    };

    let mut deviations = Vec::new();
    let mut hands: Vec<(Hand, (HandshapeId, HandshapeId))> = vec![(Hand::Dominant, canon_dom)];
    if let Some(n) = canon_ndh {
        hands.push((Hand::Nondominant, n));
    }
    for &(hand, canon) in &hands {
        for endpoint in [Endpoint::Start, Endpoint::End] {
            let Some(o) = observed_at(token, hand, endpoint) else { continue };
            let c = match endpoint {
                Endpoint::Start => canon.0,
                Endpoint::End => canon.1,
            };
            if o == c {
                continue;
            }
            let Some(neighbor) = neighbors.get(hand, endpoint) else { continue };
            let Some(adj) = adjacent_shape(lexicon, neighbor, hand, endpoint) else { continue };
            if moved_toward(o, c, adj) {
                deviations.push(Deviation {
                    hand,
                    endpoint,
                    observed: o,
                    canonical: c,
                    trigger: adj,
                    distance: inv.distance(o, c),
                    via_spread: false,
                });
            }
        }
    }

    // Same-handshape two-handed sign copying a dominant change on the weak hand.
    let mut spread = false;
    if let Some(cn) = canon_ndh {
        if cn == canon_dom {
            let dom_devs: Vec<Deviation> = deviations
                .iter()
                .filter(|d| d.hand == Hand::Dominant)
                .cloned()
                .collect();
            for d in dom_devs {
                let trigger_is_one_handed = neighbors
                    .get(Hand::Dominant, d.endpoint)
                    .is_some_and(|t| t.tier == Tier::Dominant);
                let o = observed_at(token, Hand::Nondominant, d.endpoint);
                if trigger_is_one_handed && o == Some(d.observed) {
                    spread = true;
                    let already = deviations
                        .iter()
                        .any(|x| x.hand == Hand::Nondominant && x.endpoint == d.endpoint);
                    if !already {
                        deviations.push(Deviation {
                            hand: Hand::Nondominant,
                            via_spread: true,
                            ..d
                        });
                    }
                }
            }
        }
    }

    if deviations.is_empty() {
        return Ok(None);
    }
    let has = |p: &dyn Fn(&Deviation) -> bool| deviations.iter().any(p);
    let persev = has(&|d| d.endpoint == Endpoint::Start);
    let antic = has(&|d| d.endpoint == Endpoint::End);
    let direction = match (persev, antic) {
        (true, true) => Direction::Both,
        (true, false) => Direction::Perseverative,
        _ => Direction::Anticipatory,
    };
    let on_dom = has(&|d| d.hand == Hand::Dominant);
    let on_ndh = has(&|d| d.hand == Hand::Nondominant);
    let affected = match (on_dom, on_ndh) {
        (true, true) => AffectedHands::Both,
        (true, false) => AffectedHands::Dom,
        _ => AffectedHands::Ndh,
    };
    let trigger_at = |endpoint: Endpoint| {
        deviations
            .iter()
            .filter(|d| d.endpoint == endpoint)
            .min_by_key(|d| d.hand)
            .map(|d| d.trigger)
    };
    let record = CoarticRecord {
        token: None,
        gloss: token.gloss.clone(),
        two_handed,
        class: inv.class_of(canon_dom.0),
        direction,
        hands: affected,
        severity: Severity::Subtle,
        trigger_prev: trigger_at(Endpoint::Start),
        trigger_next: trigger_at(Endpoint::End),
        spread_to_both_hands: spread,
        deviations,
    };
    Ok(Some(CoarticRecord {
        severity: thresholds.severity(record.max_distance()),
        ..record
    }))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub perseverative: usize,
    pub anticipatory: usize,
    pub both: usize,
    /// Distinct affected tokens: perseverative + anticipatory − both.
    pub affected: usize,
}

impl SplitCounts {
    fn add(&mut self, direction: Direction) {
        match direction {
            Direction::Perseverative => self.perseverative += 1,
            Direction::Anticipatory => self.anticipatory += 1,
            Direction::Both => {
                self.perseverative += 1;
                self.anticipatory += 1;
                self.both += 1;
            }
        }
        self.affected = self.perseverative + self.anticipatory - self.both;
    }

    fn merge(&mut self, other: &SplitCounts) {
        self.perseverative += other.perseverative;
        self.anticipatory += other.anticipatory;
        self.both += other.both;
        self.affected += other.affected;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DirectionBreakdown {
    pub one_handed: SplitCounts,
    pub two_handed_dom_only: SplitCounts,
    pub two_handed_ndh_affected: SplitCounts,
}

impl DirectionBreakdown {
    pub fn get(&self, split: Split) -> &SplitCounts {
        match split {
            Split::OneHanded => &self.one_handed,
            Split::TwoHandedDomOnly => &self.two_handed_dom_only,
            Split::TwoHandedNdhAffected => &self.two_handed_ndh_affected,
        }
    }

    fn get_mut(&mut self, split: Split) -> &mut SplitCounts {
        match split {
            Split::OneHanded => &mut self.one_handed,
            Split::TwoHandedDomOnly => &mut self.two_handed_dom_only,
            Split::TwoHandedNdhAffected => &mut self.two_handed_ndh_affected,
        }
    }

    fn merge(&mut self, other: &DirectionBreakdown) {
        self.one_handed.merge(&other.one_handed);
        self.two_handed_dom_only.merge(&other.two_handed_dom_only);
        self.two_handed_ndh_affected.merge(&other.two_handed_ndh_affected);
    }
}

/// Per-split direction counts with union arithmetic.
pub fn direction_breakdown<'a, I>(records: I) -> DirectionBreakdown
where
    I: IntoIterator<Item = &'a CoarticRecord>,
{
    let mut out = DirectionBreakdown::default();
    for r in records {
        out.get_mut(r.split()).add(r.direction);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassTally {
    pub coarticulated: usize,
    pub occurrences: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SeverityCounts {
    pub subtle: usize,
    pub moderate: usize,
    pub major: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SkipTally {
    pub unknown_gloss: usize,
    pub no_dominant_hand: usize,
    /// Examined tokens whose end handshape was unannotated on some hand; that endpoint is not checked.
    pub missing_end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PrevalenceReport {
    pub total_examined: usize,
    pub total_coarticulated: usize,
    pub overall_rate: f64,
    #[serde(serialize_with = "serialize_classes")]
    pub per_class: BTreeMap<HandshapeClass, ClassTally>,
    pub direction: DirectionBreakdown,
    pub severity: SeverityCounts,
    pub skipped: SkipTally,
    #[serde(skip)]
    pub records: Vec<CoarticRecord>,
}

fn serialize_classes<S: serde::Serializer>(
    map: &BTreeMap<HandshapeClass, ClassTally>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for (class, tally) in map {
        seq.serialize_element(&serde_json::json!({
            "class": class.display_name(),
            "coarticulated": tally.coarticulated,
            "occurrences": tally.occurrences,
            "rate": tally.rate,
        }))?;
    }
    seq.end()
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PrevalenceReport {
    fn empty() -> Self {
        let per_class = HandshapeClass::ALL
            .iter()
            .map(|&c| (c, ClassTally::default()))
            .collect();
        Self {
            per_class,
            ..Default::default()
        }
    }

    /// Combine partial reports; rates are recomputed.
    pub fn merge(&mut self, other: PrevalenceReport) {
        self.total_examined += other.total_examined;
        self.total_coarticulated += other.total_coarticulated;
        for (class, t) in other.per_class {
            let e = self.per_class.entry(class).or_default();
            e.coarticulated += t.coarticulated;
            e.occurrences += t.occurrences;
        }
        self.direction.merge(&other.direction);
        self.severity.subtle += other.severity.subtle;
        self.severity.moderate += other.severity.moderate;
        self.severity.major += other.severity.major;
        self.skipped.unknown_gloss += other.skipped.unknown_gloss;
        self.skipped.no_dominant_hand += other.skipped.no_dominant_hand;
        self.skipped.missing_end += other.skipped.missing_end;
        self.records.extend(other.records);
        self.finish_rates();
    }

    fn finish_rates(&mut self) {
        self.overall_rate = rate(self.total_coarticulated, self.total_examined);
        for t in self.per_class.values_mut() {
            t.rate = rate(t.coarticulated, t.occurrences);
        }
    }

    /// Plain-text table: one line per class, then overall and breakdown lines.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>15} {:>8}", "class", "coartic/total", "percent");
        for (class, t) in &self.per_class {
            let _ = writeln!(
                out,
                "{:<10} {:>15} {:>7.2}%",
                class.display_name(),
                format!("{}/{}", t.coarticulated, t.occurrences),
                t.rate * 100.0
            );
        }
        let pct = self.overall_rate * 100.0;
        let bound = ((pct * 2.0).floor() + 1.0) / 2.0;
        let _ = writeln!(
            out,
            "overall: {}/{} = {:.2}% (less than {}%)",
            self.total_coarticulated, self.total_examined, pct, bound
        );
        for (name, s) in [
            ("one-handed", &self.direction.one_handed),
            ("two-handed, dominant only", &self.direction.two_handed_dom_only),
            ("two-handed, non-dominant affected", &self.direction.two_handed_ndh_affected),
        ] {
            let _ = writeln!(
                out,
                "{name}: perseverative {}, anticipatory {}, both {}, affected {}",
                s.perseverative, s.anticipatory, s.both, s.affected
            );
        }
        let _ = writeln!(
            out,
            "severity: subtle {}, moderate {}, major {}",
            self.severity.subtle, self.severity.moderate, self.severity.major
        );
        let _ = writeln!(
            out,
            "skipped: unknown gloss {}, no dominant hand {}, missing end handshape {}",
            self.skipped.unknown_gloss, self.skipped.no_dominant_hand, self.skipped.missing_end
        );
        out
    }
}

fn scan_utterance(
    corpus: &Corpus,
    u: usize,
    targets: &[TokenRef],
    lexicon: &Lexicon,
    inv: &Inventory,
    thresholds: &DetectorThresholds,
) -> PrevalenceReport {
    let utt = &corpus.utterances[u];
    let mut report = PrevalenceReport::empty();
    for &r in targets {
        let token = utt.token(r.token);
        let tok_at = |i: Option<usize>| i.map(|i| utt.token(i));
        let (dp, dn) = if token.tier.covers(Hand::Dominant) {
            utt.neighbors(r.token, Hand::Dominant).expect("token on its own tier")
        } else {
            (None, None)
        };
        let (np, nn) = if token.tier.covers(Hand::Nondominant) {
            utt.neighbors(r.token, Hand::Nondominant).expect("token on its own tier")
        } else {
            (None, None)
        };
        let neighbors = Neighbors {
            dom_prev: tok_at(dp),
            dom_next: tok_at(dn),
            ndh_prev: tok_at(np),
            ndh_next: tok_at(nn),
        };
        match detect(token, &neighbors, lexicon, inv, thresholds) {
            Err(Skip::UnknownGloss(_)) => report.skipped.unknown_gloss += 1,
            Err(Skip::NoDominantHand) => report.skipped.no_dominant_hand += 1,
            Ok(found) => {
                report.total_examined += 1;
                if token.end_missing(Hand::Dominant) || token.end_missing(Hand::Nondominant) {
                    report.skipped.missing_end += 1;
                }
                let class = lexicon
                    .resolve(&token.gloss)
                    .map(|res| inv.class_of(res.entry.dom_start))
                    .expect("detect resolved this gloss");
                if utt.class_sample {
                    report.per_class.entry(class).or_default().occurrences += 1;
                }
                if let Some(mut rec) = found {
                    rec.token = Some(r);
                    report.total_coarticulated += 1;
                    if utt.class_sample {
                        report.per_class.entry(class).or_default().coarticulated += 1;
                    }
                    report.direction.get_mut(rec.split()).add(rec.direction);
                    match rec.severity {
                        Severity::Subtle => report.severity.subtle += 1,
                        Severity::Moderate => report.severity.moderate += 1,
                        Severity::Major => report.severity.major += 1,
                    }
                    report.records.push(rec);
                }
            }
        }
    }
    report.finish_rates();
    report
}

/// Scan every retained target token in the corpus.
///
/// Targets are filtered with the coarticulation policy; triggers come from
/// the raw tiers, so excluded tokens still act as neighbors.
pub fn scan(
    corpus: &Corpus,
    lexicon: &Lexicon,
    inv: &Inventory,
    policy: &ExclusionPolicy,
    thresholds: &DetectorThresholds,
) -> Result<PrevalenceReport> {
    thresholds.validate()?;
    let targets = filter_tokens(corpus, policy, Purpose::Coarticulation);
    let mut report = PrevalenceReport::empty();
    let mut start = 0;
    while start < targets.len() {
        let u = targets[start].utterance;
        let end = start + targets[start..].iter().take_while(|r| r.utterance == u).count();
        report.merge(scan_utterance(corpus, u, &targets[start..end], lexicon, inv, thresholds));
        start = end;
    }
    report.finish_rates();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Utterance;
    use crate::lexicon::SignClass;
    use std::collections::BTreeSet;

    fn inv() -> Inventory {
        Inventory::default_asl()
    }

    fn lex(inv: &Inventory) -> Lexicon {
        crate::data::default_lexicon(inv)
    }

    fn tok(inv: &Inventory, gloss: &str, tier: Tier, dom: Option<(&str, &str)>, ndh: Option<(&str, &str)>) -> SignToken {
        let pair = |p: Option<(&str, &str)>| p.map(|(a, b)| (inv.id(a).unwrap(), Some(inv.id(b).unwrap())));
        SignToken {
            gloss: gloss.into(),
            tier,
            start_frame: 0,
            end_frame: 0,
            dom_hs: pair(dom),
            ndh_hs: pair(ndh),
            class_tags: BTreeSet::new(),
            reduction_tags: BTreeSet::new(),
        }
    }

    #[test]
    fn index_pronoun_takes_following_handshape() {
        let inv = inv();
        let lex = lex(&inv);
        // IX-1p produced entirely with the handshape of the next sign (B-L of KNOW).
        let target = tok(&inv, "IX-1p", Tier::Dominant, Some(("B-L", "B-L")), None);
        let next = tok(&inv, "KNOW", Tier::Dominant, Some(("B-L", "B-L")), None);
        let n = Neighbors {
            dom_next: Some(&next),
            ..Default::default()
        };
        let rec = detect(&target, &n, &lex, &inv, &DetectorThresholds::default()).unwrap().unwrap();
        assert_eq!(rec.direction, Direction::Anticipatory);
        assert_eq!(rec.severity, Severity::Major);
        assert_eq!(rec.hands, AffectedHands::Dom);
        assert_eq!(rec.trigger_next, Some(inv.id("B-L").unwrap()));
        assert_eq!(rec.trigger_prev, None);
    }

    #[test]
    fn house_end_assimilates_to_index() {
        let inv = inv();
        let lex = lex(&inv);
        let target = tok(&inv, "HOUSE", Tier::Both, Some(("B-L", "1")), Some(("B-L", "B-L")));
        let mut next = tok(&inv, "IX-loc", Tier::Dominant, Some(("1", "1")), None);
        next.class_tags.insert(SignClass::Index);
        let n = Neighbors {
            dom_next: Some(&next),
            ..Default::default()
        };
        let rec = detect(&target, &n, &lex, &inv, &DetectorThresholds::default()).unwrap().unwrap();
        assert_eq!(rec.direction, Direction::Anticipatory);
        assert_eq!(rec.hands, AffectedHands::Dom);
        assert_eq!(rec.split(), Split::TwoHandedDomOnly);
    }

    #[test]
    fn citation_realisation_is_not_coarticulation() {
        let inv = inv();
        let lex = lex(&inv);
        let target = tok(&inv, "KNOW", Tier::Dominant, Some(("B-L", "B-L")), None);
        let prev = tok(&inv, "THINK", Tier::Dominant, Some(("1", "1")), None);
        let n = Neighbors {
            dom_prev: Some(&prev),
            dom_next: Some(&prev),
            ..Default::default()
        };
        assert_eq!(detect(&target, &n, &lex, &inv, &DetectorThresholds::default()), Ok(None));
    }

    #[test]
    fn deviation_away_from_neighbors_is_ignored() {
        let inv = inv();
        let lex = lex(&inv);
        // KNOW is B-L; observed bent-B-L. Neighbors are 5. Verify the
        // inequality by brute force before relying on it.
        let (obs, canon, nb) = (inv.id("bent-B-L").unwrap(), inv.id("B-L").unwrap(), inv.id("5").unwrap());
        assert!(inv.distance(obs, nb) >= inv.distance(canon, nb));
        let target = tok(&inv, "KNOW", Tier::Dominant, Some(("bent-B-L", "bent-B-L")), None);
        let five = tok(&inv, "FINE", Tier::Dominant, Some(("5", "5")), None);
        let n = Neighbors {
            dom_prev: Some(&five),
            dom_next: Some(&five),
            ..Default::default()
        };
        assert_eq!(detect(&target, &n, &lex, &inv, &DetectorThresholds::default()), Ok(None));
    }

    #[test]
    fn exact_match_mode() {
        let inv = inv();
        let lex = lex(&inv);
        let th = DetectorThresholds {
            require_movement_toward: false,
            ..Default::default()
        };
        // Observed X sits closer to the neighbor's X-over-thumb than the citation 1 does.
        let target = tok(&inv, "THINK", Tier::Dominant, Some(("1", "X")), None);
        let near = tok(&inv, "X-SIGN", Tier::Dominant, Some(("X-over-thumb", "X-over-thumb")), None);
        let n = Neighbors {
            dom_next: Some(&near),
            ..Default::default()
        };
        assert_eq!(detect(&target, &n, &lex, &inv, &th), Ok(None));
        let default = detect(&target, &n, &lex, &inv, &DetectorThresholds::default()).unwrap();
        assert!(inv.distance_labels("X", "X-over-thumb").unwrap() < inv.distance_labels("1", "X-over-thumb").unwrap());
        assert!(default.is_some());
    }

    #[test]
    fn spread_to_both_hands() {
        let inv = inv();
        let lex = lex(&inv);
        // FINISH (5 on both hands) after a fingerspelled sign ending in Y.
        let target = tok(&inv, "FINISH", Tier::Both, Some(("Y", "5")), Some(("Y", "5")));
        let mut prev = tok(&inv, "fs-MARY", Tier::Dominant, Some(("Y", "Y")), None);
        prev.class_tags.insert(SignClass::Fingerspelled);
        let n = Neighbors {
            dom_prev: Some(&prev),
            ..Default::default()
        };
        let rec = detect(&target, &n, &lex, &inv, &DetectorThresholds::default()).unwrap().unwrap();
        assert!(rec.spread_to_both_hands);
        assert_eq!(rec.hands, AffectedHands::Both);
        assert_eq!(rec.direction, Direction::Perseverative);
        assert_eq!(rec.split(), Split::TwoHandedNdhAffected);
    }

    #[test]
    fn unknown_gloss_and_weak_hand_only_tokens_are_skipped() {
        let inv = inv();
        let lex = lex(&inv);
        let t = tok(&inv, "NOT-A-SIGN", Tier::Dominant, Some(("1", "1")), None);
        assert!(matches!(
            detect(&t, &Neighbors::default(), &lex, &inv, &DetectorThresholds::default()),
            Err(Skip::UnknownGloss(_))
        ));
        let t = tok(&inv, "PHONE", Tier::Nondominant, None, Some(("Y", "Y")));
        assert_eq!(
            detect(&t, &Neighbors::default(), &lex, &inv, &DetectorThresholds::default()),
            Err(Skip::NoDominantHand)
        );
    }

    #[test]
    fn empty_corpus_report() {
        let inv = inv();
        let r = scan(
            &Corpus::default(),
            &lex(&inv),
            &inv,
            &ExclusionPolicy::default(),
            &DetectorThresholds::default(),
        )
        .unwrap();
        assert_eq!(r.total_examined, 0);
        assert_eq!(r.total_coarticulated, 0);
        assert_eq!(r.overall_rate, 0.0);
        assert_eq!(r.per_class.len(), HandshapeClass::ALL.len());
    }

    #[test]
    fn scan_uses_excluded_tokens_as_triggers() {
        let inv = inv();
        let lex = lex(&inv);
        let mut target = tok(&inv, "HOUSE", Tier::Both, Some(("B-L", "1")), Some(("B-L", "B-L")));
        target.start_frame = 0;
        target.end_frame = 9;
        let mut ix = tok(&inv, "IX-loc", Tier::Dominant, Some(("1", "1")), None);
        ix.class_tags.insert(SignClass::Index);
        ix.start_frame = 10;
        ix.end_frame = 12;
        let utt = Utterance::new("u", "s", 30, vec![target, ix]).unwrap();
        let corpus = Corpus { utterances: vec![utt] };
        let r = scan(&corpus, &lex, &inv, &ExclusionPolicy::default(), &DetectorThresholds::default()).unwrap();
        assert_eq!(r.total_examined, 1);
        assert_eq!(r.total_coarticulated, 1);
        assert_eq!(r.per_class[&HandshapeClass::Class2].occurrences, 1);
        assert_eq!(r.direction.two_handed_dom_only.anticipatory, 1);
    }

    #[test]
    fn all_anticipatory_records() {
        let rec = |d| CoarticRecord {
            token: None,
            gloss: "X".into(),
            two_handed: false,
            class: HandshapeClass::Class1,
            direction: d,
            hands: AffectedHands::Dom,
            severity: Severity::Subtle,
            trigger_prev: None,
            trigger_next: None,
            spread_to_both_hands: false,
            deviations: vec![],
        };
        let recs: Vec<_> = (0..5).map(|_| rec(Direction::Anticipatory)).collect();
        let b = direction_breakdown(&recs);
        assert_eq!(b.one_handed.affected, 5);
        assert_eq!(b.one_handed.perseverative, 0);
    }

    #[test]
    fn severity_bands() {
        let th = DetectorThresholds::default();
        assert_eq!(th.severity(0.25), Severity::Subtle);
        assert_eq!(th.severity(0.5), Severity::Subtle);
        assert_eq!(th.severity(0.75), Severity::Moderate);
        assert_eq!(th.severity(1.0), Severity::Major);
        assert!(DetectorThresholds { tau_subtle: -1.0, ..th }.validate().is_err());
    }

    #[test]
    fn unannotated_end_checks_start_only() {
        let inv = inv();
        let lex = lex(&inv);
        let prev = tok(&inv, "IX-1p", Tier::Dominant, Some(("1", "1")), None);
        let mut t = tok(&inv, "KNOW", Tier::Dominant, Some(("1", "1")), None);
        t.dom_hs = Some((inv.id("1").unwrap(), None));
        let n = Neighbors {
            dom_prev: Some(&prev),
            ..Default::default()
        };
        let rec = detect(&t, &n, &lex, &inv, &DetectorThresholds::default()).unwrap().unwrap();
        assert_eq!(rec.deviations.len(), 1);
        assert_eq!(rec.deviations[0].endpoint, Endpoint::Start);
    }
}
