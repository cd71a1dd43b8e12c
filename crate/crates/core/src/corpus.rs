//! Annotated continuous-signing corpora.
//!
//! A corpus file is JSON Lines, one utterance per line:
//!
//! ```json
//! {"fps":30,"id":"u1","signer":"S1","tokens":[
//!   {"class_tags":[],"dom_hs":["B-L","B-L"],"end_frame":9,"gloss":"KNOW",
//!    "reduction_tags":[],"start_frame":3,"tier":"dominant"}]}
//! ```
//!
//! Tokens live on the `dominant` or `nondominant` tier, or on `both`; a
//! `both` token belongs to each hand's sequence. Within one hand's sequence
//! tokens are ordered by start frame and never overlap (frame ranges are
//! inclusive). The optional `class_sample` flag (default `true`) marks whether
//! an utterance contributes to per-handshape-class tallies.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::inventory::{keyword_enum, HandshapeId, Inventory};
use crate::lexicon::SignClass;

keyword_enum!(
    Tier {
        Dominant => "dominant",
        Nondominant => "nondominant",
        Both => "both",
    }
);

keyword_enum!(
    /// Reduction phenomena carried through from annotation; never computed here.
    ReductionTag {
        WeakFreeze => "weak_freeze",
        WeakDrop => "weak_drop",
        Lowering => "lowering",
        Distalization => "distalization",
        JointFreeze => "joint_freeze",
        IterationLoss => "iteration_loss",
    }
);

/// One of the two articulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Dominant,
    Nondominant,
}

impl Tier {
    pub fn covers(self, hand: Hand) -> bool {
        matches!(
            (self, hand),
            (Tier::Both, _) | (Tier::Dominant, Hand::Dominant) | (Tier::Nondominant, Hand::Nondominant)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignToken {
    pub gloss: String,
    pub tier: Tier,
    pub start_frame: u32,
    pub end_frame: u32,
    /// Observed dominant-hand (start, end) handshapes; the end may be unannotated.
    pub dom_hs: Option<(HandshapeId, Option<HandshapeId>)>,
    pub ndh_hs: Option<(HandshapeId, Option<HandshapeId>)>,
    pub class_tags: BTreeSet<SignClass>,
    pub reduction_tags: BTreeSet<ReductionTag>,
}

impl SignToken {
    fn raw(&self, hand: Hand) -> Option<(HandshapeId, Option<HandshapeId>)> {
        match hand {
            Hand::Dominant => self.dom_hs,
            Hand::Nondominant => self.ndh_hs,
        }
    }

    /// Both endpoints, if both were annotated.
    pub fn observed(&self, hand: Hand) -> Option<(HandshapeId, HandshapeId)> {
        self.raw(hand).and_then(|(s, e)| e.map(|e| (s, e)))
    }

    pub fn observed_start(&self, hand: Hand) -> Option<HandshapeId> {
        self.raw(hand).map(|(s, _)| s)
    }

    pub fn observed_end(&self, hand: Hand) -> Option<HandshapeId> {
        self.raw(hand).and_then(|(_, e)| e)
    }

    /// Hand is annotated on this tier but its end handshape is missing.
    pub fn end_missing(&self, hand: Hand) -> bool {
        self.raw(hand).is_some_and(|(_, e)| e.is_none())
    }

    pub fn has_tag(&self, tag: SignClass) -> bool {
        self.class_tags.contains(&tag)
    }

    pub fn overlaps(&self, other: &SignToken) -> bool {
        self.start_frame <= other.end_frame && other.start_frame <= self.end_frame
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub signer: String,
    pub fps: u32,
    pub translation: Option<String>,
    pub class_sample: bool,
    /// All tokens, sorted by (tier, start_frame).
    tokens: Vec<SignToken>,
    dom: Vec<usize>,
    ndh: Vec<usize>,
}

impl Utterance {
    /// Build an utterance, checking tier ordering and handshape presence.
    pub fn new(
        id: impl Into<String>,
        signer: impl Into<String>,
        fps: u32,
        mut tokens: Vec<SignToken>,
    ) -> Result<Utterance> {
        let id = id.into();
        let err = |message: String| Error::Corpus {
            utterance: id.clone(),
            message,
        };
        if fps == 0 {
            return Err(err("fps must be positive".into()));
        }
        for t in &tokens {
            if t.end_frame < t.start_frame {
                return Err(err(format!(
                    "`{}` ends (frame {}) before it starts (frame {})",
                    t.gloss, t.end_frame, t.start_frame
                )));
            }
            if t.tier.covers(Hand::Dominant) && t.dom_hs.is_none() {
                return Err(err(format!("`{}` on the dominant hand lacks dom_hs", t.gloss)));
            }
            if t.tier.covers(Hand::Nondominant) && t.ndh_hs.is_none() {
                return Err(err(format!("`{}` on the non-dominant hand lacks ndh_hs", t.gloss)));
            }
        }
        tokens.sort_by_key(|t| (t.tier, t.start_frame, t.end_frame));
        let mut utt = Utterance {
            id: id.clone(),
            signer: signer.into(),
            fps,
            translation: None,
            class_sample: true,
            tokens,
            dom: Vec::new(),
            ndh: Vec::new(),
        };
        for hand in [Hand::Dominant, Hand::Nondominant] {
            let mut seq: Vec<usize> = (0..utt.tokens.len())
                .filter(|&i| utt.tokens[i].tier.covers(hand))
                .collect();
            seq.sort_by_key(|&i| (utt.tokens[i].start_frame, utt.tokens[i].end_frame));
            for w in seq.windows(2) {
                let (a, b) = (&utt.tokens[w[0]], &utt.tokens[w[1]]);
                if a.overlaps(b) {
                    return Err(err(format!(
                        "`{}` [{}, {}] overlaps `{}` [{}, {}] on the {} tier",
                        a.gloss,
                        a.start_frame,
                        a.end_frame,
                        b.gloss,
                        b.start_frame,
                        b.end_frame,
                        if hand == Hand::Dominant { "dominant" } else { "non-dominant" }
                    )));
                }
            }
            match hand {
                Hand::Dominant => utt.dom = seq,
                Hand::Nondominant => utt.ndh = seq,
            }
        }
        Ok(utt)
    }

    pub fn with_translation(mut self, translation: Option<String>) -> Self {
        self.translation = translation;
        self
    }

    pub fn with_class_sample(mut self, in_sample: bool) -> Self {
        self.class_sample = in_sample;
        self
    }

    pub fn tokens(&self) -> &[SignToken] {
        &self.tokens
    }

    pub fn token(&self, idx: usize) -> &SignToken {
        &self.tokens[idx]
    }

    /// Token indices on one hand, in frame order.
    pub fn tier(&self, hand: Hand) -> &[usize] {
        match hand {
            Hand::Dominant => &self.dom,
            Hand::Nondominant => &self.ndh,
        }
    }

    /// Adjacent tokens on the given hand's raw tier, before any filtering.
    pub fn neighbors(&self, token: usize, hand: Hand) -> Result<(Option<usize>, Option<usize>)> {
        let seq = self.tier(hand);
        let pos = seq.iter().position(|&i| i == token).ok_or_else(|| Error::Corpus {
            utterance: self.id.clone(),
            message: format!("token {token} is not on the requested tier"),
        })?;
        let prev = pos.checked_sub(1).map(|p| seq[p]);
        let next = seq.get(pos + 1).copied();
        Ok((prev, next))
    }

    /// Neighbors on the token's default tier: dominant unless the token is non-dominant only.
    pub fn default_neighbors(&self, token: usize) -> Result<(Option<usize>, Option<usize>)> {
        let hand = match self.tokens.get(token).map(|t| t.tier) {
            Some(Tier::Nondominant) => Hand::Nondominant,
            _ => Hand::Dominant,
        };
        self.neighbors(token, hand)
    }
}

/// Reference to a token inside a [`Corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenRef {
    pub utterance: usize,
    pub token: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub utterances: Vec<Utterance>,
}

impl Corpus {
    pub fn token_count(&self) -> usize {
        self.utterances.iter().map(|u| u.tokens.len()).sum()
    }

    pub fn get(&self, r: TokenRef) -> &SignToken {
        &self.utterances[r.utterance].tokens[r.token]
    }

    pub fn refs(&self) -> impl Iterator<Item = TokenRef> + '_ {
        self.utterances.iter().enumerate().flat_map(|(u, utt)| {
            (0..utt.tokens.len()).map(move |t| TokenRef { utterance: u, token: t })
        })
    }

    pub fn extend(&mut self, other: Corpus) {
        self.utterances.extend(other.utterances);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Statistics,
    Coarticulation,
}

/// Which token classes are set aside before analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionPolicy {
    pub exclude_classes: BTreeSet<SignClass>,
    /// Additional exclusions when tokens are coarticulation targets.
    pub coartic_extra_excludes: BTreeSet<SignClass>,
}

impl Default for ExclusionPolicy {
    fn default() -> Self {
        Self {
            exclude_classes: [SignClass::Classifier, SignClass::Gesture, SignClass::Fingerspelled].into(),
            coartic_extra_excludes: [SignClass::Index, SignClass::PartIndef].into(),
        }
    }
}

impl ExclusionPolicy {
    pub fn excludes(&self, token: &SignToken, purpose: Purpose) -> bool {
        token.class_tags.iter().any(|t| {
            self.exclude_classes.contains(t)
                || (purpose == Purpose::Coarticulation && self.coartic_extra_excludes.contains(t))
        })
    }
}

/// Retained tokens in corpus order. Adjacency is unaffected: neighbors are
/// always read from the raw tiers.
pub fn filter_tokens(corpus: &Corpus, policy: &ExclusionPolicy, purpose: Purpose) -> Vec<TokenRef> {
    corpus
        .refs()
        .filter(|&r| !policy.excludes(corpus.get(r), purpose))
        .collect()
}

// JSON interchange records. Field order is alphabetical so that serde emits
// sorted keys.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    #[serde(default)]
    class_tags: Vec<SignClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dom_hs: Option<(String, Option<String>)>,
    end_frame: u32,
    gloss: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ndh_hs: Option<(String, Option<String>)>,
    #[serde(default)]
    reduction_tags: Vec<String>,
    start_frame: u32,
    tier: String,
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UtteranceRecord {
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    class_sample: bool,
    fps: u32,
    id: String,
    signer: String,
    tokens: Vec<TokenRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    translation: Option<String>,
}

fn token_from_record(rec: TokenRecord, inv: &Inventory) -> Result<SignToken, String> {
    let id = |l: &str| inv.id(l).map_err(|e| e.to_string());
    let pair = |p: Option<(String, Option<String>)>| -> Result<Option<(HandshapeId, Option<HandshapeId>)>, String> {
        p.map(|(a, b)| Ok((id(&a)?, b.as_deref().map(id).transpose()?)))
            .transpose()
    };
    let reduction_tags = rec
        .reduction_tags
        .iter()
        .map(|t| t.parse::<ReductionTag>())
        .collect::<Result<_, _>>()?;
    Ok(SignToken {
        tier: rec.tier.parse()?,
        dom_hs: pair(rec.dom_hs)?,
        ndh_hs: pair(rec.ndh_hs)?,
        class_tags: rec.class_tags.into_iter().collect(),
        reduction_tags,
        gloss: rec.gloss,
        start_frame: rec.start_frame,
        end_frame: rec.end_frame,
    })
}

/// Parse one utterance from its JSON text.
pub fn parse_utterance(line: &str, inv: &Inventory) -> Result<Utterance> {
    let rec: UtteranceRecord = serde_json::from_str(line)?;
    let mut tokens = Vec::with_capacity(rec.tokens.len());
    for t in rec.tokens {
        let gloss = t.gloss.clone();
        tokens.push(token_from_record(t, inv).map_err(|m| Error::Corpus {
            utterance: rec.id.clone(),
            message: format!("`{gloss}`: {m}"),
        })?);
    }
    Ok(Utterance::new(rec.id, rec.signer, rec.fps, tokens)?
        .with_translation(rec.translation)
        .with_class_sample(rec.class_sample))
}

/// Parse a JSON Lines corpus. Blank lines are ignored.
pub fn parse_corpus<R: BufRead>(source: R, inv: &Inventory) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let utt = parse_utterance(&line, inv).map_err(|e| match e {
            Error::Json(j) => parse_err(i + 1, j.to_string()),
            other => other,
        })?;
        corpus.utterances.push(utt);
    }
    Ok(corpus)
}

fn utterance_record(utt: &Utterance, inv: &Inventory) -> UtteranceRecord {
    let pair = |p: Option<(HandshapeId, Option<HandshapeId>)>| {
        p.map(|(a, b)| (inv.label(a).to_string(), b.map(|b| inv.label(b).to_string())))
    };
    UtteranceRecord {
        class_sample: utt.class_sample,
        fps: utt.fps,
        id: utt.id.clone(),
        signer: utt.signer.clone(),
        translation: utt.translation.clone(),
        tokens: utt
            .tokens
            .iter()
            .map(|t| TokenRecord {
                class_tags: t.class_tags.iter().copied().collect(),
                dom_hs: pair(t.dom_hs),
                end_frame: t.end_frame,
                gloss: t.gloss.clone(),
                ndh_hs: pair(t.ndh_hs),
                reduction_tags: t.reduction_tags.iter().map(|r| r.as_str().to_string()).collect(),
                start_frame: t.start_frame,
                tier: t.tier.as_str().to_string(),
            })
            .collect(),
    }
}

pub fn utterance_to_json(utt: &Utterance, inv: &Inventory) -> String {
    serde_json::to_string(&utterance_record(utt, inv)).expect("records serialize")
}

/// Canonical JSON Lines: sorted keys, tokens sorted by (tier, start_frame).
pub fn write_corpus<W: Write>(corpus: &Corpus, inv: &Inventory, mut sink: W) -> Result<()> {
    for utt in &corpus.utterances {
        writeln!(sink, "{}", utterance_to_json(utt, inv))?;
    }
    Ok(())
}

pub fn corpus_to_string(corpus: &Corpus, inv: &Inventory) -> String {
    let mut buf = Vec::new();
    write_corpus(corpus, inv, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv() -> Inventory {
        Inventory::default_asl()
    }

    fn tok(inv: &Inventory, gloss: &str, tier: Tier, span: (u32, u32), hs: &str) -> SignToken {
        let id = inv.id(hs).unwrap();
        SignToken {
            gloss: gloss.into(),
            tier,
            start_frame: span.0,
            end_frame: span.1,
            dom_hs: tier.covers(Hand::Dominant).then_some((id, Some(id))),
            ndh_hs: tier.covers(Hand::Nondominant).then_some((id, Some(id))),
            class_tags: BTreeSet::new(),
            reduction_tags: BTreeSet::new(),
        }
    }

    #[test]
    fn empty_stream_is_empty_corpus() {
        let c = parse_corpus("".as_bytes(), &inv()).unwrap();
        assert!(c.utterances.is_empty());
        assert_eq!(c.token_count(), 0);
    }

    #[test]
    fn overlapping_tokens_rejected() {
        let inv = inv();
        let toks = vec![
            tok(&inv, "A", Tier::Dominant, (3, 7), "1"),
            tok(&inv, "B", Tier::Dominant, (5, 9), "1"),
        ];
        assert!(matches!(Utterance::new("u", "s", 30, toks), Err(Error::Corpus { .. })));
    }

    #[test]
    fn both_tier_token_conflicts_with_either_hand() {
        let inv = inv();
        let toks = vec![
            tok(&inv, "A", Tier::Both, (0, 5), "5"),
            tok(&inv, "B", Tier::Nondominant, (4, 9), "1"),
        ];
        assert!(Utterance::new("u", "s", 30, toks).is_err());
    }

    #[test]
    fn reversed_frames_and_zero_fps_rejected() {
        let inv = inv();
        assert!(Utterance::new("u", "s", 30, vec![tok(&inv, "A", Tier::Dominant, (9, 3), "1")]).is_err());
        assert!(Utterance::new("u", "s", 0, vec![]).is_err());
    }

    #[test]
    fn missing_start_handshape_for_tier_rejected() {
        let line = r#"{"fps":30,"id":"u","signer":"s","tokens":[{"end_frame":4,"gloss":"A","start_frame":0,"tier":"dominant"}]}"#;
        assert!(parse_utterance(line, &inv()).is_err());
    }

    #[test]
    fn unannotated_end_round_trips() {
        let inv = inv();
        let line = r#"{"fps":30,"id":"u","signer":"s","tokens":[{"class_tags":[],"dom_hs":["1",null],"end_frame":4,"gloss":"A","reduction_tags":[],"start_frame":0,"tier":"dominant"}]}"#;
        let u = parse_utterance(line, &inv).unwrap();
        let t = &u.tokens()[0];
        assert_eq!(t.observed(Hand::Dominant), None);
        assert_eq!(t.observed_start(Hand::Dominant), Some(inv.id("1").unwrap()));
        assert!(t.end_missing(Hand::Dominant));
        assert!(!t.end_missing(Hand::Nondominant));
        assert!(utterance_to_json(&u, &inv).contains(r#""dom_hs":["1",null]"#));
    }

    #[test]
    fn unknown_handshape_rejected() {
        let line = r#"{"fps":30,"id":"u","signer":"s","tokens":[{"dom_hs":["1","ZZ"],"end_frame":4,"gloss":"A","start_frame":0,"tier":"dominant"}]}"#;
        let err = parse_corpus(line.as_bytes(), &inv()).unwrap_err();
        assert!(err.to_string().contains("ZZ"), "{err}");
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = "\n{\"fps\":30}\n";
        assert!(matches!(parse_corpus(text.as_bytes(), &inv()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn neighbors_follow_tier_order() {
        let inv = inv();
        let toks = vec![
            tok(&inv, "C", Tier::Dominant, (20, 29), "1"),
            tok(&inv, "A", Tier::Dominant, (0, 9), "1"),
            tok(&inv, "B", Tier::Dominant, (10, 19), "1"),
        ];
        let u = Utterance::new("u", "s", 30, toks).unwrap();
        let idx = |g: &str| u.tokens().iter().position(|t| t.gloss == g).unwrap();
        assert_eq!(u.neighbors(idx("B"), Hand::Dominant).unwrap(), (Some(idx("A")), Some(idx("C"))));
        assert_eq!(u.neighbors(idx("A"), Hand::Dominant).unwrap().0, None);
        assert_eq!(u.neighbors(idx("C"), Hand::Dominant).unwrap().1, None);
        assert!(u.neighbors(idx("A"), Hand::Nondominant).is_err());
    }

    #[test]
    fn both_tier_neighbors_differ_by_hand() {
        // PHONE held on the weak hand while EXPERIENCE follows on the strong hand.
        let inv = inv();
        let toks = vec![
            tok(&inv, "IX-1p", Tier::Dominant, (0, 3), "1"),
            tok(&inv, "PHONE", Tier::Nondominant, (2, 20), "Y"),
            tok(&inv, "EXPERIENCE", Tier::Dominant, (8, 20), "5"),
            tok(&inv, "FINISH", Tier::Both, (21, 30), "5"),
        ];
        let u = Utterance::new("u", "s", 30, toks).unwrap();
        let idx = |g: &str| u.tokens().iter().position(|t| t.gloss == g).unwrap();
        let fin = idx("FINISH");
        assert_eq!(u.neighbors(fin, Hand::Dominant).unwrap().0, Some(idx("EXPERIENCE")));
        assert_eq!(u.neighbors(fin, Hand::Nondominant).unwrap().0, Some(idx("PHONE")));
        assert_eq!(u.default_neighbors(fin).unwrap(), u.neighbors(fin, Hand::Dominant).unwrap());
    }

    #[test]
    fn exclusion_policy_by_purpose() {
        let inv = inv();
        let mut clf = tok(&inv, "DCL", Tier::Dominant, (0, 3), "5");
        clf.class_tags.insert(SignClass::Classifier);
        let mut ix = tok(&inv, "IX-loc", Tier::Dominant, (4, 6), "1");
        ix.class_tags.insert(SignClass::Index);
        let plain = tok(&inv, "KNOW", Tier::Dominant, (7, 9), "B-L");
        let u = Utterance::new("u", "s", 30, vec![clf, ix, plain]).unwrap();
        let corpus = Corpus { utterances: vec![u] };
        let p = ExclusionPolicy::default();
        let glosses = |purpose| -> Vec<String> {
            filter_tokens(&corpus, &p, purpose)
                .into_iter()
                .map(|r| corpus.get(r).gloss.clone())
                .collect()
        };
        assert_eq!(glosses(Purpose::Statistics), vec!["IX-loc", "KNOW"]);
        assert_eq!(glosses(Purpose::Coarticulation), vec!["KNOW"]);
    }

    #[test]
    fn canonical_round_trip() {
        let line = r#"{"fps":30,"id":"u","signer":"s","tokens":[{"class_tags":["index"],"dom_hs":["1","1"],"end_frame":9,"gloss":"IX-1p","reduction_tags":[],"start_frame":5,"tier":"dominant"},{"class_tags":[],"dom_hs":["5","5"],"end_frame":4,"gloss":"FINISH","ndh_hs":["5","5"],"reduction_tags":["weak_freeze"],"start_frame":0,"tier":"both"}],"translation":"hi"}"#;
        let inv = inv();
        let u = parse_utterance(line, &inv).unwrap();
        let canon = utterance_to_json(&u, &inv);
        // `both` sorts after `dominant`.
        assert!(canon.find("IX-1p").unwrap() < canon.find("FINISH").unwrap());
        let again = parse_utterance(&canon, &inv).unwrap();
        assert_eq!(again, u);
        assert_eq!(utterance_to_json(&again, &inv), canon);
    }
}
