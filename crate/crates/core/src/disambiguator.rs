//! One- versus two-handed interpretation of hand activity.
//!
//! Each segment describes what both hands do while one sign is produced. A
//! fixed cascade of rules decides whether the segment is a genuine two-handed
//! sign, a one-handed sign with something unrelated on the weak hand, two
//! independent one-handed signs, or a sign produced with an unusual number of
//! hands. All firing rules are recorded; the first decides.
//!
//! | rule | evidence | verdict |
//! |------|----------|---------|
//! | R1 | weak hand held motionless from the previous two-handed sign | hold (H2 spread) |
//! | R2 | weak hand static in the shape the next two-handed segment starts with | anticipatory positioning |
//! | R3 | raised index held across consecutive segments | theme buoy |
//! | R4 | weak index points at a fingerspelled word | focus marker |
//! | R5 | mirrored copy of a one-handed sign, or an explicit `(2h)` form | mirroring / marked two-hand variant |
//! | R6 | both hands active, neither two-hand condition holds | two independent signs |
//! | R7 | symmetry or passive-hand dominance holds | two-handed sign of the derived type |
//! | R8 | one hand active | weak drop for two-handed signs, else plain one-handed |
//!
//! Confidence is 1.0 when the lexicon confirms the verdict and 0.5 otherwise.
//!
//! Utterances are converted to segments as follows. Every token on the
//! dominant tier opens a segment; weak-hand tokens that overlap no dominant
//! token form segments of their own. A token on both tiers takes movement,
//! orientation and contact information from the lexicon. A separate weak-hand
//! token moves when it starts inside the dominant token's span, is held when
//! it continues the gloss of the preceding two-handed token, and mirrors the
//! dominant hand when both glosses agree. Weak-hand glosses starting with
//! `BUOY` mark a raised index buoy and `1"focus"` marks a pointing focus index;
//! dominant glosses starting with `fs-` count as fingerspelled.

use std::fmt;

use serde::Serialize;

use crate::corpus::{Hand, SignToken, Tier, Utterance};
use crate::error::{Error, Result};
use crate::inventory::{HandshapeId, Inventory};
use crate::lexicon::{
    check_dominance, check_symmetry, classify_sign_type, Check, Handedness, Lexicon, LexiconEntry,
    MovementRelation, OrientationRelation, Resolved, SignClass, SignType,
};

pub const CONFIRMED: f64 = 1.0;
pub const HEURISTIC: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandState {
    pub moving: bool,
    pub start: HandshapeId,
    pub end: HandshapeId,
    pub held_since_previous: bool,
}

impl HandState {
    pub fn active(&self) -> bool {
        !self.held_since_previous
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HandMovement {
    Simultaneous,
    Alternating,
    Unrelated,
    None,
}

/// What both hands do during one segment. An absent hand is not signing.
#[derive(Debug, Clone, PartialEq)]
pub struct HandActivity {
    pub dom: Option<HandState>,
    pub ndh: Option<HandState>,
    pub orientation_relation: OrientationRelation,
    pub movement_relation: HandMovement,
    pub contact_between_hands: bool,
    pub ndh_points_at_dom: bool,
    pub ndh_vertical_index_held: bool,
    pub concurrent_dom_is_fingerspelled: bool,
}

impl HandActivity {
    pub fn validate(&self) -> Result<()> {
        for (name, hand) in [("dominant", self.dom), ("non-dominant", self.ndh)] {
            if let Some(h) = hand {
                if h.held_since_previous && h.moving {
                    return Err(Error::InvalidObservation(format!("{name} hand is both held and moving")));
                }
            }
        }
        if self.dom.is_none() && self.ndh.is_none() {
            return Err(Error::InvalidObservation("segment has no hands".into()));
        }
        Ok(())
    }

    /// Both hands take part in one sign: neither is held over, and the weak
    /// hand is not acting as a buoy or pointer.
    pub fn is_two_handed_sign(&self) -> bool {
        self.dom.is_some_and(|h| h.active())
            && self.ndh.is_some_and(|h| h.active())
            && !self.ndh_vertical_index_held
            && !self.ndh_points_at_dom
    }

    /// Citation-style record of the segment's features, for the two-hand checks.
    pub fn as_entry(&self) -> Option<LexiconEntry> {
        let (dom, ndh) = (self.dom?, self.ndh?);
        let both_move = dom.moving && ndh.moving;
        Some(LexiconEntry {
            gloss: "<segment>".into(),
            handedness: Handedness::Two,
            dom_start: dom.start,
            dom_end: dom.end,
            ndh_start: Some(ndh.start),
            ndh_end: Some(ndh.end),
            both_hands_move: both_move,
            movement_relation: match self.movement_relation {
                HandMovement::Simultaneous => MovementRelation::Simultaneous,
                HandMovement::Alternating => MovementRelation::Alternating,
                HandMovement::Unrelated | HandMovement::None => MovementRelation::None,
            },
            contacts_body: false,
            ndh_is_location: !ndh.moving,
            orientation_relation: self.orientation_relation,
            sign_class: SignClass::Lexical,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confound {
    #[serde(rename = "hold_H2_spread")]
    HoldH2Spread,
    AnticipatoryPositioning,
    Mirroring,
    FocusMarker,
    ThemeBuoy,
}

impl Confound {
    pub fn as_str(self) -> &'static str {
        match self {
            Confound::HoldH2Spread => "hold_H2_spread",
            Confound::AnticipatoryPositioning => "anticipatory_positioning",
            Confound::Mirroring => "mirroring",
            Confound::FocusMarker => "focus_marker",
            Confound::ThemeBuoy => "theme_buoy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    TwoHanded(SignType),
    OneHandedWithConfound(Confound),
    TwoIndependent,
    MarkedTwoHandVariant,
    MarkedOneHandVariant,
    PlainOneHanded,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::TwoHanded(_) => "TwoHanded",
            Verdict::OneHandedWithConfound(_) => "OneHandedWithConfound",
            Verdict::TwoIndependent => "TwoIndependent",
            Verdict::MarkedTwoHandVariant => "MarkedTwoHandVariant",
            Verdict::MarkedOneHandVariant => "MarkedOneHandVariant",
            Verdict::PlainOneHanded => "PlainOneHanded",
        }
    }

    pub fn confound(&self) -> Option<Confound> {
        match self {
            Verdict::OneHandedWithConfound(c) => Some(*c),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::TwoHanded(t) => write!(f, "TwoHanded({t})"),
            Verdict::OneHandedWithConfound(c) => write!(f, "OneHandedWithConfound({})", c.as_str()),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentInterpretation {
    pub verdict: Verdict,
    pub secondary: Option<Verdict>,
    pub confidence: f64,
    pub fired_rules: Vec<Rule>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SegmentContext<'a> {
    pub prev: Option<&'a HandActivity>,
    pub next: Option<&'a HandActivity>,
}

struct Firing {
    rule: Rule,
    verdict: Verdict,
    secondary: Option<Verdict>,
    confirmed: bool,
}

fn citation_two_handed(hint: Option<&Resolved<'_>>) -> bool {
    hint.is_some_and(|h| h.entry.handedness == Handedness::Two)
}

fn citation_one_handed(hint: Option<&Resolved<'_>>) -> bool {
    hint.is_some_and(|h| h.entry.handedness == Handedness::One)
}

/// Run the rule cascade on one segment.
pub fn interpret(
    segment: &HandActivity,
    context: SegmentContext<'_>,
    lexicon_hint: Option<&Resolved<'_>>,
    inv: &Inventory,
) -> SegmentInterpretation {
    let mut fired: Vec<Firing> = Vec::new();
    let mut fire = |rule, verdict, secondary, confirmed| {
        fired.push(Firing {
            rule,
            verdict,
            secondary,
            confirmed,
        })
    };
    let hint_two = citation_two_handed(lexicon_hint);
    let hint_one = citation_one_handed(lexicon_hint);
    let static_ndh = segment.ndh.filter(|n| !n.moving);

    // R1
    if let (Some(n), Some(prev)) = (static_ndh, context.prev) {
        let follows_hold = prev
            .ndh
            .is_some_and(|p| (prev.is_two_handed_sign() || p.held_since_previous) && inv.same_base(p.end, n.start));
        if n.held_since_previous && follows_hold && !hint_two {
            fire(Rule::R1, Verdict::OneHandedWithConfound(Confound::HoldH2Spread), None, false);
        }
    }
    // R2
    if let (Some(n), Some(next)) = (static_ndh, context.next) {
        let prepares = next.is_two_handed_sign() && next.ndh.is_some_and(|x| inv.same_base(x.start, n.end));
        if segment.dom.is_some() && prepares && !hint_two {
            fire(
                Rule::R2,
                Verdict::OneHandedWithConfound(Confound::AnticipatoryPositioning),
                None,
                false,
            );
        }
    }
    // R3
    let buoy_neighbor = [context.prev, context.next]
        .into_iter()
        .flatten()
        .any(|s| s.dom.is_some() && s.ndh_vertical_index_held);
    if segment.dom.is_some() && segment.ndh_vertical_index_held && buoy_neighbor {
        fire(Rule::R3, Verdict::OneHandedWithConfound(Confound::ThemeBuoy), None, false);
    }
    // R4
    if segment.ndh_points_at_dom && segment.concurrent_dom_is_fingerspelled {
        fire(Rule::R4, Verdict::OneHandedWithConfound(Confound::FocusMarker), None, false);
    }
    // R5
    if let (Some(d), Some(n)) = (segment.dom, segment.ndh) {
        let same_shapes = inv.same_base(d.start, n.start) && inv.same_base(d.end, n.end);
        if d.moving && n.moving && same_shapes && hint_one {
            let explicit_two = lexicon_hint.is_some_and(|h| h.handedness_override == Some(Handedness::Two));
            if explicit_two {
                fire(
                    Rule::R5,
                    Verdict::MarkedTwoHandVariant,
                    (segment.orientation_relation == OrientationRelation::Mirror)
                        .then_some(Verdict::OneHandedWithConfound(Confound::Mirroring)),
                    true,
                );
            } else if segment.orientation_relation == OrientationRelation::Mirror {
                fire(
                    Rule::R5,
                    Verdict::OneHandedWithConfound(Confound::Mirroring),
                    Some(Verdict::MarkedTwoHandVariant),
                    true,
                );
            }
        }
    }
    // R6 / R7
    let both_active = segment.dom.is_some_and(|h| h.active()) && segment.ndh.is_some_and(|h| h.active());
    if both_active {
        let entry = segment.as_entry().expect("both hands present");
        let symmetric = check_symmetry(&entry, inv) == Check::Ok;
        let dominance = check_dominance(&entry, inv) == Check::Ok;
        if !symmetric && !dominance {
            fire(Rule::R6, Verdict::TwoIndependent, None, false);
        } else {
            match classify_sign_type(&entry, inv) {
                Ok(t) => fire(Rule::R7, Verdict::TwoHanded(t), None, hint_two),
                Err(_) => fire(Rule::R6, Verdict::TwoIndependent, None, false),
            }
        }
    }
    // R8
    if !both_active {
        if hint_two && segment.dom.is_some_and(|h| h.active()) {
            fire(Rule::R8, Verdict::MarkedOneHandVariant, None, true);
        } else {
            fire(Rule::R8, Verdict::PlainOneHanded, None, lexicon_hint.is_some());
        }
    }

    let first = &fired[0];
    SegmentInterpretation {
        verdict: first.verdict,
        secondary: first.secondary,
        confidence: if first.confirmed { CONFIRMED } else { HEURISTIC },
        fired_rules: fired.iter().map(|f| f.rule).collect(),
    }
}

/// A converted segment together with the tokens it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub dom_token: Option<usize>,
    pub ndh_token: Option<usize>,
    pub activity: HandActivity,
}

const BUOY_PREFIX: &str = "BUOY";
const FOCUS_PREFIX: &str = "1\"focus\"";
const FINGERSPELLED_PREFIX: &str = "fs-";

fn is_fingerspelled(token: &SignToken) -> bool {
    token.has_tag(SignClass::Fingerspelled) || token.gloss.starts_with(FINGERSPELLED_PREFIX)
}

fn shapes(
    token: &SignToken,
    hand: Hand,
    lexicon: &Lexicon,
    utterance: &Utterance,
) -> Result<(HandshapeId, HandshapeId)> {
    if let Some(obs) = token.observed(hand) {
        return Ok(obs);
    }
    let partial = token.observed_start(hand);
    let missing = || Error::Corpus {
        utterance: utterance.id.clone(),
        message: format!("no handshapes for `{}`", token.gloss),
    };
    let Ok(r) = lexicon.resolve(&token.gloss) else {
        return partial.map(|s| (s, s)).ok_or_else(missing);
    };
    let e = r.entry;
    let citation = match (hand, token.tier) {
        (Hand::Dominant, _) | (Hand::Nondominant, Tier::Nondominant) => Ok((e.dom_start, e.dom_end)),
        (Hand::Nondominant, _) => match (e.ndh_start, e.ndh_end) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => Ok((e.dom_start, e.dom_end)),
        },
    };
    citation.map(|(s, t)| (partial.unwrap_or(s), t))
}

/// Split an utterance into hand-activity segments.
pub fn segments(utterance: &Utterance, lexicon: &Lexicon, inv: &Inventory) -> Result<Vec<Segment>> {
    let tokens = utterance.tokens();
    let mut out: Vec<(u32, Segment)> = Vec::new();

    for &d in utterance.tier(Hand::Dominant) {
        let dt = &tokens[d];
        let dom_shapes = shapes(dt, Hand::Dominant, lexicon, utterance)?;
        let dom = HandState {
            moving: true,
            start: dom_shapes.0,
            end: dom_shapes.1,
            held_since_previous: false,
        };
        let fingerspelled = is_fingerspelled(dt);
        let activity = if dt.tier == Tier::Both {
            let ndh_shapes = shapes(dt, Hand::Nondominant, lexicon, utterance)?;
            let entry = lexicon.resolve(&dt.gloss).ok().map(|r| r.entry);
            let moving = entry.is_none_or(|e| e.both_hands_move);
            let movement = match entry.map(|e| e.movement_relation) {
                Some(MovementRelation::Alternating) => HandMovement::Alternating,
                Some(MovementRelation::None) => HandMovement::None,
                Some(MovementRelation::Simultaneous) | None if moving => HandMovement::Simultaneous,
                _ => HandMovement::None,
            };
            let orientation = entry.map_or(
                if ndh_shapes == dom_shapes {
                    OrientationRelation::Identical
                } else {
                    OrientationRelation::Other
                },
                |e| e.orientation_relation,
            );
            HandActivity {
                dom: Some(dom),
                ndh: Some(HandState {
                    moving,
                    start: ndh_shapes.0,
                    end: ndh_shapes.1,
                    held_since_previous: false,
                }),
                orientation_relation: orientation,
                movement_relation: movement,
                contact_between_hands: entry.is_some_and(|e| e.ndh_is_location),
                ndh_points_at_dom: false,
                ndh_vertical_index_held: false,
                concurrent_dom_is_fingerspelled: fingerspelled,
            }
        } else {
            let weak = utterance
                .tier(Hand::Nondominant)
                .iter()
                .copied()
                .find(|&n| tokens[n].tier == Tier::Nondominant && tokens[n].overlaps(dt));
            match weak {
                None => HandActivity {
                    dom: Some(dom),
                    ndh: None,
                    orientation_relation: OrientationRelation::Other,
                    movement_relation: HandMovement::None,
                    contact_between_hands: false,
                    ndh_points_at_dom: false,
                    ndh_vertical_index_held: false,
                    concurrent_dom_is_fingerspelled: fingerspelled,
                },
                Some(n) => {
                    let nt = &tokens[n];
                    let ndh_shapes = shapes(nt, Hand::Nondominant, lexicon, utterance)?;
                    let (prev, _) = utterance.neighbors(n, Hand::Nondominant)?;
                    let held = prev.is_some_and(|p| tokens[p].tier == Tier::Both && tokens[p].gloss == nt.gloss);
                    let moving = !held && nt.start_frame >= dt.start_frame && nt.start_frame <= dt.end_frame;
                    let mirrored = nt.gloss == dt.gloss;
                    HandActivity {
                        dom: Some(dom),
                        ndh: Some(HandState {
                            moving,
                            start: ndh_shapes.0,
                            end: ndh_shapes.1,
                            held_since_previous: held,
                        }),
                        orientation_relation: if mirrored {
                            OrientationRelation::Mirror
                        } else {
                            OrientationRelation::Other
                        },
                        movement_relation: match (moving, mirrored) {
                            (true, true) => HandMovement::Simultaneous,
                            (true, false) => HandMovement::Unrelated,
                            _ => HandMovement::None,
                        },
                        contact_between_hands: false,
                        ndh_points_at_dom: nt.gloss.starts_with(FOCUS_PREFIX),
                        ndh_vertical_index_held: nt.gloss.starts_with(BUOY_PREFIX)
                            && inv.same_base(ndh_shapes.0, inv.id("1")?),
                        concurrent_dom_is_fingerspelled: fingerspelled,
                    }
                }
            }
        };
        let ndh_token = match dt.tier {
            Tier::Both => Some(d),
            _ => utterance
                .tier(Hand::Nondominant)
                .iter()
                .copied()
                .find(|&n| tokens[n].tier == Tier::Nondominant && tokens[n].overlaps(dt)),
        };
        out.push((
            dt.start_frame,
            Segment {
                dom_token: Some(d),
                ndh_token: ndh_token.filter(|_| activity.ndh.is_some()),
                activity,
            },
        ));
    }

    for &n in utterance.tier(Hand::Nondominant) {
        let nt = &tokens[n];
        if nt.tier != Tier::Nondominant {
            continue;
        }
        let covered = utterance
            .tier(Hand::Dominant)
            .iter()
            .any(|&d| tokens[d].overlaps(nt));
        if covered {
            continue;
        }
        let (s, e) = shapes(nt, Hand::Nondominant, lexicon, utterance)?;
        let (prev, _) = utterance.neighbors(n, Hand::Nondominant)?;
        let held = prev.is_some_and(|p| tokens[p].tier == Tier::Both && tokens[p].gloss == nt.gloss);
        out.push((
            nt.start_frame,
            Segment {
                dom_token: None,
                ndh_token: Some(n),
                activity: HandActivity {
                    dom: None,
                    ndh: Some(HandState {
                        moving: !held,
                        start: s,
                        end: e,
                        held_since_previous: held,
                    }),
                    orientation_relation: OrientationRelation::Other,
                    movement_relation: HandMovement::None,
                    contact_between_hands: false,
                    ndh_points_at_dom: false,
                    ndh_vertical_index_held: false,
                    concurrent_dom_is_fingerspelled: false,
                },
            },
        ));
    }
    out.sort_by_key(|(start, _)| *start);
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretedSegment {
    pub segment: Segment,
    pub interpretation: SegmentInterpretation,
}

impl InterpretedSegment {
    pub fn to_json(&self, utterance: &Utterance, index: usize) -> serde_json::Value {
        let gloss = |t: Option<usize>| t.map(|i| utterance.token(i).gloss.clone());
        let i = &self.interpretation;
        serde_json::json!({
            "utterance": utterance.id,
            "segment": index,
            "dom_gloss": gloss(self.segment.dom_token),
            "ndh_gloss": gloss(self.segment.ndh_token),
            "verdict": i.verdict.name(),
            "sign_type": match i.verdict {
                Verdict::TwoHanded(t) => Some(t.to_string()),
                _ => None,
            },
            "tag": i.verdict.confound().map(Confound::as_str),
            "secondary": i.secondary.map(|v| v.to_string()),
            "confidence": i.confidence,
            "fired_rules": i.fired_rules.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Convert and interpret every segment of an utterance, with real neighbors as context.
pub fn interpret_utterance(utterance: &Utterance, lexicon: &Lexicon, inv: &Inventory) -> Result<Vec<InterpretedSegment>> {
    let segs = segments(utterance, lexicon, inv)?;
    let mut out = Vec::with_capacity(segs.len());
    for (i, seg) in segs.iter().enumerate() {
        let context = SegmentContext {
            prev: i.checked_sub(1).map(|j| &segs[j].activity),
            next: segs.get(i + 1).map(|s| &s.activity),
        };
        let token = seg.dom_token.or(seg.ndh_token).map(|t| utterance.token(t));
        let hint = token.and_then(|t| lexicon.resolve(&t.gloss).ok());
        out.push(InterpretedSegment {
            segment: seg.clone(),
            interpretation: interpret(&seg.activity, context, hint.as_ref(), inv),
        });
    }
    Ok(out)
}
