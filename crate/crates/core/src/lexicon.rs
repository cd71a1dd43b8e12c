//! Citation-form sign bank, two-hand well-formedness conditions and sign types.
//!
//! Two conditions constrain two-handed signs:
//!
//! * **Symmetry.** When both hands move, they share handshape and movement
//!   (simultaneous or alternating) and their orientations are identical or
//!   mirrored. Handshapes are compared label for label at start and end.
//! * **Dominance.** When the non-dominant hand is the location of the sign it
//!   stays static and either repeats the dominant handshape (variants folded
//!   onto their base) or comes from the unmarked set.
//!
//! Sign types follow the usual five-way split on number of hands:
//! one-handed without (`Type0`) or with (`TypeX`) body contact, both hands
//! moving (`Type1`), and a passive location hand with the same (`Type2`) or a
//! different (`Type3`) handshape.
//!
//! The lexicon file is tab separated with a header row naming the columns
//! `gloss handedness dom_start dom_end ndh_start ndh_end both_hands_move
//! movement_relation contacts_body ndh_is_location orientation_relation
//! sign_class`; absent optionals are empty cells.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::inventory::{keyword_enum, HandshapeId, Inventory};

keyword_enum!(Handedness { One => "one", Two => "two" });

keyword_enum!(
    MovementRelation {
        Simultaneous => "simultaneous",
        Alternating => "alternating",
        None => "none",
    }
);

keyword_enum!(
    OrientationRelation {
        Identical => "identical",
        Mirror => "mirror",
        Other => "other",
    }
);

keyword_enum!(
    /// Morphological class of a sign; doubles as the corpus class-tag vocabulary.
    SignClass {
        Lexical => "lexical",
        Loan => "loan",
        Fingerspelled => "fingerspelled",
        Classifier => "classifier",
        Gesture => "gesture",
        Index => "index",
        PartIndef => "part_indef",
    }
);

impl Serialize for SignClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SignClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignType {
    Type0,
    TypeX,
    Type1,
    Type2,
    Type3,
}

impl fmt::Display for SignType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SignType::Type0 => "Type0",
            SignType::TypeX => "TypeX",
            SignType::Type1 => "Type1",
            SignType::Type2 => "Type2",
            SignType::Type3 => "Type3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub gloss: String,
    pub handedness: Handedness,
    pub dom_start: HandshapeId,
    pub dom_end: HandshapeId,
    pub ndh_start: Option<HandshapeId>,
    pub ndh_end: Option<HandshapeId>,
    pub both_hands_move: bool,
    pub movement_relation: MovementRelation,
    pub contacts_body: bool,
    pub ndh_is_location: bool,
    pub orientation_relation: OrientationRelation,
    pub sign_class: SignClass,
}

impl LexiconEntry {
    /// A one-handed lexical entry with no movement relation.
    pub fn one_handed(gloss: &str, start: HandshapeId, end: HandshapeId, contacts_body: bool) -> Self {
        LexiconEntry {
            gloss: gloss.to_string(),
            handedness: Handedness::One,
            dom_start: start,
            dom_end: end,
            ndh_start: None,
            ndh_end: None,
            both_hands_move: false,
            movement_relation: MovementRelation::None,
            contacts_body,
            ndh_is_location: false,
            orientation_relation: OrientationRelation::Other,
            sign_class: SignClass::Lexical,
        }
    }

    /// Messages for every violated structural invariant.
    pub fn structural_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ndh_present = [self.ndh_start.is_some(), self.ndh_end.is_some()];
        match self.handedness {
            Handedness::One => {
                if ndh_present.iter().any(|&p| p) {
                    out.push("one-handed entry carries non-dominant handshapes".to_string());
                }
                if self.both_hands_move {
                    out.push("one-handed entry cannot have both hands moving".to_string());
                }
                if self.ndh_is_location {
                    out.push("one-handed entry cannot have a location hand".to_string());
                }
            }
            Handedness::Two => {
                if self.ndh_start.is_none() {
                    out.push("two-handed entry lacks ndh_start".to_string());
                }
                if self.ndh_end.is_none() {
                    out.push("two-handed entry lacks ndh_end".to_string());
                }
                if self.both_hands_move && self.ndh_is_location {
                    out.push("location hand cannot also move".to_string());
                }
                if !self.both_hands_move && !self.ndh_is_location {
                    out.push("two-handed entry needs both hands moving or a location hand".to_string());
                }
            }
        }
        out
    }
}

/// Outcome of one well-formedness condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum Check {
    Ok,
    Violated(String),
    NotApplicable,
}

impl Check {
    pub fn is_violated(&self) -> bool {
        matches!(self, Check::Violated(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub symmetry: Check,
    pub dominance: Check,
    pub structural: Vec<String>,
}

impl ValidationReport {
    pub fn is_well_formed(&self) -> bool {
        !self.symmetry.is_violated() && !self.dominance.is_violated() && self.structural.is_empty()
    }

    /// All problems as human-readable strings.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self.structural.clone();
        if let Check::Violated(r) = &self.symmetry {
            out.push(format!("symmetry: {r}"));
        }
        if let Check::Violated(r) = &self.dominance {
            out.push(format!("dominance: {r}"));
        }
        out
    }
}

/// Symmetry condition. Applies only when both hands move.
pub fn check_symmetry(entry: &LexiconEntry, _inv: &Inventory) -> Check {
    if !entry.both_hands_move {
        return Check::NotApplicable;
    }
    let (Some(ndh_start), Some(ndh_end)) = (entry.ndh_start, entry.ndh_end) else {
        return Check::Violated("non-dominant handshapes missing".into());
    };
    if entry.dom_start != ndh_start || entry.dom_end != ndh_end {
        return Check::Violated("handshape mismatch".into());
    }
    if !matches!(
        entry.movement_relation,
        MovementRelation::Simultaneous | MovementRelation::Alternating
    ) {
        return Check::Violated("movement is neither simultaneous nor alternating".into());
    }
    if !matches!(
        entry.orientation_relation,
        OrientationRelation::Identical | OrientationRelation::Mirror
    ) {
        return Check::Violated("orientation is neither identical nor mirrored".into());
    }
    Check::Ok
}

/// Dominance condition. Applies only when the non-dominant hand is the location.
pub fn check_dominance(entry: &LexiconEntry, inv: &Inventory) -> Check {
    if !entry.ndh_is_location {
        return Check::NotApplicable;
    }
    let (Some(ndh_start), Some(ndh_end)) = (entry.ndh_start, entry.ndh_end) else {
        return Check::Violated("non-dominant handshapes missing".into());
    };
    if ndh_start != ndh_end {
        return Check::Violated("non-static location hand".into());
    }
    let licensed = |ndh: HandshapeId, dom: HandshapeId| inv.same_base(ndh, dom) || inv.is_unmarked(ndh);
    if !licensed(ndh_start, entry.dom_start) || !licensed(ndh_end, entry.dom_end) {
        return Check::Violated("marked non-dominant handshape".into());
    }
    Check::Ok
}

pub fn validate_entry(entry: &LexiconEntry, inv: &Inventory) -> ValidationReport {
    ValidationReport {
        symmetry: check_symmetry(entry, inv),
        dominance: check_dominance(entry, inv),
        structural: entry.structural_problems(),
    }
}

/// Sign type of a well-formed entry; ill-formed entries are refused.
pub fn classify_sign_type(entry: &LexiconEntry, inv: &Inventory) -> Result<SignType> {
    let report = validate_entry(entry, inv);
    if !report.is_well_formed() {
        return Err(Error::IllFormed {
            gloss: entry.gloss.clone(),
            reason: report.problems().join("; "),
        });
    }
    Ok(match entry.handedness {
        Handedness::One if entry.contacts_body => SignType::TypeX,
        Handedness::One => SignType::Type0,
        Handedness::Two if entry.both_hands_move => SignType::Type1,
        Handedness::Two => {
            let ndh = entry.ndh_start.expect("validated two-handed entry");
            if inv.same_base(ndh, entry.dom_start) {
                SignType::Type2
            } else {
                SignType::Type3
            }
        }
    })
}

const HEADER: [&str; 12] = [
    "gloss",
    "handedness",
    "dom_start",
    "dom_end",
    "ndh_start",
    "ndh_end",
    "both_hands_move",
    "movement_relation",
    "contacts_body",
    "ndh_is_location",
    "orientation_relation",
    "sign_class",
];

/// Gloss prefix marking a sign produced with an unusual number of hands.
pub fn split_hand_prefix(gloss: &str) -> (Option<Handedness>, &str) {
    if let Some(rest) = gloss.strip_prefix("(1h)") {
        (Some(Handedness::One), rest)
    } else if let Some(rest) = gloss.strip_prefix("(2h)") {
        (Some(Handedness::Two), rest)
    } else {
        (None, gloss)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved<'a> {
    pub entry: &'a LexiconEntry,
    pub handedness_override: Option<Handedness>,
    pub warning: Option<String>,
}

impl Resolved<'_> {
    pub fn effective_handedness(&self) -> Handedness {
        self.handedness_override.unwrap_or(self.entry.handedness)
    }
}

/// Sign bank keyed by gloss, in file order.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: IndexMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: LexiconEntry) -> Result<()> {
        if self.entries.contains_key(&entry.gloss) {
            return Err(Error::DuplicateGloss(entry.gloss));
        }
        self.entries.insert(entry.gloss.clone(), entry);
        Ok(())
    }

    pub fn get(&self, gloss: &str) -> Option<&LexiconEntry> {
        self.entries.get(gloss)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    /// Look a gloss up, honouring `(1h)`/`(2h)` prefixes.
    ///
    /// A prefixed key stored verbatim (a variable-handedness sign kept twice)
    /// wins over the base gloss.
    pub fn resolve(&self, gloss: &str) -> Result<Resolved<'_>> {
        let (prefix, base) = split_hand_prefix(gloss);
        let entry = self
            .entries
            .get(gloss)
            .or_else(|| self.entries.get(base))
            .ok_or_else(|| Error::UnknownGloss(base.to_string()))?;
        let warning = match prefix {
            Some(h) if h == entry.handedness && entry.gloss == base => Some(format!(
                "`{gloss}` marks the usual handedness of `{base}`"
            )),
            _ => None,
        };
        Ok(Resolved {
            entry,
            handedness_override: prefix,
            warning,
        })
    }

    pub fn parse<R: BufRead>(source: R, inv: &Inventory) -> Result<Lexicon> {
        let mut lex = Lexicon::new();
        let mut saw_header = false;
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if !saw_header {
                if cols != HEADER {
                    return Err(parse_err(line_no, "missing or malformed header row"));
                }
                saw_header = true;
                continue;
            }
            if cols.len() != HEADER.len() {
                return Err(parse_err(
                    line_no,
                    format!("expected {} columns, found {}", HEADER.len(), cols.len()),
                ));
            }
            let entry = parse_row(&cols, inv).map_err(|e| match e {
                Error::Parse { message, .. } => parse_err(line_no, message),
                other => other,
            })?;
            let problems = entry.structural_problems();
            if !problems.is_empty() {
                return Err(Error::Structure {
                    gloss: entry.gloss,
                    message: problems.join("; "),
                });
            }
            lex.insert(entry)?;
        }
        Ok(lex)
    }

    pub fn parse_str(text: &str, inv: &Inventory) -> Result<Lexicon> {
        Self::parse(text.as_bytes(), inv)
    }

    pub fn write<W: Write>(&self, mut sink: W, inv: &Inventory) -> Result<()> {
        writeln!(sink, "{}", HEADER.join("\t"))?;
        let opt = |h: Option<HandshapeId>| h.map(|h| inv.label(h).to_string()).unwrap_or_default();
        for e in self.entries.values() {
            writeln!(
                sink,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.gloss,
                e.handedness,
                inv.label(e.dom_start),
                inv.label(e.dom_end),
                opt(e.ndh_start),
                opt(e.ndh_end),
                e.both_hands_move,
                e.movement_relation,
                e.contacts_body,
                e.ndh_is_location,
                e.orientation_relation,
                e.sign_class
            )?;
        }
        Ok(())
    }

    pub fn to_canonical_string(&self, inv: &Inventory) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, inv).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("glosses are UTF-8")
    }
}

fn parse_row(cols: &[&str], inv: &Inventory) -> Result<LexiconEntry> {
    fn keyword<T: FromStr<Err = String>>(s: &str) -> Result<T> {
        s.parse().map_err(|m: String| parse_err(0, m))
    }
    fn flag(s: &str) -> Result<bool> {
        match s {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(parse_err(0, format!("expected true/false, got `{other}`"))),
        }
    }
    let opt_hs = |s: &str| -> Result<Option<HandshapeId>> {
        if s.is_empty() {
            Ok(None)
        } else {
            inv.id(s).map(Some)
        }
    };
    if cols[0].is_empty() {
        return Err(parse_err(0, "empty gloss"));
    }
    Ok(LexiconEntry {
        gloss: cols[0].to_string(),
        handedness: keyword(cols[1])?,
        dom_start: inv.id(cols[2])?,
        dom_end: inv.id(cols[3])?,
        ndh_start: opt_hs(cols[4])?,
        ndh_end: opt_hs(cols[5])?,
        both_hands_move: flag(cols[6])?,
        movement_relation: keyword(cols[7])?,
        contacts_body: flag(cols[8])?,
        ndh_is_location: flag(cols[9])?,
        orientation_relation: keyword(cols[10])?,
        sign_class: keyword(cols[11])?,
    })
}
