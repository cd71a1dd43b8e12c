//! The closed handshape inventory.
//!
//! Every handshape carries a small feature record (selected fingers,
//! flexion, thumb position, finger spread), a prevalence class, and a base
//! handshape. Variants such as `bent-B-L` fold onto their base (`B`); base
//! entries are their own base and chains never go deeper than one step.
//!
//! The inventory is loaded from a tab-separated file, one handshape per line:
//!
//! ```text
//! label <TAB> base <TAB> fingers=TIMRP <TAB> flexion=extended <TAB> thumb=opposed <TAB> spread=spread <TAB> class=2
//! ```
//!
//! `fingers=-` denotes the empty set. Lines starting with `#` are comments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};

/// Default cap on the number of handshapes an inventory may hold.
pub const DEFAULT_MAX_HANDSHAPES: usize = 87;

/// Base handshapes that a passive non-dominant hand may take freely.
pub const DEFAULT_UNMARKED: [&str; 6] = ["5", "1", "B", "A", "C", "O"];

const DEFAULT_INVENTORY: &str = include_str!("../data/inventory.tsv");

/// Index of a handshape inside its [`Inventory`].
///
/// Ids are only meaningful relative to the inventory that issued them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HandshapeId(u16);

impl HandshapeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set over the five digits, thumb first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FingerSet(u8);

impl FingerSet {
    const LETTERS: [char; 5] = ['T', 'I', 'M', 'R', 'P'];

    pub fn contains(self, finger: char) -> bool {
        Self::LETTERS
            .iter()
            .position(|&c| c == finger)
            .is_some_and(|i| self.0 & (1 << i) != 0)
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Size of the symmetric difference.
    pub fn difference_count(self, other: FingerSet) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

impl FromStr for FingerSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "-" {
            return Ok(FingerSet(0));
        }
        if s.is_empty() {
            return Err("empty finger set (use `-`)".into());
        }
        let mut bits = 0u8;
        let mut last = None;
        for c in s.chars() {
            let i = Self::LETTERS
                .iter()
                .position(|&l| l == c)
                .ok_or_else(|| format!("unknown finger `{c}`"))?;
            if last.is_some_and(|l| i <= l) {
                return Err(format!("fingers must be listed once in TIMRP order: `{s}`"));
            }
            last = Some(i);
            bits |= 1 << i;
        }
        Ok(FingerSet(bits))
    }
}

impl fmt::Display for FingerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("-");
        }
        for (i, c) in Self::LETTERS.iter().enumerate() {
            if self.0 & (1 << i) != 0 {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> ::std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(concat!("unknown ", stringify!($name), " `{}`"), other)),
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}
pub(crate) use keyword_enum;

keyword_enum!(
    /// Degree of bending of the selected fingers.
    Flexion {
        Extended => "extended",
        Bent => "bent",
        Curved => "curved",
        Hooked => "hooked",
        Closed => "closed",
    }
);

keyword_enum!(
    ThumbPosition {
        Opposed => "opposed",
        Unopposed => "unopposed",
        Extended => "extended",
        Crossed => "crossed",
    }
);

keyword_enum!(
    Spread {
        Spread => "spread",
        Together => "together",
    }
);

keyword_enum!(
    /// Prevalence class used when tabulating coarticulation by handshape.
    HandshapeClass {
        Class1 => "1",
        Class2 => "2",
        Class3 => "3",
        Class4 => "4",
        ClassY => "Y",
        ClassPK => "PK",
        Other => "other",
    }
);

impl HandshapeClass {
    /// Human-readable label for reports.
    pub fn display_name(self) -> &'static str {
        match self {
            HandshapeClass::Class1 => "Class 1",
            HandshapeClass::Class2 => "Class 2",
            HandshapeClass::Class3 => "Class 3",
            HandshapeClass::Class4 => "Class 4",
            HandshapeClass::ClassY => "Y",
            HandshapeClass::ClassPK => "P/K",
            HandshapeClass::Other => "Other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HandshapeFeatures {
    pub selected_fingers: FingerSet,
    pub flexion: Flexion,
    pub thumb: ThumbPosition,
    pub spread: Spread,
}

/// Weights of the feature-disagreement distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceWeights {
    pub selected_fingers: f64,
    pub flexion: f64,
    pub thumb: f64,
    pub spread: f64,
}

impl Default for DistanceWeights {
    fn default() -> Self {
        Self {
            selected_fingers: 1.0,
            flexion: 0.5,
            thumb: 0.25,
            spread: 0.25,
        }
    }
}

impl DistanceWeights {
    pub fn distance(&self, a: &HandshapeFeatures, b: &HandshapeFeatures) -> f64 {
        let mut d = self.selected_fingers * f64::from(a.selected_fingers.difference_count(b.selected_fingers));
        if a.flexion != b.flexion {
            d += self.flexion;
        }
        if a.thumb != b.thumb {
            d += self.thumb;
        }
        if a.spread != b.spread {
            d += self.spread;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandshapeEntry {
    pub label: String,
    pub base: HandshapeId,
    pub features: HandshapeFeatures,
    pub class: HandshapeClass,
}

#[derive(Debug, Clone, Copy)]
pub struct InventoryOptions {
    pub max_handshapes: usize,
}

impl Default for InventoryOptions {
    fn default() -> Self {
        Self {
            max_handshapes: DEFAULT_MAX_HANDSHAPES,
        }
    }
}

/// Immutable handshape inventory. Iteration order is file order.
#[derive(Debug, Clone)]
pub struct Inventory {
    entries: Vec<HandshapeEntry>,
    by_label: HashMap<String, HandshapeId>,
    unmarked_bases: BTreeSet<HandshapeId>,
    lex_rank: Vec<u16>,
    weights: DistanceWeights,
}

impl Inventory {
    /// The inventory shipped with the crate.
    pub fn default_asl() -> Inventory {
        Self::from_str_with(DEFAULT_INVENTORY, InventoryOptions::default())
            .expect("bundled inventory is well-formed")
    }

    pub fn load<R: BufRead>(source: R) -> Result<Inventory> {
        Self::load_with(source, InventoryOptions::default())
    }

    pub fn load_with<R: BufRead>(source: R, options: InventoryOptions) -> Result<Inventory> {
        let mut text = String::new();
        for line in source.lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::from_str_with(&text, options)
    }

    pub fn from_str_with(text: &str, options: InventoryOptions) -> Result<Inventory> {
        struct Raw<'a> {
            line: usize,
            label: &'a str,
            base: &'a str,
            features: HandshapeFeatures,
            class: HandshapeClass,
        }

        let mut raws = Vec::new();
        let mut by_label = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() != 7 {
                return Err(parse_err(line_no, format!("expected 7 tab-separated columns, found {}", cols.len())));
            }
            let field = |idx: usize, key: &str| -> Result<&str> {
                cols[idx]
                    .strip_prefix(key)
                    .and_then(|rest| rest.strip_prefix('='))
                    .ok_or_else(|| parse_err(line_no, format!("column {} must be `{key}=...`", idx + 1)))
            };
            let bad = |msg: String| parse_err(line_no, msg);
            let features = HandshapeFeatures {
                selected_fingers: field(2, "fingers")?.parse().map_err(bad)?,
                flexion: field(3, "flexion")?.parse().map_err(bad)?,
                thumb: field(4, "thumb")?.parse().map_err(bad)?,
                spread: field(5, "spread")?.parse().map_err(bad)?,
            };
            let class = field(6, "class")?.parse().map_err(bad)?;
            let label = cols[0];
            if label.is_empty() {
                return Err(parse_err(line_no, "empty label"));
            }
            if by_label
                .insert(label.to_string(), HandshapeId(raws.len() as u16))
                .is_some()
            {
                return Err(Error::DuplicateHandshape(label.to_string()));
            }
            raws.push(Raw {
                line: line_no,
                label,
                base: cols[1],
                features,
                class,
            });
        }
        if raws.len() > options.max_handshapes {
            return Err(Error::InventoryTooLarge {
                size: raws.len(),
                cap: options.max_handshapes,
            });
        }

        let mut entries = Vec::with_capacity(raws.len());
        for raw in &raws {
            let base = *by_label.get(raw.base).ok_or_else(|| {
                parse_err(raw.line, format!("`{}` names unknown base `{}`", raw.label, raw.base))
            })?;
            let base_raw = &raws[base.index()];
            if base_raw.base != base_raw.label {
                return Err(parse_err(
                    raw.line,
                    format!("base `{}` of `{}` is itself a variant", raw.base, raw.label),
                ));
            }
            if base_raw.class != raw.class {
                return Err(parse_err(
                    raw.line,
                    format!("variant `{}` is not in the class of its base `{}`", raw.label, raw.base),
                ));
            }
            entries.push(HandshapeEntry {
                label: raw.label.to_string(),
                base,
                features: raw.features,
                class: raw.class,
            });
        }

        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| entries[a].label.cmp(&entries[b].label));
        let mut lex_rank = vec![0u16; entries.len()];
        for (rank, idx) in order.into_iter().enumerate() {
            lex_rank[idx] = rank as u16;
        }

        let unmarked_bases = DEFAULT_UNMARKED
            .iter()
            .filter_map(|l| by_label.get(*l).copied())
            .collect();

        Ok(Inventory {
            entries,
            by_label,
            unmarked_bases,
            lex_rank,
            weights: DistanceWeights::default(),
        })
    }

    /// Replace the unmarked set. Every label must be a base handshape.
    pub fn with_unmarked_bases<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Inventory> {
        let mut set = BTreeSet::new();
        for l in labels {
            let id = self.id(l.as_ref())?;
            if self.base(id) != id {
                return Err(Error::Structure {
                    gloss: l.as_ref().to_string(),
                    message: "unmarked handshapes must be base handshapes".into(),
                });
            }
            set.insert(id);
        }
        self.unmarked_bases = set;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: DistanceWeights) -> Inventory {
        self.weights = weights;
        self
    }

    pub fn weights(&self) -> DistanceWeights {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, label: &str) -> Result<HandshapeId> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownHandshape(label.to_string()))
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = HandshapeId> + '_ {
        (0..self.entries.len()).map(|i| HandshapeId(i as u16))
    }

    pub fn entry(&self, id: HandshapeId) -> &HandshapeEntry {
        &self.entries[id.index()]
    }

    pub fn label(&self, id: HandshapeId) -> &str {
        &self.entries[id.index()].label
    }

    pub fn base(&self, id: HandshapeId) -> HandshapeId {
        self.entries[id.index()].base
    }

    pub fn features(&self, id: HandshapeId) -> &HandshapeFeatures {
        &self.entries[id.index()].features
    }

    pub fn class_of(&self, id: HandshapeId) -> HandshapeClass {
        self.entries[id.index()].class
    }

    pub fn unmarked_bases(&self) -> &BTreeSet<HandshapeId> {
        &self.unmarked_bases
    }

    pub fn is_unmarked(&self, id: HandshapeId) -> bool {
        self.unmarked_bases.contains(&self.base(id))
    }

    /// Same handshape once variants are folded onto their base.
    pub fn same_base(&self, a: HandshapeId, b: HandshapeId) -> bool {
        self.base(a) == self.base(b)
    }

    /// Position of the handshape in lexicographic label order; used for tie-breaking.
    pub fn lex_rank(&self, id: HandshapeId) -> u16 {
        self.lex_rank[id.index()]
    }

    pub fn cmp_labels(&self, a: HandshapeId, b: HandshapeId) -> std::cmp::Ordering {
        self.lex_rank(a).cmp(&self.lex_rank(b))
    }

    pub fn distance(&self, a: HandshapeId, b: HandshapeId) -> f64 {
        self.weights.distance(self.features(a), self.features(b))
    }

    pub fn distance_labels(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.distance(self.id(a)?, self.id(b)?))
    }

    /// Canonical text form. Comments are not preserved.
    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        for e in &self.entries {
            let f = &e.features;
            writeln!(
                sink,
                "{}\t{}\tfingers={}\tflexion={}\tthumb={}\tspread={}\tclass={}",
                e.label,
                self.label(e.base),
                f.selected_fingers,
                f.flexion,
                f.thumb,
                f.spread,
                e.class
            )?;
        }
        Ok(())
    }

    pub fn to_canonical_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("labels are UTF-8")
    }
}
