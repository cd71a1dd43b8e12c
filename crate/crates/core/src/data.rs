//! Data files bundled with the crate.

use crate::inventory::Inventory;
use crate::lexicon::Lexicon;
use crate::transitions::TransitionTable;

pub const INVENTORY_TSV: &str = include_str!("../data/inventory.tsv");
pub const LEXICON_TSV: &str = include_str!("../data/lexicon.tsv");
/// Dominant-hand start/end counts for the three most frequent start handshapes.
pub const START_END_STATS_JSON: &str = include_str!("../data/start_end_stats.json");

pub fn default_lexicon(inv: &Inventory) -> Lexicon {
    Lexicon::parse_str(LEXICON_TSV, inv).expect("bundled lexicon is well-formed")
}

pub fn start_end_stats(inv: &Inventory) -> TransitionTable {
    TransitionTable::load(START_END_STATS_JSON.as_bytes(), inv).expect("bundled stats are well-formed")
}
