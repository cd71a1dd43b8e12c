//! Linguistic post-processing for ASL sign recognition.
//!
//! * [`inventory`]: the closed handshape set, feature records and distance.
//! * [`lexicon`]: citation forms, two-hand well-formedness checks and sign types.
//! * [`corpus`]: annotated continuous-signing utterances and exclusion filters.
//! * [`transitions`]: start/end handshape co-occurrence tables and priors.
//! * [`coarticulation`]: per-token handshape coarticulation detection and prevalence reports.
//! * [`disambiguator`]: one- versus two-handed interpretation of hand activity.
//! * [`reranker`]: prior-weighted re-ranking of noisy handshape hypotheses.

pub mod coarticulation;
pub mod corpus;
pub mod data;
pub mod disambiguator;
pub mod error;
pub mod inventory;
pub mod lexicon;
pub mod reranker;
pub mod transitions;

pub use corpus::{Corpus, ExclusionPolicy, Hand, Purpose, SignToken, Tier, TokenRef, Utterance};
pub use error::{Error, Result};
pub use inventory::{HandshapeClass, HandshapeId, Inventory};
pub use lexicon::{Handedness, Lexicon, LexiconEntry, SignClass, SignType};
pub use transitions::{SmoothingConfig, TransitionTable};
