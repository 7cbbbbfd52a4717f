//! Selectional preferences learned over a concept taxonomy from
//! sense-tagged verb–noun dependency triples.
//!
//! The pipeline is: load a [`Taxonomy`](taxonomy::Taxonomy), read triples
//! and [`tally`](corpus::tally) them, wrap the counts in an
//! [`Estimator`](estimator::Estimator), then compute word-to-class,
//! sense-to-class or class-to-class [`PreferenceTable`](models::PreferenceTable)s.
//! Tables can be pruned to antichains, exported as verb-class → noun-class
//! edges, or used to disambiguate nouns.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod estimator;
pub mod integrator;
pub mod models;
pub mod number;
pub mod pruner;
pub mod taxonomy;
pub mod wsd;

#[cfg(test)]
mod test_fixtures;

pub use corpus::{load_triples, tally, CountTable, Rel, TripleRecord};
pub use error::{Error, Result};
pub use estimator::Estimator;
pub use models::{class_to_class, sense_to_class, word_to_class, Conditioner, ModelKind, PreferenceTable};
pub use taxonomy::{load_taxonomy, ConceptId, ConceptIx, Pos, Taxonomy};
