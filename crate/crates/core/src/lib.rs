//! Detection of knowledge edits in language models.
//!
//! The toolkit consumes per-fact feature records (last-token hidden states and
//! sorted top-k next-token probabilities), trains edit detectors on them, and
//! runs the evaluation protocols: in-domain and cross-domain runs, feature
//! ablations, training-size sweeps, same-object tests and per-layer probes.
//! A synthetic generator with planted edit effects drives the whole pipeline
//! without access to real edited models.

pub mod analysis;
pub mod classifiers;
pub mod error;
pub mod eval;
pub mod feature_store;
pub mod rng;
pub mod synthetic;

pub use error::{DeedError, Result};
pub use feature_store::{
    assemble_vectors, read_feature_file, write_feature_file, FactRecord, FeatureMode,
    FeatureRecord, FeatureSet, FeatureSetHeader, Label,
};
