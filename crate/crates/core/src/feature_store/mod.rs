//! Domain data model and the `.deed` binary exchange format.
//!
//! A `.deed` file is little-endian throughout:
//!
//! ```text
//! "DEED1"                      5 bytes magic
//! u32                          length of the JSON header in bytes
//! JSON header                  {version, model_id, editor, dataset, layer_index,
//!                               token_position, hs_dim, pd_k, record_count}
//! record_count × record        u32 fact_id, u8 label, hs_dim × f32, pd_k × f32
//! ```
//!
//! Fact metadata (subjects, objects, prompts) lives in a JSON Lines manifest
//! keyed by `fact_id` so that feature records stay fixed-stride.

mod codec;
mod manifest;
mod types;
mod vectors;

pub use codec::{decode_feature_set, encode_feature_set, read_feature_file, write_feature_file, MAGIC};
pub use manifest::{read_manifest, validate_manifest, write_manifest, FactRecord};
pub use types::{FeatureRecord, FeatureSet, FeatureSetHeader, Label, FORMAT_VERSION, PD_SUM_TOLERANCE};
pub use vectors::{assemble_vectors, feature_dim, FeatureMode};
