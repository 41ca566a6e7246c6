//! Experiment harness: balanced splits, metrics, single train/test runs,
//! training-size sweeps, same-object tests, per-layer sweeps and report files.

mod harness;
mod layers;
mod metrics;
mod report;
mod same_object;
mod split;
mod sweep;

pub use harness::{infer_kind, predict_set, run_eval, train_detector, EvalConfig, EvalReport, ExperimentKind, REPORT_SCHEMA};
pub use layers::{layer_sweep, layer_sweep_files, write_layer_csv, LayerPoint};
pub use metrics::{compute_metrics, Metrics};
pub use report::{format_table, merge_report_files, read_reports, write_reports_csv, write_reports_jsonl};
pub use same_object::pair_same_object;
pub use split::{make_split, SplitSpec};
pub use sweep::{sweep_training_size, DEFAULT_SWEEP_SIZES};
