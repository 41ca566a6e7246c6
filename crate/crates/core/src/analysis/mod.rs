//! Hidden-state and probability analyses: a two-class Fisher projection of
//! hidden states and Gaussian KDE over the mean top-10 probability, with
//! plot-ready CSV output.

mod kde;
mod lda;
mod plot;

pub use kde::{class_densities, gaussian_density_at, kde, mean_top10, scott_bandwidth, trapezoid, DensityCurve, GRID_POINTS};
pub use lda::{lda_project, LdaProjection};
pub use plot::{emit_kde_csv, emit_lda_csv};
