use std::path::Path;

use rand::Rng;

use super::kde::DensityCurve;
use super::lda::LdaProjection;
use crate::error::Result;
use crate::feature_store::Label;
use crate::rng::{stream, Stream};

fn label_name(label: Label) -> &'static str {
    match label {
        Label::Edited => "edited",
        Label::Unedited => "unedited",
    }
}

/// `fact_id,label,z,jitter`, one row per record; `jitter` is a uniform [0, 1)
/// vertical offset drawn from `seed` to spread overlapping points.
pub fn emit_lda_csv(projection: &LdaProjection, seed: u64, path: impl AsRef<Path>) -> Result<()> {
    let mut rng = stream(seed, Stream::Jitter);
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["fact_id", "label", "z", "jitter"])?;
    for ((id, label), z) in projection.fact_ids.iter().zip(&projection.labels).zip(&projection.projected) {
        let jitter: f64 = rng.random();
        out.write_record([id.to_string(), label_name(*label).to_string(), z.to_string(), jitter.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `label,grid,density` with 512 rows per class curve.
pub fn emit_kde_csv(curves: &[(Label, DensityCurve)], path: impl AsRef<Path>) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["label", "grid", "density"])?;
    for (label, curve) in curves {
        for (g, d) in curve.grid.iter().zip(&curve.density) {
            out.write_record([label_name(*label).to_string(), g.to_string(), d.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{class_densities, lda_project};
    use crate::synthetic::{generate, EditEffectProfile};

    #[test]
    fn csv_shapes_and_determinism() {
        let set = generate(&EditEffectProfile::le_like(3), 40, 4, 12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let lda_path = dir.path().join("lda.csv");
        let proj = lda_project(&set).unwrap();
        emit_lda_csv(&proj, 5, &lda_path).unwrap();
        let first = std::fs::read(&lda_path).unwrap();
        assert_eq!(String::from_utf8(first.clone()).unwrap().lines().count(), set.len() + 1);
        emit_lda_csv(&proj, 5, &lda_path).unwrap();
        assert_eq!(std::fs::read(&lda_path).unwrap(), first);

        let kde_path = dir.path().join("kde.csv");
        emit_kde_csv(&class_densities(&set).unwrap(), &kde_path).unwrap();
        let text = std::fs::read_to_string(&kde_path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("edited,")).count(), 512);
        assert_eq!(text.lines().filter(|l| l.starts_with("unedited,")).count(), 512);
    }
}
