use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::harness::{EvalReport, REPORT_SCHEMA};
use crate::error::{DeedError, Result};

pub fn write_reports_csv(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_jsonl(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in reports {
        serde_json::to_writer(&mut w, r).map_err(|e| DeedError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn check_schema(r: &EvalReport, path: &Path) -> Result<()> {
    if r.schema != REPORT_SCHEMA {
        return Err(DeedError::Format(format!(
            "{}: report schema {} is not supported (expected {REPORT_SCHEMA})",
            path.display(),
            r.schema
        )));
    }
    Ok(())
}

/// Reads a `.jsonl` or `.csv` report file, chosen by extension.
pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<EvalReport>> {
    let path = path.as_ref();
    let is_jsonl = matches!(path.extension().and_then(|e| e.to_str()), Some("jsonl" | "json"));
    let mut out = Vec::new();
    if is_jsonl {
        for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: EvalReport = serde_json::from_str(&line)
                .map_err(|e| DeedError::Format(format!("{} line {}: {e}", path.display(), i + 1)))?;
            check_schema(&r, path)?;
            out.push(r);
        }
    } else {
        let mut rd = csv::Reader::from_path(path)?;
        for row in rd.deserialize() {
            let r: EvalReport = row.map_err(|e| DeedError::Format(format!("{}: {e}", path.display())))?;
            check_schema(&r, path)?;
            out.push(r);
        }
    }
    Ok(out)
}

/// Concatenates report files in argument order.
pub fn merge_report_files<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<EvalReport>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_reports(p)?);
    }
    Ok(all)
}

/// Fixed-width text table for terminals.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<14} {:<6} {:<28} {:>6} {:>7} {:>6} {:>9} {:>7} {:>7} {:>9}\n",
        "kind", "mode", "detector", "seed", "n_train", "n_test", "precision", "recall", "f1", "accuracy"
    );
    for r in reports {
        let seed = r.seed.map_or_else(|| "-".to_string(), |v| v.to_string());
        s.push_str(&format!(
            "{:<14} {:<6} {:<28} {:>6} {:>7} {:>6} {:>9.4} {:>7.4} {:>7.4} {:>9.4}\n",
            r.experiment_kind.to_string(),
            r.feature_mode.to_string(),
            r.detector,
            seed,
            r.n_train,
            r.n_test,
            r.precision,
            r.recall,
            r.f1,
            r.accuracy
        ));
    }
    s
}
