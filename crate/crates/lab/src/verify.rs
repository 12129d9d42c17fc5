//! Replays every stored witness with the exact norm code.

use std::path::Path;

use ncmart::constants::ConstantEstimate;

use crate::error::{LabError, Result};
use crate::report::{read_csv, ResultRow};

/// Relative tolerance between a stored bound and its replay.
pub const REPLAY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn check_row(dir: &Path, row: &ResultRow) -> std::result::Result<f64, String> {
    if row.witness_ref.is_empty() || !row.bound.is_finite() {
        return Err("cell has no witness".into());
    }
    let path = dir.join(&row.witness_ref);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let est: ConstantEstimate =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if (est.kind, est.n, est.p) != (row.kind, row.n, row.p) {
        return Err(format!(
            "witness is for {} n={} p={}",
            est.kind, est.n, est.p
        ));
    }
    let replayed = est.replay().map_err(|e| e.to_string())?;
    let err = rel_diff(replayed, row.bound).max(rel_diff(est.lower_bound, row.bound));
    if err > REPLAY_TOLERANCE {
        return Err(format!("stored {} but witness gives {replayed}", row.bound));
    }
    Ok(err)
}

/// Checks every row of a results CSV; witness paths are resolved against
/// the CSV's directory.
pub fn verify_results(csv: &Path) -> Result<VerifyReport> {
    let rows = read_csv(csv)?;
    if rows.is_empty() {
        return Err(LabError::results(csv, "no rows"));
    }
    let dir = csv.parent().unwrap_or(Path::new("."));
    let mut report = VerifyReport::default();
    for (i, row) in rows.iter().enumerate() {
        report.checked += 1;
        match check_row(dir, row) {
            Ok(err) => report.max_rel_error = report.max_rel_error.max(err),
            Err(reason) => report.mismatches.push(Mismatch { row: i + 1, reason }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, Overrides};
    use crate::runner::{csv_path, run_experiment, RunOptions};

    #[test]
    fn detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let text = "[h]\nkind = \"BG_LOWER\"\nmethod = \"witness\"\nn_grid = [3, 5]\np_grid = [\"inf\", 4]\n";
        let cfg = parse_config(text, dir.path(), &Overrides::default())
            .unwrap()
            .remove(0);
        run_experiment(&cfg, &RunOptions::default()).unwrap();
        let csv = csv_path(&cfg);
        let report = verify_results(&csv).unwrap();
        assert!(report.ok() && report.checked == 4, "{report:?}");

        let original = std::fs::read_to_string(&csv).unwrap();
        let mut lines: Vec<String> = original.lines().map(str::to_string).collect();
        let mut fields: Vec<String> = lines[2].split(',').map(str::to_string).collect();
        let bound: f64 = fields[3].parse().unwrap();
        fields[3] = format!("{:.16e}", bound * (1.0 + 1e-6));
        lines[2] = fields.join(",");
        std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
        let report = verify_results(&csv).unwrap();
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].row, 2);

        std::fs::write(&csv, &original).unwrap();
        std::fs::remove_file(cfg.out.join(&read_csv(&csv).unwrap()[3].witness_ref)).unwrap();
        assert_eq!(verify_results(&csv).unwrap().mismatches[0].row, 4);
    }
}
