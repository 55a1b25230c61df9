use super::audit::AuditSummary;
use super::maxima::EmpiricalResult;
use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const TRIALS_HEADER: [&str; 3] = ["trial", "raw_max", "normalized"];

pub const AUDIT_HEADER: [&str; 9] = [
    "system_id", "d", "atoms", "gap", "thm1_rhs", "upper_rhs", "lower_rhs", "arratia_rhs", "pass",
];

/// One row of a trials file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub raw_max: f64,
    pub normalized: f64,
}

/// Floats use the shortest representation that parses back to the same
/// value, so files round-trip exactly.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `header` and `rows` with `\n` line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(out: W, raw: &[f64], normalized: &[f64]) -> Result<()> {
    let rows = raw
        .iter()
        .zip(normalized)
        .enumerate()
        .map(|(t, (&r, &z))| vec![t.to_string(), num(r), num(z)]);
    write_csv(out, &TRIALS_HEADER, rows)
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != TRIALS_HEADER {
        return Err(Error::Parse(format!("unexpected trials header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("short row {rec:?}")));
            let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("bad trials row {rec:?}: {e}"));
            Ok(TrialRow {
                trial: field(0)?.parse().map_err(|e| bad(&e))?,
                raw_max: field(1)?.parse().map_err(|e| bad(&e))?,
                normalized: field(2)?.parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

pub fn write_audit_csv<W: Write>(out: W, summary: &AuditSummary) -> Result<()> {
    let rows = summary.rows.iter().map(|r| {
        let a = &r.audit;
        vec![
            r.system_id.to_string(),
            r.d.to_string(),
            r.atoms.to_string(),
            num(a.exact_gap),
            num(a.thm1_rhs),
            num(a.upper_rhs),
            num(a.lower_rhs),
            num(a.arratia_rhs),
            a.all_required_pass().to_string(),
        ]
    });
    write_csv(out, &AUDIT_HEADER, rows)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

/// Writes `trials.csv` and `summary.json` into `dir`, plus `surrogate.csv`
/// when the result carries surrogate maxima. Returns the written paths.
pub fn emit_experiment(result: &EmpiricalResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let trials = dir.join("trials.csv");
    write_trials_csv(create(&trials)?, &result.samples, &result.normalized)?;
    paths.push(trials);
    if let Some(y) = &result.surrogate_samples {
        let z: Vec<f64> = y.iter().map(|&v| result.constants.normalize(v)).collect();
        let path = dir.join("surrogate.csv");
        write_trials_csv(create(&path)?, y, &z)?;
        paths.push(path);
    }
    let summary = dir.join("summary.json");
    create(&summary)?.write_all(to_json(result)?.as_bytes())?;
    paths.push(summary);
    Ok(paths)
}

/// Writes `audit.csv` and `audit_summary.json` into `dir`.
pub fn emit_audit(summary: &AuditSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let csv_path = dir.join("audit.csv");
    write_audit_csv(create(&csv_path)?, summary)?;
    let json_path = dir.join("audit_summary.json");
    create(&json_path)?.write_all(to_json(summary)?.as_bytes())?;
    Ok(vec![csv_path, json_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{
        bound_audit_run, ks_distance, reference_cdf, run_max_experiment, ExperimentConfig, ExperimentKind,
        SystemGenSpec,
    };

    fn result() -> EmpiricalResult {
        run_max_experiment(&ExperimentConfig::new(ExperimentKind::GraphMaxdeg, 60, 0.3, 30, 4)).unwrap()
    }

    #[test]
    fn trials_round_trip_and_ks_recompute() {
        let r = result();
        let dir = tempfile::tempdir().unwrap();
        emit_experiment(&r, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        assert!(text.starts_with("trial,raw_max,normalized\n"));
        let rows = read_trials_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 30);
        assert!(rows.iter().enumerate().all(|(i, row)| row.trial == i));
        let z: Vec<f64> = rows.iter().map(|row| row.normalized).collect();
        assert_eq!(z, r.normalized);
        let grid = r.config.grid.points();
        let ks = ks_distance(&z, |x| reference_cdf(&r.config, &r.constants, x), &grid).unwrap();
        assert_eq!(ks, r.ks);
    }

    #[test]
    fn summary_round_trip() {
        let r = result();
        let dir = tempfile::tempdir().unwrap();
        emit_experiment(&r, dir.path()).unwrap();
        let back: EmpiricalResult = read_json(&dir.path().join("summary.json")).unwrap();
        assert_eq!(back.config, r.config);
        assert_eq!(back.constants, r.constants);
        assert_eq!((back.ks, back.seed), (r.ks, r.seed));
    }

    #[test]
    fn byte_stable() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_experiment(&result(), a.path()).unwrap();
        emit_experiment(&result(), b.path()).unwrap();
        for f in ["trials.csv", "summary.json"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
    }

    #[test]
    fn audit_csv_schema() {
        let s = bound_audit_run(&SystemGenSpec::default(), 12, 1).unwrap();
        let mut buf = Vec::new();
        write_audit_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), AUDIT_HEADER.join(","));
        assert_eq!(lines.count(), 12);
        let dir = tempfile::tempdir().unwrap();
        emit_audit(&s, dir.path()).unwrap();
        let back: AuditSummary = read_json(&dir.path().join("audit_summary.json")).unwrap();
        assert_eq!((back.count, back.violations.len(), back.worst), (s.count, 0, s.worst));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trials_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
