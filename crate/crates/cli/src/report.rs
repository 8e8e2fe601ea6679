//! Check records, the verification report and its JSON/CSV emitters.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

/// Floats are written with 17 significant digits; non-finite values become strings.
fn sig17(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"NaN\"".to_string()
    } else if x > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(*v).serialize(s),
        None => s.serialize_none(),
    }
}

/// `{:.16e}` for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// How `measured` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    /// Boolean outcome; `measured` is informational.
    #[serde(rename = "flag")]
    Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub suite: String,
    /// Descriptive name of the identity or property under test.
    pub anchor: String,
    pub status: Status,
    #[serde(serialize_with = "ser_opt_f64")]
    pub measured: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub tolerance: Option<f64>,
    pub relation: Relation,
    pub message: String,
    /// Wall-clock time of the check; kept out of the JSON so reports stay byte-identical.
    #[serde(skip)]
    pub runtime: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub tool: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            tool: "fermigap".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    /// SHA-256 of the canonical TOML form of the effective config.
    pub config_hash: String,
    pub seed: u64,
    pub suites: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    /// Conjunction of the non-skipped checks.
    pub status: Status,
}

pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl VerificationReport {
    pub fn new(config_hash: String, seed: u64, suites: Vec<String>, checks: Vec<CheckRecord>) -> Self {
        let count = |st: Status| checks.iter().filter(|c| c.status == st).count();
        let summary = Summary {
            total: checks.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            skipped: count(Status::Skipped),
        };
        let status = if summary.failed == 0 { Status::Pass } else { Status::Fail };
        Self { environment: Environment::current(), config_hash, seed, suites, checks, summary, status }
    }

    pub fn empty() -> Self {
        Self::new(config_hash(""), 0, Vec::new(), Vec::new())
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Tabular outputs written next to the report.
#[derive(Debug, Clone, Default)]
pub struct Tables {
    /// `(s, e0, e1, gap, nondegenerate)`.
    pub gap_curve: Vec<(f64, f64, f64, f64, bool)>,
    /// `(source, distance, value)`.
    pub decay: Vec<(String, usize, f64)>,
    /// `(term, kind, mode, n, region size, norm, tail)`.
    pub shells: Vec<(String, u8, String, usize, usize, f64, f64)>,
    /// `(distance, t, norm)`.
    pub lr: Vec<(usize, f64, f64)>,
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

/// Write `report.json` and the CSV tables into `dir`, creating it if needed.
pub fn emit(report: &VerificationReport, tables: &Tables, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json())?;
    write_csv(
        &dir.join("gap_curve.csv"),
        &["s", "e0", "e1", "gap", "nondegenerate"],
        tables.gap_curve.iter().map(|&(s, e0, e1, g, nd)| vec![fmt_f64(s), fmt_f64(e0), fmt_f64(e1), fmt_f64(g), nd.to_string()]),
    )?;
    write_csv(
        &dir.join("decay_profiles.csv"),
        &["source", "distance", "value"],
        tables.decay.iter().map(|(src, r, v)| vec![src.clone(), r.to_string(), fmt_f64(*v)]),
    )?;
    write_csv(
        &dir.join("shell_norms.csv"),
        &["term", "kind", "mode", "n", "region_sites", "norm", "tail"],
        tables.shells.iter().map(|(term, kind, mode, n, size, norm, tail)| {
            vec![term.clone(), kind.to_string(), mode.clone(), n.to_string(), size.to_string(), fmt_f64(*norm), fmt_f64(*tail)]
        }),
    )?;
    write_csv(
        &dir.join("lr_profiles.csv"),
        &["distance", "t", "norm"],
        tables.lr.iter().map(|&(r, t, n)| vec![r.to_string(), fmt_f64(t), fmt_f64(n)]),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: Status) -> CheckRecord {
        CheckRecord {
            id: "x".into(),
            suite: "s".into(),
            anchor: "a".into(),
            status,
            measured: Some(0.1),
            tolerance: Some(f64::INFINITY),
            relation: Relation::AtMost,
            message: String::new(),
            runtime: Duration::from_millis(3),
        }
    }

    #[test]
    fn seventeen_digits_and_non_finite() {
        assert_eq!(sig17(0.1).get(), "1.0000000000000001e-1");
        assert_eq!(sig17(f64::NAN).get(), "\"NaN\"");
        let json = VerificationReport::new("h".into(), 1, vec![], vec![record(Status::Pass)]).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["checks"][0]["tolerance"], "inf");
        assert!(v["checks"][0].get("runtime").is_none());
    }

    #[test]
    fn overall_status_ignores_skipped() {
        let r = VerificationReport::new("h".into(), 0, vec![], vec![record(Status::Pass), record(Status::Skipped)]);
        assert!(r.passed());
        let r = VerificationReport::new("h".into(), 0, vec![], vec![record(Status::Pass), record(Status::Fail)]);
        assert!(!r.passed());
        assert_eq!(r.summary.failed, 1);
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(config_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
