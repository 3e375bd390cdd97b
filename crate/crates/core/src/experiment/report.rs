use super::config::sha256_hex;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value <= bound`
    AtMost,
    /// `value >= bound`
    AtLeast,
}

/// A checkable claim recorded in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariant {
    pub name: String,
    #[serde(with = "nonfinite")]
    pub value: f64,
    pub comparison: Comparison,
    #[serde(with = "nonfinite")]
    pub bound: f64,
    pub holds: bool,
}

impl Invariant {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, bound)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, bound)
    }

    /// Boolean claim encoded as `value >= 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn new(name: impl Into<String>, value: f64, comparison: Comparison, bound: f64) -> Self {
        let mut inv = Self {
            name: name.into(),
            value,
            comparison,
            bound,
            holds: false,
        };
        inv.holds = inv.evaluate();
        inv
    }

    /// Recomputes the verdict from value and bound; NaN never holds.
    pub fn evaluate(&self) -> bool {
        match self.comparison {
            Comparison::AtMost => self.value <= self.bound,
            Comparison::AtLeast => self.value >= self.bound,
        }
    }
}

/// JSON has no NaN or infinity; those are written as strings.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config_name: String,
    pub config_sha256: String,
    pub scenario: String,
    pub seed: u64,
    pub invariants: Vec<Invariant>,
    pub side_files: Vec<SideFile>,
    pub results: serde_json::Value,
}

impl Report {
    pub fn all_hold(&self) -> bool {
        self.invariants.iter().all(|i| i.holds)
    }

    pub fn file_stem(&self) -> String {
        format!("{}-{}-seed{}", self.config_name, self.scenario, self.seed)
    }
}

/// Collected results of one scenario run before writing.
#[derive(Default)]
pub struct Output {
    pub results: serde_json::Map<String, serde_json::Value>,
    pub invariants: Vec<Invariant>,
    /// `(suffix, contents)`; written as `<stem>-<suffix>.csv`.
    pub csv: Vec<(String, String)>,
}

impl Output {
    pub fn insert<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        self.results.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn merge(&mut self, prefix: &str, other: Output) {
        self.results.insert(prefix.to_string(), serde_json::Value::Object(other.results));
        self.invariants.extend(other.invariants.into_iter().map(|mut i| {
            i.name = format!("{prefix}.{}", i.name);
            i
        }));
        self.csv
            .extend(other.csv.into_iter().map(|(s, c)| (format!("{prefix}-{s}"), c)));
    }
}

/// Writes `<stem>.json` and the CSV side files into `dir`; returns the report path.
pub fn write_report(dir: &Path, mut report: Report, csv: &[(String, String)]) -> Result<(PathBuf, Report)> {
    std::fs::create_dir_all(dir)?;
    let stem = report.file_stem();
    report.side_files.clear();
    for (suffix, contents) in csv {
        let name = format!("{stem}-{suffix}.csv");
        std::fs::write(dir.join(&name), contents)?;
        report.side_files.push(SideFile {
            name,
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    let path = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok((path, report))
}

/// Outcome of re-checking a written report.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub report: PathBuf,
    /// Invariants whose recorded verdict is false.
    pub failed: Vec<String>,
    /// Invariants whose recorded verdict disagrees with value and bound.
    pub inconsistent: Vec<String>,
    /// Side files missing or with a different hash.
    pub side_file_mismatches: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failed.is_empty() && self.inconsistent.is_empty() && self.side_file_mismatches.is_empty()
    }
}

pub fn verify_report(path: &Path) -> Result<Verification> {
    let text = std::fs::read_to_string(path)?;
    let report: Report = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut v = Verification {
        report: path.to_path_buf(),
        failed: Vec::new(),
        inconsistent: Vec::new(),
        side_file_mismatches: Vec::new(),
    };
    for inv in &report.invariants {
        if inv.evaluate() != inv.holds {
            v.inconsistent.push(inv.name.clone());
        }
        if !inv.holds {
            v.failed.push(inv.name.clone());
        }
    }
    for side in &report.side_files {
        match std::fs::read(dir.join(&side.name)) {
            Ok(bytes) if sha256_hex(&bytes) == side.sha256 => {}
            _ => v.side_file_mismatches.push(side.name.clone()),
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            tool: "circlelab".into(),
            version: "0".into(),
            config_name: "t".into(),
            config_sha256: "00".into(),
            scenario: "stationary".into(),
            seed: 3,
            invariants: vec![Invariant::at_most("residual", 1e-4, 1e-3), Invariant::flag("found", true)],
            side_files: vec![],
            results: serde_json::json!({"x": 1.5}),
        }
    }

    #[test]
    fn written_reports_verify() {
        let dir = tempfile::tempdir().unwrap();
        let (path, r) = write_report(dir.path(), sample(), &[("cdf".into(), "x,cdf\n0,0\n".into())]).unwrap();
        assert_eq!(r.side_files.len(), 1);
        assert!(verify_report(&path).unwrap().ok());

        std::fs::write(dir.path().join(&r.side_files[0].name), "tampered").unwrap();
        let v = verify_report(&path).unwrap();
        assert_eq!(v.side_file_mismatches.len(), 1);
    }

    #[test]
    fn tampered_verdicts_are_detected() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = sample();
        r.invariants[0].value = 1.0;
        let (path, _) = write_report(dir.path(), r, &[]).unwrap();
        let v = verify_report(&path).unwrap();
        assert_eq!(v.inconsistent, vec!["residual".to_string()]);
        assert!(v.failed.is_empty());
    }

    #[test]
    fn nonfinite_values_round_trip() {
        let inv = vec![Invariant::at_most("r", f64::INFINITY, 1.0), Invariant::at_least("n", f64::NAN, 0.0)];
        let text = serde_json::to_string(&inv).unwrap();
        let back: Vec<Invariant> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0].value, f64::INFINITY);
        assert!(back[1].value.is_nan());
    }

    #[test]
    fn nan_never_holds() {
        assert!(!Invariant::at_most("x", f64::NAN, 1.0).holds);
        assert!(!Invariant::at_least("x", f64::NAN, 1.0).holds);
    }
}
