use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{CliError, Format};

/// One check. `pass` is `|measured - reference| <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record {
    pub fn new(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64) -> Self {
        let pass = (measured - reference).abs() <= tolerance;
        Record { name: name.into(), measured, reference, tolerance, pass }
    }

    /// Relative check: the tolerance is scaled by `max(|reference|, floor)`.
    pub fn relative(name: impl Into<String>, measured: f64, reference: f64, rel: f64, floor: f64) -> Self {
        Self::new(name, measured, reference, rel * reference.abs().max(floor))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub pass: bool,
    pub records: Vec<Record>,
    /// Seconds; the only field outside the determinism contract.
    pub wall_time: f64,
    pub config: BTreeMap<String, String>,
}

impl VerifyReport {
    pub fn new(suite: String, records: Vec<Record>, wall_time: f64, config: BTreeMap<String, String>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        VerifyReport { suite, pass, records, wall_time, config }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn write_report<W: Write>(report: &VerifyReport, format: Format, mut w: W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report).map_err(std::io::Error::from)?;
            writeln!(w)?;
        }
        Format::Csv => {
            writeln!(w, "name,measured,reference,tolerance,pass")?;
            for r in &report.records {
                writeln!(w, "{},{:e},{:e},{:e},{}", r.name, r.measured, r.reference, r.tolerance, r.pass)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &VerifyReport, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_report(report, format, std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => write_report(report, format, std::io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerifyReport {
        let recs = vec![
            Record::new("a", 1.0, 1.0 + 1e-13, 1e-12),
            Record::relative("b", 6.0, 2.0 * std::f64::consts::PI, 0.02, 0.0),
        ];
        VerifyReport::new("moments".into(), recs, 0.5, BTreeMap::from([("d".to_string(), "2".to_string())]))
    }

    #[test]
    fn overall_pass_is_conjunction() {
        let r = sample();
        assert!(r.records[0].pass);
        assert!(!r.records[1].pass);
        assert!(!r.pass);
        assert_eq!(r.exit_code(), 1);
        let ok = VerifyReport::new("x".into(), vec![r.records[0].clone()], 0.0, BTreeMap::new());
        assert_eq!(ok.exit_code(), 0);
    }

    #[test]
    fn relative_floor() {
        assert!(Record::relative("z", 0.004, 0.0, 0.02, 0.5).pass);
        assert!(!Record::relative("z", 0.02, 0.0, 0.02, 0.5).pass);
    }

    #[test]
    fn csv_and_json_schema() {
        let mut buf = Vec::new();
        write_report(&sample(), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("name,measured,reference,tolerance,pass"));
        assert_eq!(text.lines().count(), 3);
        let mut buf = Vec::new();
        write_report(&sample(), Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(v.is_object());
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        assert_eq!(v["records"][0]["name"], "a");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let e = emit_report(&sample(), Format::Json, Some(Path::new("/nonexistent/dir/r.json"))).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
