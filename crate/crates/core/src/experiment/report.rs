use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "n,pct_all,pct_miss1,pct_missmore,cnt_all,cnt_miss1,cnt_missmore";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Outcome counts for one party count, summed over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub pct_all: f64,
    pub pct_miss1: f64,
    pub pct_missmore: f64,
    pub cnt_all: u64,
    pub cnt_miss1: u64,
    pub cnt_missmore: u64,
}

impl ReportRow {
    pub fn from_counts(n: usize, all: u64, miss1: u64, missmore: u64) -> Self {
        let total = (all + miss1 + missmore).max(1) as f64;
        ReportRow {
            n,
            pct_all: 100.0 * all as f64 / total,
            pct_miss1: 100.0 * miss1 as f64 / total,
            pct_missmore: 100.0 * missmore as f64 / total,
            cnt_all: all,
            cnt_miss1: miss1,
            cnt_missmore: missmore,
        }
    }

    pub fn parties(&self) -> u64 {
        self.cnt_all + self.cnt_miss1 + self.cnt_missmore
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Report {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn from_json(bytes: &[u8]) -> Result<Report> {
        serde_json::from_slice(bytes).map_err(|e| Error::Config(format!("bad report json: {e}")))
    }
}

pub fn emit_report(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for (k, v) in &report.metadata {
                // Keep every metadata entry on its own comment line.
                writeln!(out, "# {k}={}", v.replace('\n', " ")).unwrap();
            }
            writeln!(out, "{CSV_HEADER}").unwrap();
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{:.2},{:.2},{:.2},{},{},{}",
                    r.n,
                    r.pct_all,
                    r.pct_miss1,
                    r.pct_missmore,
                    r.cnt_all,
                    r.cnt_miss1,
                    r.cnt_missmore
                )
                .unwrap();
            }
            Ok(out.into_bytes())
        }
        Format::Json => {
            let mut out =
                serde_json::to_vec_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never see a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_row_formatting() {
        let r = Report {
            metadata: BTreeMap::new(),
            rows: vec![ReportRow::from_counts(1280, 1_279_999, 1, 0)],
        };
        let csv = String::from_utf8(emit_report(&r, Format::Csv).unwrap()).unwrap();
        assert_eq!(
            csv,
            format!("{CSV_HEADER}\n1280,100.00,0.00,0.00,1279999,1,0\n")
        );
    }

    #[test]
    fn empty_report_has_header_and_metadata() {
        let mut r = Report::default();
        r.metadata.insert("seed".into(), "7".into());
        let csv = String::from_utf8(emit_report(&r, Format::Csv).unwrap()).unwrap();
        assert_eq!(csv, format!("# seed=7\n{CSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::default();
        r.metadata.insert("p".into(), "1000000007".into());
        r.rows.push(ReportRow::from_counts(10, 9998, 1, 1));
        r.rows.push(ReportRow::from_counts(3, 1, 1, 1));
        let bytes = emit_report(&r, Format::Json).unwrap();
        assert_eq!(Report::from_json(&bytes).unwrap(), r);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("mprecon-report-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
