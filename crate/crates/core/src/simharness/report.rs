//! Machine-readable study reports.
//!
//! CSV files have a fixed column order given by [`CsvRecord::HEADER`] and
//! floats written with 17 significant digits; a sidecar
//! `<stem>.config.json` echoes the master seed and the full configuration.
//! JSON reports carry the same echo inline next to the records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnovaRow, RankingStabilityReport, Strategy, StudyConfig, StudyRecord};
use crate::{Error, Result};

/// Width of the relative-iMSE histogram bins.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// A row type with a fixed CSV layout.
pub trait CsvRecord: Serialize {
    const HEADER: &'static [&'static str];
    fn csv_fields(&self) -> Vec<String>;
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl CsvRecord for StudyRecord {
    const HEADER: &'static [&'static str] = &[
        "replication_id",
        "network_family",
        "design_strategy",
        "design_prior_id",
        "imse_true",
        "relative_imse",
    ];

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.replication_id.to_string(),
            self.network_family.clone(),
            self.design_strategy.as_str().to_string(),
            self.design_prior_id.to_string(),
            float(self.imse_true),
            float(self.relative_imse),
        ]
    }
}

impl CsvRecord for AnovaRow {
    const HEADER: &'static [&'static str] = &["factor", "df", "mss"];

    fn csv_fields(&self) -> Vec<String> {
        vec![self.factor.clone(), self.df.to_string(), float(self.mss)]
    }
}

impl CsvRecord for RankingStabilityReport {
    const HEADER: &'static [&'static str] = &[
        "n_pairs",
        "n_designs",
        "n_comparisons",
        "n_ties_excluded",
        "concordance",
    ];

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.n_pairs.to_string(),
            self.n_designs.to_string(),
            self.n_comparisons.to_string(),
            self.n_ties_excluded.to_string(),
            float(self.concordance),
        ]
    }
}

/// One bin `[lower, lower + width)` of the relative-iMSE distribution of a strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub design_strategy: Strategy,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub fraction: f64,
}

impl CsvRecord for HistogramBin {
    const HEADER: &'static [&'static str] = &["design_strategy", "lower", "upper", "count", "fraction"];

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.design_strategy.as_str().to_string(),
            float(self.lower),
            float(self.upper),
            self.count.to_string(),
            float(self.fraction),
        ]
    }
}

/// Non-empty bins per strategy, ordered by strategy then by bin.
pub fn relative_histogram(records: &[StudyRecord]) -> Vec<HistogramBin> {
    let mut counts: BTreeMap<(Strategy, i64), usize> = BTreeMap::new();
    let mut totals: BTreeMap<Strategy, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.relative_imse.is_finite()) {
        let bin = (r.relative_imse / HISTOGRAM_BIN_WIDTH).floor() as i64;
        *counts.entry((r.design_strategy, bin)).or_default() += 1;
        *totals.entry(r.design_strategy).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((s, bin), count)| HistogramBin {
            design_strategy: s,
            lower: bin as f64 * HISTOGRAM_BIN_WIDTH,
            upper: (bin + 1) as f64 * HISTOGRAM_BIN_WIDTH,
            count,
            fraction: count as f64 / totals[&s] as f64,
        })
        .collect()
}

fn to_csv<T: CsvRecord>(rows: &[T]) -> Result<String> {
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(T::HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.csv_fields()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    master_seed: u64,
    config: &'a StudyConfig,
}

#[derive(Serialize)]
struct JsonReport<'a, T> {
    master_seed: u64,
    config: &'a StudyConfig,
    records: &'a [T],
}

#[derive(Deserialize)]
struct JsonRecords {
    records: Vec<StudyRecord>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `rows` to `path`. CSV output also writes the configuration echo
/// to `path` with its extension replaced by `config.json`.
pub fn write_report<T: CsvRecord>(rows: &[T], path: &Path, format: ReportFormat, cfg: &StudyConfig) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            write_file(path, &to_csv(rows)?)?;
            let echo = ConfigEcho {
                master_seed: cfg.master_seed,
                config: cfg,
            };
            write_file(&path.with_extension("config.json"), &pretty(&echo)?)
        }
        ReportFormat::Json => {
            let report = JsonReport {
                master_seed: cfg.master_seed,
                config: cfg,
                records: rows,
            };
            write_file(path, &pretty(&report)?)
        }
    }
}

/// Parses a record CSV written by [`write_report`].
pub fn read_records_csv(path: &Path) -> Result<Vec<StudyRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    })?;
    let header = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().ne(StudyRecord::HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let lineno = i + 2;
        let bad = |what: &str| Error::Parse(format!("{}:{lineno}: {what}", path.display()));
        let f = row.map_err(|e| bad(&e.to_string()))?;
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("invalid integer"));
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad("invalid number"));
        out.push(StudyRecord {
            replication_id: int(&f[0])?,
            network_family: f[1].to_string(),
            design_strategy: Strategy::parse(&f[2]).map_err(|e| bad(&e.to_string()))?,
            design_prior_id: int(&f[3])?,
            imse_true: real(&f[4])?,
            relative_imse: real(&f[5])?,
        });
    }
    Ok(out)
}

/// Parses the `records` of a JSON report written by [`write_report`].
pub fn read_records_json(path: &Path) -> Result<Vec<StudyRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: JsonRecords =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(parsed.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<StudyRecord> {
        vec![
            StudyRecord {
                replication_id: 0,
                network_family: "small-world".into(),
                design_strategy: Strategy::Optimal,
                design_prior_id: 3,
                imse_true: 0.1 + 0.2,
                relative_imse: 1.0 / 3.0,
            },
            StudyRecord {
                replication_id: 7,
                network_family: "a,b".into(),
                design_strategy: Strategy::StratifiedSpectral,
                design_prior_id: 0,
                imse_true: 12345.678901234567,
                relative_imse: 0.97,
            },
        ]
    }

    #[test]
    fn empty_report_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_report::<StudyRecord>(&[], &path, ReportFormat::Csv, &StudyConfig::default()).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "replication_id,network_family,design_strategy,design_prior_id,imse_true,relative_imse\n"
        );
        let echo: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("out.config.json")).unwrap()).unwrap();
        assert_eq!(echo["master_seed"], 0);
        assert_eq!(echo["config"]["n_nodes"], 100);
    }

    #[test]
    fn csv_and_json_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StudyConfig {
            master_seed: 99,
            ..StudyConfig::default()
        };
        let csv = dir.path().join("r.csv");
        let json = dir.path().join("r.json");
        write_report(&sample(), &csv, ReportFormat::Csv, &cfg).unwrap();
        write_report(&sample(), &json, ReportFormat::Json, &cfg).unwrap();
        assert_eq!(read_records_csv(&csv).unwrap(), sample());
        assert_eq!(read_records_json(&json).unwrap(), sample());
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(v["master_seed"], 99);
    }

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let line = sample()[0].csv_fields()[4].clone();
        let mantissa = line.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn output_is_byte_identical_across_writes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_report(&sample(), &a, ReportFormat::Csv, &StudyConfig::default()).unwrap();
        write_report(&sample(), &b, ReportFormat::Csv, &StudyConfig::default()).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let target = blocker.join("sub").join("out.csv");
        let err = write_report::<StudyRecord>(&[], &target, ReportFormat::Csv, &StudyConfig::default()).unwrap_err();
        assert!(!err.is_validation());
        assert!(err.to_string().contains("file"));
    }

    #[test]
    fn histogram_bins_and_fractions() {
        let mut recs = sample();
        recs.push(StudyRecord {
            relative_imse: 0.34,
            ..recs[0].clone()
        });
        let bins = relative_histogram(&recs);
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[0].design_strategy, Strategy::Optimal);
        assert_eq!(bins[0].count, 2);
        assert_eq!(bins[0].fraction, 1.0);
        assert!((bins[0].lower - 0.30).abs() < 1e-12);
        assert!((bins[1].lower - 0.95).abs() < 1e-12);
    }
}
