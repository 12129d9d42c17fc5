//! Result rows and the three report formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ncmart::constants::{growth_fit, EstimateKind, FitModel, GrowthFit};
use ncmart::Exponent;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const CSV_HEADER: [&str; 7] = [
    "kind",
    "n",
    "p",
    "bound",
    "seconds",
    "iterations",
    "witness_ref",
];

/// One grid cell. `bound` is NaN when the cell failed; `witness_ref` is the
/// witness file relative to the CSV's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub kind: EstimateKind,
    pub n: usize,
    pub p: Exponent,
    #[serde(with = "nan_as_null")]
    pub bound: f64,
    pub seconds: f64,
    pub iterations: usize,
    pub witness_ref: String,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Seventeen significant digits: enough to round-trip every `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl ResultRow {
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.kind.to_string(),
            self.n.to_string(),
            self.p.to_string(),
            format_number(self.bound),
            format_number(self.seconds),
            self.iterations.to_string(),
            self.witness_ref.clone(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> std::result::Result<ResultRow, String> {
        if rec.len() != CSV_HEADER.len() {
            return Err(format!(
                "expected {} fields, found {}",
                CSV_HEADER.len(),
                rec.len()
            ));
        }
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|e| format!("{}: {e}", CSV_HEADER[i]))
        };
        let int = |i: usize| {
            rec[i]
                .parse::<usize>()
                .map_err(|e| format!("{}: {e}", CSV_HEADER[i]))
        };
        Ok(ResultRow {
            kind: rec[0].parse().map_err(|e| format!("kind: {e}"))?,
            n: int(1)?,
            p: rec[2].parse().map_err(|e| format!("p: {e}"))?,
            bound: num(3)?,
            seconds: num(4)?,
            iterations: int(5)?,
            witness_ref: rec[6].to_string(),
        })
    }
}

/// Streaming CSV writer; rows are flushed as they arrive.
pub struct CsvSink<W: std::io::Write> {
    inner: csv::Writer<W>,
}

impl<W: std::io::Write> CsvSink<W> {
    pub fn new(w: W) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        inner.write_record(CSV_HEADER)?;
        Ok(CsvSink { inner })
    }

    pub fn push(&mut self, row: &ResultRow) -> csv::Result<()> {
        self.inner.write_record(row.csv_record())?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> std::result::Result<W, String> {
        self.inner.into_inner().map_err(|e| e.to_string())
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| LabError::results(path, e))?;
    let header = reader.headers().map_err(|e| LabError::results(path, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(LabError::results(
            path,
            format!("unexpected header {header:?}"),
        ));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| LabError::results(path, e))?;
            ResultRow::from_record(&rec)
                .map_err(|e| LabError::results(path, format!("row {}: {e}", i + 1)))
        })
        .collect()
}

/// A growth fit together with the series it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub kind: EstimateKind,
    /// Fixed exponent of a `LOG_POWER` series over `n`.
    pub p: Option<Exponent>,
    /// Fixed size of a `P_POWER` series over `p`.
    pub n: Option<usize>,
    pub points: Vec<(f64, f64)>,
    pub fit: GrowthFit,
}

impl FitSummary {
    pub fn label(&self) -> String {
        match (self.p, self.n) {
            (Some(p), _) => format!("{} p={p}", self.kind),
            (_, Some(n)) => format!("{} n={n}", self.kind),
            _ => self.kind.to_string(),
        }
    }

    pub fn summary_line(&self) -> String {
        let model = match self.fit.model {
            FitModel::LogPower => "LOG_POWER",
            FitModel::PPower => "P_POWER",
        };
        format!(
            "fit {} model={model} points={} coefficient={} exponent={} r_squared={}",
            self.label(),
            self.points.len(),
            format_number(self.fit.coefficient),
            format_number(self.fit.exponent),
            format_number(self.fit.r_squared),
        )
    }
}

/// Fits every series with at least four finite, positive values: over `n`
/// for each `(kind, p)` (`LOG_POWER`), or over finite `p` for each
/// `(kind, n)` (`P_POWER`). Shorter series are skipped.
pub fn fit_rows(rows: &[ResultRow], model: FitModel) -> Vec<FitSummary> {
    type Series = (
        EstimateKind,
        Option<Exponent>,
        Option<usize>,
        Vec<(f64, f64)>,
    );
    let mut series: BTreeMap<(String, String), Series> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.bound.is_finite() && r.bound > 0.0) {
        let (key, p, n, t) = match model {
            FitModel::LogPower => (
                (r.kind.to_string(), r.p.to_string()),
                Some(r.p),
                None,
                r.n as f64,
            ),
            FitModel::PPower => match r.p.finite() {
                Some(p) => (
                    (r.kind.to_string(), format!("{:020}", r.n)),
                    None,
                    Some(r.n),
                    p,
                ),
                None => continue,
            },
        };
        series
            .entry(key)
            .or_insert_with(|| (r.kind, p, n, Vec::new()))
            .3
            .push((t, r.bound));
    }
    series
        .into_values()
        .filter_map(|(kind, p, n, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let fit = growth_fit(&points, model).ok()?;
            Some(FitSummary {
                kind,
                p,
                n,
                points,
                fit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub fits: Vec<FitSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    PlotData,
}

impl FromStr for ReportFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" => Ok(ReportFormat::PlotData),
            _ => Err(LabError::UnknownFormat(s.to_string())),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    }
    std::fs::write(path, contents).map_err(LabError::io(path))
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut sink = CsvSink::new(Vec::new()).map_err(|e| LabError::Input(e.to_string()))?;
    for r in rows {
        sink.push(r).map_err(|e| LabError::Input(e.to_string()))?;
    }
    let bytes = sink.into_inner().map_err(LabError::Input)?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Plot files: `(n, bound)` per `(kind, p)`, with the matching fit (if any)
/// as a `#` comment line.
pub fn plot_files(rows: &[ResultRow], fits: &[FitSummary]) -> BTreeMap<String, String> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.bound.is_finite()) {
        let name = format!("{}_p{}.dat", r.kind, r.p.to_string().replace('/', "_"));
        let body = files.entry(name).or_insert_with(|| {
            let mut head = "# n bound\n".to_string();
            for f in fits.iter().filter(|f| f.kind == r.kind && f.p == Some(r.p)) {
                let _ = writeln!(head, "# {}", f.summary_line());
            }
            head
        });
        let _ = writeln!(body, "{} {}", r.n, format_number(r.bound));
    }
    files
}

/// Writes `rows` (and `fits`, for JSON and PLOTDATA) under `dir` with file
/// stem `stem`; returns the files written.
pub fn emit_report(
    rows: &[ResultRow],
    fits: &[FitSummary],
    format: ReportFormat,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(LabError::Input("no rows to report".into()));
    }
    match format {
        ReportFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            write_file(&path, &csv_string(rows)?)?;
            Ok(vec![path])
        }
        ReportFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let report = Report {
                rows: rows.to_vec(),
                fits: fits.to_vec(),
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| LabError::Input(e.to_string()))?;
            text.push('\n');
            write_file(&path, &text)?;
            Ok(vec![path])
        }
        ReportFormat::PlotData => plot_files(rows, fits)
            .into_iter()
            .map(|(name, body)| {
                let path = dir.join("plot").join(format!("{stem}_{name}"));
                write_file(&path, &body)?;
                Ok(path)
            })
            .collect(),
    }
}

pub fn read_json(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
    serde_json::from_str(&text).map_err(|e| LabError::results(path, e))
}
