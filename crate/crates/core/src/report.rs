//! Chart datasets (spectrum, dynamics) and their CSV/JSON export.
//!
//! JSON keeps full precision; CSV rounds every number to two decimals.
//! Both are deterministic: the same input always yields the same bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{classify, DatedScore, Profile, ProfileThresholds};
use crate::corpus::Corpus;
use crate::metrics::{TextMetrics, Tsdb};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("event {index}: malformed date {date:?}")]
    EventDate { index: usize, date: String },
    #[error("events file: {0}")]
    EventsParse(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown format {0:?} (expected csv or json)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub doc_id: String,
    pub author: String,
    pub date: NaiveDate,
    pub tsdb: f64,
    pub tsda: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDataset {
    pub points: Vec<SpectrumPoint>,
    /// Documents with undefined TSDB.
    pub excluded: Vec<String>,
}

/// One point per document with defined TSDB (x = TSDB, y = TSDA).
pub fn spectrum_data(scores: &[DatedScore], th: &ProfileThresholds) -> SpectrumDataset {
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for s in scores {
        match s.tsdb {
            Tsdb::Defined(b) => points.push(SpectrumPoint {
                doc_id: s.doc_id.clone(),
                author: s.author.clone(),
                date: s.date,
                tsdb: b.clamp(0.0, 0.5),
                tsda: s.tsda,
                profile: classify(s.tsda, b, th).0,
            }),
            Tsdb::Undefined => excluded.push(s.doc_id.clone()),
        }
    }
    SpectrumDataset { points, excluded }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMarker {
    pub date: NaiveDate,
    pub label: String,
}

#[derive(Deserialize)]
struct RawEvent {
    date: String,
    label: String,
}

/// Parses an events file: a JSON list of `{date, label}` objects.
pub fn parse_events(text: &str) -> Result<Vec<EventMarker>, ReportError> {
    let raw: Vec<RawEvent> = serde_json::from_str(text)?;
    raw.into_iter()
        .enumerate()
        .map(|(index, e)| {
            let date = NaiveDate::parse_from_str(&e.date, "%Y-%m-%d")
                .map_err(|_| ReportError::EventDate { index, date: e.date })?;
            Ok(EventMarker {
                date,
                label: e.label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub doc_id: String,
    pub tsda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorSeries {
    pub author: String,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsDataset {
    pub series: Vec<AuthorSeries>,
    pub events: Vec<EventMarker>,
}

/// Per-author TSDA series sorted by date, with event markers passed through.
pub fn dynamics_data(scores: &[DatedScore], events: &[EventMarker]) -> DynamicsDataset {
    let mut series: Vec<AuthorSeries> = Vec::new();
    let mut sorted: Vec<&DatedScore> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.author, a.date, &a.doc_id).cmp(&(&b.author, b.date, &b.doc_id))
    });
    for s in sorted {
        let point = SeriesPoint {
            date: s.date,
            doc_id: s.doc_id.clone(),
            tsda: s.tsda,
        };
        match series.last_mut() {
            Some(last) if last.author == s.author => last.points.push(point),
            _ => series.push(AuthorSeries {
                author: s.author.clone(),
                points: vec![point],
            }),
        }
    }
    DynamicsDataset {
        series,
        events: events.to_vec(),
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number(f64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number(v) => round2(*v),
            Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<Tsdb> for Cell {
    fn from(v: Tsdb) -> Self {
        v.value().map_or(Cell::Empty, Cell::Number)
    }
}

/// Two-decimal display rounding; never prints `-0.00`.
pub fn round2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Something exportable as a CSV table.
pub trait Table {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<Cell>>;
}

impl Table for SpectrumDataset {
    fn header(&self) -> Vec<&'static str> {
        vec!["doc_id", "author", "date", "tsdb", "tsda", "profile"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.points
            .iter()
            .map(|p| {
                vec![
                    p.doc_id.as_str().into(),
                    p.author.as_str().into(),
                    Cell::Text(p.date.to_string()),
                    p.tsdb.into(),
                    p.tsda.into(),
                    p.profile.as_str().into(),
                ]
            })
            .collect()
    }
}

impl Table for DynamicsDataset {
    fn header(&self) -> Vec<&'static str> {
        vec!["author", "date", "doc_id", "tsda"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.series
            .iter()
            .flat_map(|s| {
                s.points.iter().map(|p| {
                    vec![
                        s.author.as_str().into(),
                        Cell::Text(p.date.to_string()),
                        p.doc_id.as_str().into(),
                        p.tsda.into(),
                    ]
                })
            })
            .collect()
    }
}

/// Per-document metrics table joined with author and date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub doc_id: String,
    pub author: String,
    pub date: NaiveDate,
    pub word_count: usize,
    pub tce: f64,
    pub trr: f64,
    pub anti_tce: f64,
    pub anti_trr: f64,
    pub pro: f64,
    pub anti: f64,
    pub tsda: f64,
    pub tsdb: Tsdb,
}

impl MetricsTable {
    pub fn new(corpus: &Corpus, metrics: &[TextMetrics]) -> Self {
        Self {
            rows: metrics
                .iter()
                .filter_map(|m| {
                    let doc = corpus.document(&m.doc_id)?;
                    let c = &m.components;
                    Some(MetricsRow {
                        doc_id: m.doc_id.clone(),
                        author: doc.author.clone(),
                        date: doc.date,
                        word_count: m.word_count,
                        tce: c.tce,
                        trr: c.trr,
                        anti_tce: c.anti_tce,
                        anti_trr: c.anti_trr,
                        pro: c.pro,
                        anti: c.anti,
                        tsda: m.tsda,
                        tsdb: m.tsdb,
                    })
                })
                .collect(),
        }
    }
}

impl Table for MetricsTable {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "doc_id", "author", "date", "word_count", "tce", "trr", "anti_tce", "anti_trr", "pro",
            "anti", "tsda", "tsdb",
        ]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.doc_id.as_str().into(),
                    r.author.as_str().into(),
                    Cell::Text(r.date.to_string()),
                    Cell::Text(r.word_count.to_string()),
                    r.tce.into(),
                    r.trr.into(),
                    r.anti_tce.into(),
                    r.anti_trr.into(),
                    r.pro.into(),
                    r.anti.into(),
                    r.tsda.into(),
                    r.tsdb.into(),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

/// RFC 4180 CSV with a header row and LF line endings.
pub fn to_csv<T: Table + ?Sized>(table: &T) -> Result<String, ReportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(table.header())?;
    for row in table.rows() {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render<T: Table + Serialize + ?Sized>(value: &T, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Csv => to_csv(value),
        Format::Json => Ok(to_json(value)),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    w.write_all(contents.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Renders `value` and writes it to `destination`.
pub fn export<T: Table + Serialize + ?Sized>(
    value: &T,
    format: Format,
    destination: &Path,
) -> Result<(), ReportError> {
    write_file(destination, &render(value, format)?)
}
