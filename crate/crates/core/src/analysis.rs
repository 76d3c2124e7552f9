//! Corpus-level statistics, stance profiles, discursive pattern mining,
//! rankings and per-author dynamics.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{Annotation, AnnotationSet};
use crate::corpus::Corpus;
use crate::metrics::{TextMetrics, Tsdb};
use crate::schema::{CodingScheme, Component};

pub const UTOPIAN_FUTURE: &str = "CT-UF";
pub const MAGICAL_POWER: &str = "CT-MP";
pub const PROGRESS_DRIVER: &str = "TC-PD";
pub const NON_TECH_SOLUTION: &str = "ADD-SN";
pub const RISK_ACKNOWLEDGMENT: &str = "ACK-RI";

/// ChatGPT's public release, the default split for polarization.
pub fn default_cut_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 11, 30).unwrap()
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no texts to aggregate")]
    Empty,
    #[error("tsdb undefined for {0}: not classifiable")]
    Unclassifiable(String),
    #[error("unknown code: {0}")]
    UnknownCode(String),
    #[error("unknown ranking key: {0}")]
    UnknownKey(String),
    #[error("unknown document: {0}")]
    UnknownDocument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// Population statistics (divisor n). `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Summary {
            mean,
            sd: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n: usize,
    pub n_tsdb: usize,
    pub tsda: Summary,
    /// Over documents with defined TSDB only; `None` when there are none.
    pub tsdb: Option<Summary>,
    /// Documents left out of the TSDB aggregates.
    pub undefined_tsdb: Vec<String>,
}

pub fn corpus_stats(metrics: &[TextMetrics]) -> Result<CorpusStats, AnalysisError> {
    let tsda: Vec<f64> = metrics.iter().map(|m| m.tsda).collect();
    let tsdb: Vec<f64> = metrics.iter().filter_map(|m| m.tsdb.value()).collect();
    Ok(CorpusStats {
        n: metrics.len(),
        n_tsdb: tsdb.len(),
        tsda: Summary::of(&tsda).ok_or(AnalysisError::Empty)?,
        tsdb: Summary::of(&tsdb),
        undefined_tsdb: metrics
            .iter()
            .filter(|m| !m.tsdb.is_defined())
            .map(|m| m.doc_id.clone())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    ProImbalanced,
    Critical,
    Balanced,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::ProImbalanced => "pro_imbalanced",
            Profile::Critical => "critical",
            Profile::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileThresholds {
    /// Texts at or above this balance are `balanced` whatever their sign.
    pub balanced_tsdb: f64,
}

impl Default for ProfileThresholds {
    fn default() -> Self {
        Self { balanced_tsdb: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileLabel {
    pub doc_id: String,
    pub profile: Profile,
    pub rule_fired: String,
}

/// Applies the profile rules in order: balance first, then sign.
pub fn classify(tsda: f64, tsdb: f64, th: &ProfileThresholds) -> (Profile, String) {
    let t = th.balanced_tsdb;
    if tsdb >= t {
        (Profile::Balanced, format!("tsdb >= {t}"))
    } else if tsda < 0.0 {
        (Profile::Critical, format!("tsda < 0 and tsdb < {t}"))
    } else if tsda > 0.0 {
        (Profile::ProImbalanced, format!("tsda > 0 and tsdb < {t}"))
    } else {
        (Profile::Balanced, format!("tsda = 0 and tsdb < {t}"))
    }
}

pub fn classify_profile(
    m: &TextMetrics,
    th: &ProfileThresholds,
) -> Result<ProfileLabel, AnalysisError> {
    let Tsdb::Defined(b) = m.tsdb else {
        return Err(AnalysisError::Unclassifiable(m.doc_id.clone()));
    };
    let (profile, rule_fired) = classify(m.tsda, b, th);
    Ok(ProfileLabel {
        doc_id: m.doc_id.clone(),
        profile,
        rule_fired,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    CoOccurrence,
    AckPivot,
    Bto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationRef {
    pub key: String,
    pub code: String,
    pub start: usize,
    pub end: usize,
}

impl From<&Annotation> for AnnotationRef {
    fn from(a: &Annotation) -> Self {
        Self {
            key: a.key(),
            code: a.code_id.clone(),
            start: a.start,
            end: a.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    Frequency { code: String, per_thousand: f64 },
    Component { component: Component, score: f64 },
    Annotation(AnnotationRef),
    Pivot { ack: AnnotationRef, response: AnnotationRef },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternHit {
    pub kind: PatternKind,
    pub doc_id: String,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtoThresholds {
    /// Minimum CT-UF + CT-MP per 1,000 words.
    pub optimism: f64,
    /// Minimum ADD-SN per 1,000 words when there are no anti core expressions.
    pub counter: f64,
}

impl Default for BtoThresholds {
    fn default() -> Self {
        Self {
            optimism: 2.0,
            counter: 1.0,
        }
    }
}

/// Benign techno-optimism: strong utopian/magical optimism tempered by
/// contradictions of core tenets or by non-technological solutions.
pub fn detect_bto(m: &TextMetrics, th: &BtoThresholds) -> Option<PatternHit> {
    let uf = m.frequencies.get(UTOPIAN_FUTURE);
    let mp = m.frequencies.get(MAGICAL_POWER);
    let sn = m.frequencies.get(NON_TECH_SOLUTION);
    let anti_tce = m.components.anti_tce;

    let optimism = uf + mp >= th.optimism;
    let countered = anti_tce > 0.0 || sn >= th.counter;
    if !(optimism && countered) {
        return None;
    }

    let freq = |code: &str, v: f64| Evidence::Frequency {
        code: code.to_string(),
        per_thousand: v,
    };
    let mut evidence = vec![freq(UTOPIAN_FUTURE, uf), freq(MAGICAL_POWER, mp)];
    if anti_tce > 0.0 {
        evidence.push(Evidence::Component {
            component: Component::ANTI_TCE,
            score: anti_tce,
        });
    }
    if sn >= th.counter {
        evidence.push(freq(NON_TECH_SOLUTION, sn));
    }
    Some(PatternHit {
        kind: PatternKind::Bto,
        doc_id: m.doc_id.clone(),
        evidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoOccurrence {
    pub code_a: String,
    pub code_b: String,
    pub count: usize,
    pub doc_ids: Vec<String>,
}

/// Documents in which both codes occur at least once. With `a == b` this is
/// plain presence.
pub fn co_occurrence(
    set: &AnnotationSet,
    corpus: &Corpus,
    scheme: &CodingScheme,
    code_a: &str,
    code_b: &str,
) -> Result<CoOccurrence, AnalysisError> {
    for code in [code_a, code_b] {
        if !scheme.contains(code) {
            return Err(AnalysisError::UnknownCode(code.to_string()));
        }
    }
    let doc_ids: Vec<String> = corpus
        .documents()
        .filter(|d| {
            let mut has = (false, false);
            for a in set.for_document(&d.id) {
                has.0 |= a.code_id == code_a;
                has.1 |= a.code_id == code_b;
            }
            has.0 && has.1
        })
        .map(|d| d.id.clone())
        .collect();
    Ok(CoOccurrence {
        code_a: code_a.to_string(),
        code_b: code_b.to_string(),
        count: doc_ids.len(),
        doc_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PivotResult {
    NotApplicable,
    Pivot { evidence: Vec<Evidence> },
    NoPivot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentPivot {
    pub doc_id: String,
    #[serde(flatten)]
    pub result: PivotResult,
}

/// For each document: does some risk acknowledgment precede (by span start) a
/// reinforcing response? Evidence pairs each acknowledgment with the earliest
/// response starting strictly after it.
pub fn ack_pivot_scan(
    set: &AnnotationSet,
    corpus: &Corpus,
    scheme: &CodingScheme,
) -> Vec<DocumentPivot> {
    let responses: Vec<&str> = scheme.codes_in(Component::TRR).collect();
    corpus
        .documents()
        .map(|doc| {
            let anns: Vec<&Annotation> = set.for_document(&doc.id).collect();
            DocumentPivot {
                doc_id: doc.id.clone(),
                result: pivot_in(&anns, &responses),
            }
        })
        .collect()
}

fn pivot_in(anns: &[&Annotation], responses: &[&str]) -> PivotResult {
    let acks: Vec<&Annotation> = anns
        .iter()
        .copied()
        .filter(|a| a.code_id == RISK_ACKNOWLEDGMENT)
        .collect();
    if acks.is_empty() {
        return PivotResult::NotApplicable;
    }
    // Sorted by start; set order already breaks ties deterministically.
    let mut trr: Vec<&Annotation> = anns
        .iter()
        .copied()
        .filter(|a| responses.contains(&a.code_id.as_str()))
        .collect();
    trr.sort_by_key(|a| a.start);

    let evidence: Vec<Evidence> = acks
        .iter()
        .filter_map(|ack| {
            let i = trr.partition_point(|r| r.start <= ack.start);
            trr.get(i).map(|r| Evidence::Pivot {
                ack: (*ack).into(),
                response: (*r).into(),
            })
        })
        .collect();
    if evidence.is_empty() {
        PivotResult::NoPivot
    } else {
        PivotResult::Pivot { evidence }
    }
}

/// What to rank by: a code's normalized frequency or a sub-component score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankKey {
    Code(String),
    Component(Component),
}

impl RankKey {
    pub fn parse(s: &str, scheme: &CodingScheme) -> Result<RankKey, AnalysisError> {
        if let Some(c) = Component::parse(s) {
            Ok(RankKey::Component(c))
        } else if scheme.contains(s) {
            Ok(RankKey::Code(s.to_string()))
        } else {
            Err(AnalysisError::UnknownKey(s.to_string()))
        }
    }

    fn value(&self, m: &TextMetrics) -> f64 {
        match self {
            RankKey::Code(c) => m.frequencies.get(c),
            RankKey::Component(c) => m.components.get(*c),
        }
    }
}

impl fmt::Display for RankKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankKey::Code(c) => f.write_str(c),
            RankKey::Component(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedText {
    pub doc_id: String,
    pub value: f64,
}

/// Top `k` documents, descending by key value, ties by doc id.
pub fn rank_texts(metrics: &[TextMetrics], key: &RankKey, k: usize) -> Vec<RankedText> {
    let mut rows: Vec<RankedText> = metrics
        .iter()
        .map(|m| RankedText {
            doc_id: m.doc_id.clone(),
            value: key.value(m),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    rows.truncate(k);
    rows
}

/// A text's scores together with its author and date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatedScore {
    pub doc_id: String,
    pub author: String,
    pub date: NaiveDate,
    pub tsda: f64,
    pub tsdb: Tsdb,
}

pub fn dated_scores(
    corpus: &Corpus,
    metrics: &[TextMetrics],
) -> Result<Vec<DatedScore>, AnalysisError> {
    metrics
        .iter()
        .map(|m| {
            let doc = corpus
                .document(&m.doc_id)
                .ok_or_else(|| AnalysisError::UnknownDocument(m.doc_id.clone()))?;
            Ok(DatedScore {
                doc_id: m.doc_id.clone(),
                author: doc.author.clone(),
                date: doc.date,
                tsda: m.tsda,
                tsdb: m.tsdb,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub date: NaiveDate,
    pub doc_id: String,
    pub tsda: f64,
    pub tsdb: Tsdb,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub author: String,
    pub points: Vec<TrajectoryPoint>,
    /// Last minus first; `None` for single-text authors.
    pub delta_tsda: Option<f64>,
    /// `None` also when either endpoint has undefined TSDB.
    pub delta_tsdb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSummary {
    pub multi_text_authors: usize,
    pub increasing: usize,
    /// `increasing / multi_text_authors`, `None` without multi-text authors.
    pub fraction_increasing: Option<f64>,
    /// Increasing authors whose balance also dropped.
    pub increasing_less_balanced: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSpread {
    pub n: usize,
    /// max - min TSDA
    pub range: Option<f64>,
    /// population standard deviation of TSDA
    pub sd: Option<f64>,
}

impl PeriodSpread {
    fn of(values: &[f64]) -> Self {
        let s = Summary::of(values);
        Self {
            n: values.len(),
            range: s.map(|s| s.max - s.min),
            sd: s.map(|s| s.sd),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polarization {
    pub cut_date: NaiveDate,
    /// Texts dated on or before the cut.
    pub before: PeriodSpread,
    pub after: PeriodSpread,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dynamics {
    pub trajectories: Vec<Trajectory>,
    pub trend: TrendSummary,
    pub polarization: Polarization,
}

/// Per-author trajectories, share of authors whose TSDA rose, and TSDA
/// spread before and after `cut_date`.
pub fn dynamics(scores: &[DatedScore], cut_date: NaiveDate) -> Dynamics {
    let mut by_author: BTreeMap<&str, Vec<&DatedScore>> = BTreeMap::new();
    for s in scores {
        by_author.entry(s.author.as_str()).or_default().push(s);
    }

    let trajectories: Vec<Trajectory> = by_author
        .into_iter()
        .map(|(author, mut pts)| {
            pts.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.doc_id.cmp(&b.doc_id)));
            let points: Vec<TrajectoryPoint> = pts
                .iter()
                .map(|s| TrajectoryPoint {
                    date: s.date,
                    doc_id: s.doc_id.clone(),
                    tsda: s.tsda,
                    tsdb: s.tsdb,
                })
                .collect();
            let (first, last) = (points.first().unwrap(), points.last().unwrap());
            let multi = points.len() > 1;
            let delta_tsda = multi.then_some(last.tsda - first.tsda);
            let delta_tsdb = match (multi, first.tsdb, last.tsdb) {
                (true, Tsdb::Defined(a), Tsdb::Defined(b)) => Some(b - a),
                _ => None,
            };
            Trajectory {
                author: author.to_string(),
                points,
                delta_tsda,
                delta_tsdb,
            }
        })
        .collect();

    let multi: Vec<&Trajectory> = trajectories.iter().filter(|t| t.delta_tsda.is_some()).collect();
    let rising: Vec<&&Trajectory> = multi
        .iter()
        .filter(|t| t.delta_tsda.is_some_and(|d| d > 0.0))
        .collect();
    let trend = TrendSummary {
        multi_text_authors: multi.len(),
        increasing: rising.len(),
        fraction_increasing: (!multi.is_empty())
            .then(|| rising.len() as f64 / multi.len() as f64),
        increasing_less_balanced: rising
            .iter()
            .filter(|t| t.delta_tsdb.is_some_and(|d| d < 0.0))
            .count(),
    };

    let (before, after): (Vec<&DatedScore>, Vec<&DatedScore>) =
        scores.iter().partition(|s| s.date <= cut_date);
    let tsda_of = |v: &[&DatedScore]| v.iter().map(|s| s.tsda).collect::<Vec<_>>();
    Dynamics {
        trajectories,
        trend,
        polarization: Polarization {
            cut_date,
            before: PeriodSpread::of(&tsda_of(&before)),
            after: PeriodSpread::of(&tsda_of(&after)),
        },
    }
}
