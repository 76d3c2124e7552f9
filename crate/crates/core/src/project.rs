//! A loaded corpus, scheme and annotation set plus analysis settings, and the
//! JSON views computed from them. The command line and the HTTP service both
//! render views through [`Project::view_json`], so their bytes agree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    self, ack_pivot_scan, classify_profile, co_occurrence, corpus_stats, dated_scores,
    detect_bto, rank_texts, AnalysisError, AnnotationRef, BtoThresholds, CoOccurrence,
    CorpusStats, DocumentPivot, Dynamics, Evidence, PatternHit, PatternKind, PivotResult,
    ProfileLabel, ProfileThresholds, RankKey, RankedText,
};
use crate::annotation::{AnnotationSet, AnnotatorFilter};
use crate::corpus::Corpus;
use crate::metrics::{corpus_metrics, text_metrics, MetricsError, TextMetrics};
use crate::report::{dynamics_data, spectrum_data, DynamicsDataset, EventMarker, SpectrumDataset};
use crate::schema::CodingScheme;

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub profile: ProfileThresholds,
    pub bto: BtoThresholds,
    pub cut_date: NaiveDate,
    pub annotators: Option<AnnotatorFilter>,
    pub events: Vec<EventMarker>,
    /// Code pair mined for co-occurrence.
    pub pair: (String, String),
    /// Ranking keys reported in the stats view and the size of each list.
    pub rank_keys: Vec<String>,
    pub top_k: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            profile: ProfileThresholds::default(),
            bto: BtoThresholds::default(),
            cut_date: analysis::default_cut_date(),
            annotators: None,
            events: Vec::new(),
            pair: (
                analysis::UTOPIAN_FUTURE.to_string(),
                analysis::PROGRESS_DRIVER.to_string(),
            ),
            rank_keys: ["CT-MP", "CT-UF", "TC-PD", "ACK-RI", "TCE", "TRR", "ANTI_TCE", "ANTI_TRR"]
                .map(String::from)
                .to_vec(),
            top_k: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Spectrum,
    Dynamics,
    Patterns,
    Stats,
}

impl View {
    pub const ALL: [View; 4] = [View::Spectrum, View::Dynamics, View::Patterns, View::Stats];

    pub fn as_str(self) -> &'static str {
        match self {
            View::Spectrum => "spectrum",
            View::Dynamics => "dynamics",
            View::Patterns => "patterns",
            View::Stats => "stats",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        View::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown view: {s}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub key: String,
    pub top: Vec<RankedText>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsView {
    pub stats: CorpusStats,
    pub profiles: Vec<ProfileLabel>,
    /// Documents without a profile (undefined TSDB).
    pub unclassified: Vec<String>,
    pub rankings: Vec<Ranking>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PivotCounts {
    pub pivot: usize,
    pub no_pivot: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternsView {
    pub co_occurrence: CoOccurrence,
    pub pivots: Vec<DocumentPivot>,
    pub pivot_counts: PivotCounts,
    pub bto: Vec<String>,
    pub hits: Vec<PatternHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsView {
    pub dataset: DynamicsDataset,
    pub analysis: Dynamics,
}

/// Envelope shared by every view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewDocument<T> {
    pub view: &'static str,
    pub revision: u64,
    pub scheme_version: String,
    pub data: T,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub corpus: Corpus,
    pub scheme: CodingScheme,
    pub annotations: AnnotationSet,
    pub config: AnalysisConfig,
}

impl Project {
    pub fn new(
        corpus: Corpus,
        scheme: CodingScheme,
        annotations: AnnotationSet,
        config: AnalysisConfig,
    ) -> Self {
        Self {
            corpus,
            scheme,
            annotations,
            config,
        }
    }

    pub fn metrics(&self) -> Result<Vec<TextMetrics>, MetricsError> {
        corpus_metrics(
            &self.corpus,
            &self.annotations,
            &self.scheme,
            self.config.annotators.as_ref(),
        )
    }

    pub fn document_metrics(&self, doc_id: &str) -> Result<TextMetrics, ProjectError> {
        let doc = self
            .corpus
            .document(doc_id)
            .ok_or_else(|| AnalysisError::UnknownDocument(doc_id.to_string()))?;
        Ok(text_metrics(
            doc,
            &self.corpus,
            &self.annotations,
            &self.scheme,
            self.config.annotators.as_ref(),
        )?)
    }

    pub fn spectrum(&self, metrics: &[TextMetrics]) -> Result<SpectrumDataset, ProjectError> {
        let scores = dated_scores(&self.corpus, metrics)?;
        Ok(spectrum_data(&scores, &self.config.profile))
    }

    pub fn dynamics(&self, metrics: &[TextMetrics]) -> Result<DynamicsView, ProjectError> {
        let scores = dated_scores(&self.corpus, metrics)?;
        Ok(DynamicsView {
            dataset: dynamics_data(&scores, &self.config.events),
            analysis: analysis::dynamics(&scores, self.config.cut_date),
        })
    }

    pub fn stats(&self, metrics: &[TextMetrics]) -> Result<StatsView, ProjectError> {
        let stats = corpus_stats(metrics)?;
        let mut profiles = Vec::new();
        let mut unclassified = Vec::new();
        for m in metrics {
            match classify_profile(m, &self.config.profile) {
                Ok(label) => profiles.push(label),
                Err(_) => unclassified.push(m.doc_id.clone()),
            }
        }
        let rankings = self
            .config
            .rank_keys
            .iter()
            .map(|k| {
                let key = RankKey::parse(k, &self.scheme)?;
                Ok(Ranking {
                    key: key.to_string(),
                    top: rank_texts(metrics, &key, self.config.top_k),
                })
            })
            .collect::<Result<_, AnalysisError>>()?;
        Ok(StatsView {
            stats,
            profiles,
            unclassified,
            rankings,
        })
    }

    pub fn patterns(&self, metrics: &[TextMetrics]) -> Result<PatternsView, ProjectError> {
        let (a, b) = &self.config.pair;
        let co = co_occurrence(&self.annotations, &self.corpus, &self.scheme, a, b)?;
        let pivots = ack_pivot_scan(&self.annotations, &self.corpus, &self.scheme);

        let mut hits: BTreeMap<(String, u8), PatternHit> = BTreeMap::new();
        for doc_id in &co.doc_ids {
            let evidence = self
                .annotations
                .for_document(doc_id)
                .filter(|x| &x.code_id == a || &x.code_id == b)
                .map(|x| Evidence::Annotation(AnnotationRef::from(x)))
                .collect();
            hits.insert(
                (doc_id.clone(), 0),
                PatternHit {
                    kind: PatternKind::CoOccurrence,
                    doc_id: doc_id.clone(),
                    evidence,
                },
            );
        }
        let mut counts = PivotCounts::default();
        for p in &pivots {
            match &p.result {
                PivotResult::NotApplicable => counts.not_applicable += 1,
                PivotResult::NoPivot => counts.no_pivot += 1,
                PivotResult::Pivot { evidence } => {
                    counts.pivot += 1;
                    hits.insert(
                        (p.doc_id.clone(), 1),
                        PatternHit {
                            kind: PatternKind::AckPivot,
                            doc_id: p.doc_id.clone(),
                            evidence: evidence.clone(),
                        },
                    );
                }
            }
        }
        let mut bto = Vec::new();
        for m in metrics {
            if let Some(hit) = detect_bto(m, &self.config.bto) {
                bto.push(m.doc_id.clone());
                hits.insert((m.doc_id.clone(), 2), hit);
            }
        }
        Ok(PatternsView {
            co_occurrence: co,
            pivots,
            pivot_counts: counts,
            bto,
            hits: hits.into_values().collect(),
        })
    }

    /// The JSON body of `view` at `revision`.
    pub fn view_json(&self, view: View, revision: u64) -> Result<String, ProjectError> {
        let metrics = self.metrics()?;
        Ok(match view {
            View::Spectrum => self.envelope(view, revision, self.spectrum(&metrics)?),
            View::Dynamics => self.envelope(view, revision, self.dynamics(&metrics)?),
            View::Patterns => self.envelope(view, revision, self.patterns(&metrics)?),
            View::Stats => self.envelope(view, revision, self.stats(&metrics)?),
        })
    }

    fn envelope<T: Serialize>(&self, view: View, revision: u64, data: T) -> String {
        crate::report::to_json(&ViewDocument {
            view: view.as_str(),
            revision,
            scheme_version: self.scheme.version.clone(),
            data,
        })
    }
}
