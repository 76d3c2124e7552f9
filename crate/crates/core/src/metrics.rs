//! Per-document adherence (TSDA) and balance (TSDB) metrics.
//!
//! Raw code counts are normalized to occurrences per 1,000 words, summed into
//! four weighted sub-components, and combined into the pro and anti sides.
//! TSDA is `pro - anti`; TSDB is `min(pro, anti) / (pro + anti)`, which is
//! undefined for a text with no scored annotations at all.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::annotation::{AnnotationError, AnnotationSet, AnnotatorFilter, CodeCounts};
use crate::corpus::{Corpus, Document};
use crate::schema::{CodingScheme, Component};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty document: {0}")]
    EmptyDocument(String),
    #[error("code {code} has frequency {frequency} but no component assignment")]
    UnassignedCode { code: String, frequency: f64 },
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

/// Occurrences per 1,000 words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeFrequencies {
    pub doc_id: String,
    pub per_thousand: BTreeMap<String, f64>,
}

impl CodeFrequencies {
    pub fn get(&self, code: &str) -> f64 {
        self.per_thousand.get(code).copied().unwrap_or(0.0)
    }

    /// Frequencies given directly, e.g. for fixtures.
    pub fn from_pairs<'a>(doc_id: &str, pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            per_thousand: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

pub fn normalized_frequencies(
    doc_id: &str,
    counts: &CodeCounts,
    word_count: usize,
) -> Result<CodeFrequencies, MetricsError> {
    if word_count == 0 {
        return Err(MetricsError::EmptyDocument(doc_id.to_string()));
    }
    let words = word_count as f64;
    Ok(CodeFrequencies {
        doc_id: doc_id.to_string(),
        per_thousand: counts
            .iter()
            .map(|(code, n)| (code.to_string(), n as f64 * 1000.0 / words))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScores {
    pub tce: f64,
    pub trr: f64,
    pub anti_tce: f64,
    pub anti_trr: f64,
    pub pro: f64,
    pub anti: f64,
}

impl ComponentScores {
    pub fn new(tce: f64, trr: f64, anti_tce: f64, anti_trr: f64) -> Self {
        Self {
            tce,
            trr,
            anti_tce,
            anti_trr,
            pro: tce + trr,
            anti: anti_tce + anti_trr,
        }
    }

    /// Scores with everything on a single sub-component per side.
    pub fn from_sides(pro: f64, anti: f64) -> Self {
        Self::new(pro, 0.0, anti, 0.0)
    }

    pub fn get(&self, component: Component) -> f64 {
        match component {
            Component::TCE => self.tce,
            Component::TRR => self.trr,
            Component::ANTI_TCE => self.anti_tce,
            Component::ANTI_TRR => self.anti_trr,
        }
    }
}

/// Weighted sum of frequencies per sub-component.
pub fn component_scores(
    freqs: &CodeFrequencies,
    scheme: &CodingScheme,
) -> Result<ComponentScores, MetricsError> {
    let mut sums = [0.0f64; 4];
    for (code, &f) in &freqs.per_thousand {
        if f == 0.0 {
            continue;
        }
        let a = scheme
            .assignment(code)
            .ok_or_else(|| MetricsError::UnassignedCode {
                code: code.clone(),
                frequency: f,
            })?;
        let slot = Component::ALL
            .iter()
            .position(|c| *c == a.component)
            .expect("component listed in ALL");
        sums[slot] += a.weight * f;
    }
    Ok(ComponentScores::new(sums[0], sums[1], sums[2], sums[3]))
}

pub fn tsda(components: &ComponentScores) -> f64 {
    components.pro - components.anti
}

/// Balance between the pro and anti sides, in `[0, 0.5]`, or undefined when
/// both sides are zero. Never represented as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tsdb {
    Defined(f64),
    Undefined,
}

impl Tsdb {
    pub fn value(self) -> Option<f64> {
        match self {
            Tsdb::Defined(v) => Some(v),
            Tsdb::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Tsdb::Defined(_))
    }
}

impl fmt::Display for Tsdb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tsdb::Defined(v) => write!(f, "{v:.2}"),
            Tsdb::Undefined => f.write_str("undefined"),
        }
    }
}

// JSON: a number, or null when undefined.
impl Serialize for Tsdb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tsdb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(Tsdb::Undefined, Tsdb::Defined))
    }
}

pub fn tsdb(components: &ComponentScores) -> Tsdb {
    let (pro, anti) = (components.pro, components.anti);
    if pro == 0.0 && anti == 0.0 {
        Tsdb::Undefined
    } else if pro == anti {
        Tsdb::Defined(0.5)
    } else if pro == 0.0 || anti == 0.0 {
        Tsdb::Defined(0.0)
    } else {
        Tsdb::Defined(pro.min(anti) / (pro + anti))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextMetrics {
    pub doc_id: String,
    pub scheme_version: String,
    pub word_count: usize,
    pub frequencies: CodeFrequencies,
    pub components: ComponentScores,
    pub tsda: f64,
    pub tsdb: Tsdb,
}

impl TextMetrics {
    pub fn from_frequencies(
        frequencies: CodeFrequencies,
        word_count: usize,
        scheme: &CodingScheme,
    ) -> Result<Self, MetricsError> {
        let components = component_scores(&frequencies, scheme)?;
        Ok(Self {
            doc_id: frequencies.doc_id.clone(),
            scheme_version: scheme.version.clone(),
            word_count,
            tsda: tsda(&components),
            tsdb: tsdb(&components),
            frequencies,
            components,
        })
    }
}

/// counts → frequencies → components → TSDA/TSDB for one document.
pub fn text_metrics(
    doc: &Document,
    corpus: &Corpus,
    set: &AnnotationSet,
    scheme: &CodingScheme,
    filter: Option<&AnnotatorFilter>,
) -> Result<TextMetrics, MetricsError> {
    let counts = set.code_counts(corpus, scheme, &doc.id, filter)?;
    let freqs = normalized_frequencies(&doc.id, &counts, doc.word_count)?;
    TextMetrics::from_frequencies(freqs, doc.word_count, scheme)
}

/// Metrics for every document, in id order.
pub fn corpus_metrics(
    corpus: &Corpus,
    set: &AnnotationSet,
    scheme: &CodingScheme,
    filter: Option<&AnnotatorFilter>,
) -> Result<Vec<TextMetrics>, MetricsError> {
    corpus
        .documents()
        .map(|d| text_metrics(d, corpus, set, scheme, filter))
        .collect()
}
