//! Standoff annotations over corpus documents.
//!
//! Offsets count Unicode scalar values (Rust `char`s), 0-based, end exclusive.
//! The set keeps its annotations in export order, `(doc_id, start, end, code)`
//! with annotator and timestamp as final tie-breakers, so serialization is
//! stable and counts never depend on insertion order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::schema::CodingScheme;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    #[serde(rename = "code")]
    pub code_id: String,
    pub annotator: String,
    pub created_at: DateTime<Utc>,
    pub note: Option<String>,
}

impl Annotation {
    /// Stable key over the identity fields (document, span, code, annotator).
    pub fn key(&self) -> String {
        let mut h = Sha256::new();
        for part in [
            self.doc_id.as_str(),
            &self.start.to_string(),
            &self.end.to_string(),
            &self.code_id,
            &self.annotator,
        ] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn same_identity(&self, other: &Annotation) -> bool {
        self.doc_id == other.doc_id
            && self.start == other.start
            && self.end == other.end
            && self.code_id == other.code_id
            && self.annotator == other.annotator
    }

    fn export_order(&self, other: &Annotation) -> Ordering {
        (&self.doc_id, self.start, self.end, &self.code_id, &self.annotator)
            .cmp(&(&other.doc_id, other.start, other.end, &other.code_id, &other.annotator))
            .then(self.created_at.cmp(&other.created_at))
            .then(self.note.cmp(&other.note))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationViolationKind {
    UnknownDocument,
    UnknownCode,
    EmptySpan,
    OutOfBounds,
    Duplicate,
}

impl AnnotationViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationViolationKind::UnknownDocument => "unknown document",
            AnnotationViolationKind::UnknownCode => "unknown code",
            AnnotationViolationKind::EmptySpan => "empty span",
            AnnotationViolationKind::OutOfBounds => "out-of-bounds",
            AnnotationViolationKind::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for AnnotationViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationViolation {
    pub kind: AnnotationViolationKind,
    pub key: String,
    pub doc_id: String,
    pub code: String,
    pub message: String,
}

impl fmt::Display for AnnotationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("unknown document: {0}")]
    UnknownDocument(String),
    #[error("unknown code: {0}")]
    UnknownCode(String),
    #[error("empty span [{start}, {end})")]
    EmptySpan { start: usize, end: usize },
    #[error("out-of-bounds span [{start}, {end}) for document of length {len}")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("duplicate annotation {0}")]
    Duplicate(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl AnnotationError {
    pub fn kind(&self) -> Option<AnnotationViolationKind> {
        Some(match self {
            AnnotationError::UnknownDocument(_) => AnnotationViolationKind::UnknownDocument,
            AnnotationError::UnknownCode(_) => AnnotationViolationKind::UnknownCode,
            AnnotationError::EmptySpan { .. } => AnnotationViolationKind::EmptySpan,
            AnnotationError::OutOfBounds { .. } => AnnotationViolationKind::OutOfBounds,
            AnnotationError::Duplicate(_) => AnnotationViolationKind::Duplicate,
            AnnotationError::Parse { .. } => return None,
        })
    }
}

/// Checks one annotation against corpus and scheme, ignoring duplicates.
pub fn check_annotation(
    ann: &Annotation,
    corpus: &Corpus,
    scheme: &CodingScheme,
) -> Result<(), AnnotationError> {
    match annotation_problems(ann, corpus, scheme).into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Every rule the annotation breaks, in a fixed order. An unknown document
/// masks the span checks since there is no length to check against.
pub fn annotation_problems(
    ann: &Annotation,
    corpus: &Corpus,
    scheme: &CodingScheme,
) -> Vec<AnnotationError> {
    let mut out = Vec::new();
    let doc = corpus.document(&ann.doc_id);
    if doc.is_none() {
        out.push(AnnotationError::UnknownDocument(ann.doc_id.clone()));
    }
    if !scheme.contains(&ann.code_id) {
        out.push(AnnotationError::UnknownCode(ann.code_id.clone()));
    }
    if ann.start >= ann.end {
        out.push(AnnotationError::EmptySpan {
            start: ann.start,
            end: ann.end,
        });
    }
    if let Some(doc) = doc {
        let len = doc.char_len();
        if ann.end > len {
            out.push(AnnotationError::OutOfBounds {
                start: ann.start,
                end: ann.end,
                len,
            });
        }
    }
    out
}

/// Restricts counting to a set of annotators.
pub type AnnotatorFilter = BTreeSet<String>;

/// Raw per-code counts for one document; codes never annotated read as 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CodeCounts(pub BTreeMap<String, usize>);

impl CodeCounts {
    pub fn get(&self, code: &str) -> usize {
        self.0.get(code).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, usize)> for CodeCounts {
    fn from_iter<I: IntoIterator<Item = (S, usize)>>(iter: I) -> Self {
        let mut m = BTreeMap::new();
        for (k, v) in iter {
            *m.entry(k.into()).or_default() += v;
        }
        CodeCounts(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationSet {
    pub scheme_version: String,
    annotations: Vec<Annotation>,
}

impl AnnotationSet {
    pub fn new(scheme_version: impl Into<String>) -> Self {
        Self {
            scheme_version: scheme_version.into(),
            annotations: Vec::new(),
        }
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn for_document<'a>(&'a self, doc_id: &'a str) -> impl Iterator<Item = &'a Annotation> + 'a {
        // contiguous because of the export ordering
        let from = self.annotations.partition_point(|a| a.doc_id.as_str() < doc_id);
        self.annotations[from..]
            .iter()
            .take_while(move |a| a.doc_id == doc_id)
    }

    pub fn find_by_key(&self, key: &str) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.key() == key)
    }

    fn contains_identity(&self, ann: &Annotation) -> bool {
        self.for_document(&ann.doc_id).any(|a| a.same_identity(ann))
    }

    fn insert_sorted(&mut self, ann: Annotation) {
        let at = self
            .annotations
            .partition_point(|a| a.export_order(&ann) != Ordering::Greater);
        self.annotations.insert(at, ann);
    }

    /// Validates and inserts. Overlapping spans are allowed; exact duplicates
    /// (same document, span, code and annotator) are not.
    pub fn add(
        &mut self,
        ann: Annotation,
        corpus: &Corpus,
        scheme: &CodingScheme,
    ) -> Result<(), AnnotationError> {
        check_annotation(&ann, corpus, scheme)?;
        if self.contains_identity(&ann) {
            return Err(AnnotationError::Duplicate(ann.key()));
        }
        self.insert_sorted(ann);
        Ok(())
    }

    pub fn remove_by_key(&mut self, key: &str) -> Option<Annotation> {
        let i = self.annotations.iter().position(|a| a.key() == key)?;
        Some(self.annotations.remove(i))
    }

    /// Per-code counts for a document. Every scheme code is present, so
    /// uncoded codes read 0.
    pub fn code_counts(
        &self,
        corpus: &Corpus,
        scheme: &CodingScheme,
        doc_id: &str,
        filter: Option<&AnnotatorFilter>,
    ) -> Result<CodeCounts, AnnotationError> {
        if corpus.document(doc_id).is_none() {
            return Err(AnnotationError::UnknownDocument(doc_id.to_string()));
        }
        let mut counts: BTreeMap<String, usize> =
            scheme.codes.iter().map(|c| (c.id.clone(), 0)).collect();
        for a in self.for_document(doc_id) {
            if filter.is_none_or(|f| f.contains(&a.annotator)) {
                *counts.entry(a.code_id.clone()).or_default() += 1;
            }
        }
        Ok(CodeCounts(counts))
    }

    /// Every annotation that no longer fits the corpus or scheme.
    pub fn validate(&self, corpus: &Corpus, scheme: &CodingScheme) -> Vec<AnnotationViolation> {
        let mut out = Vec::new();
        let mut prev: Option<&Annotation> = None;
        for a in &self.annotations {
            let err = match check_annotation(a, corpus, scheme) {
                Err(e) => Some(e),
                Ok(()) if prev.is_some_and(|p| p.same_identity(a)) => {
                    Some(AnnotationError::Duplicate(a.key()))
                }
                Ok(()) => None,
            };
            if let Some(e) = err {
                out.push(AnnotationViolation {
                    kind: e.kind().expect("validation errors carry a kind"),
                    key: a.key(),
                    doc_id: a.doc_id.clone(),
                    code: a.code_id.clone(),
                    message: e.to_string(),
                });
            }
            prev = Some(a);
        }
        out
    }

    /// JSON Lines in export order, one object per line, LF terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for a in &self.annotations {
            out.push_str(&serde_json::to_string(a).expect("annotation serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses a JSON Lines file without checking it against a corpus; use
    /// [`AnnotationSet::validate`] for that. Blank lines are skipped.
    pub fn from_jsonl(text: &str, scheme_version: impl Into<String>) -> Result<Self, AnnotationError> {
        let mut set = AnnotationSet::new(scheme_version);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ann: Annotation = serde_json::from_str(line).map_err(|e| AnnotationError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if set.contains_identity(&ann) {
                return Err(AnnotationError::Parse {
                    line: i + 1,
                    message: format!("duplicate annotation {}", ann.key()),
                });
            }
            set.insert_sorted(ann);
        }
        Ok(set)
    }
}
