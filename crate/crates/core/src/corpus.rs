//! Documents, author metadata, word counts, engagement scores and the
//! per-author text selection procedure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    CEO,
    CTO,
    MP,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub name: String,
    pub role: Role,
    pub company: String,
}

/// The executive roster the built-in corpus metadata draws from.
pub fn executive_roster() -> Vec<Author> {
    use Role::*;
    [
        ("Andy Jassy", CEO, "Amazon"),
        ("Werner Vogels", CTO, "Amazon"),
        ("Dario Amodei", CEO, "Anthropic"),
        ("Matt Garman", CEO, "AWS"),
        ("Sundar Pichai", CEO, "Google"),
        ("Demis Hassabis", CEO, "Google DeepMind"),
        ("Satya Nadella", CEO, "Microsoft"),
        ("Kevin Scott", CTO, "Microsoft"),
        ("Mustafa Suleyman", CEO, "Microsoft AI"),
        ("Sam Altman", CEO, "OpenAI"),
        ("Marc Andreessen", MP, "Andreessen Horowitz"),
        ("Ben Horowitz", MP, "Andreessen Horowitz"),
        ("Hemant Taneja", MP, "General Catalyst Partners"),
        ("Vinod Khosla", MP, "Khosla Ventures"),
        ("Roelof Botha", MP, "Sequoia Capital"),
        ("Jensen Huang", CEO, "NVIDIA"),
        ("Michael Kagan", CTO, "NVIDIA"),
        ("Mark Zuckerberg", CEO, "Meta"),
        ("Elon Musk", CEO, "xAI"),
    ]
    .into_iter()
    .map(|(name, role, company)| Author {
        name: name.to_string(),
        role,
        company: company.to_string(),
    })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextType {
    BookChapter,
    OpEd,
    BlogPost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    #[serde(rename = "AI")]
    Ai,
    #[serde(rename = "general-tech")]
    GeneralTech,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub author: String,
    pub title: String,
    pub date: NaiveDate,
    pub text_type: TextType,
    pub topic: Topic,
    pub body: String,
    pub word_count: usize,
}

impl Document {
    /// Body length in Unicode scalar values, the unit of annotation offsets.
    pub fn char_len(&self) -> usize {
        self.body.chars().count()
    }
}

/// Document metadata as supplied by a caller or a manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub id: String,
    pub author: String,
    pub title: String,
    pub date: String,
    pub text_type: TextType,
    pub topic: Topic,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("duplicate document: {0}")]
    DuplicateDocument(String),
    #[error("empty body: {0}")]
    EmptyBody(String),
    #[error("invalid date {date:?} for document {id}")]
    InvalidDate { id: String, date: String },
    #[error("missing metadata field `{field}` for document {id:?}")]
    MissingField { id: String, field: &'static str },
    #[error("unknown document: {0}")]
    UnknownDocument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Entry {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("engagement pool is empty")]
    EmptyPool,
    #[error("author {0} has no documents with words")]
    NoWords(String),
}

/// Tokens are maximal non-whitespace runs holding at least one letter or digit.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|tok| tok.chars().any(char::is_alphanumeric))
        .count()
}

/// Optional eligibility filter: publication floor date and minimum length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eligibility {
    pub not_before: NaiveDate,
    pub min_words: Option<usize>,
}

impl Default for Eligibility {
    fn default() -> Self {
        Self {
            not_before: NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(),
            min_words: None,
        }
    }
}

impl Eligibility {
    pub fn with_min_words(mut self, n: usize) -> Self {
        self.min_words = Some(n);
        self
    }

    pub fn admits(&self, doc: &Document) -> bool {
        doc.date >= self.not_before && self.min_words.is_none_or(|n| doc.word_count >= n)
    }
}

/// A document store keyed by id. Documents are immutable once ingested.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    authors: BTreeMap<String, Author>,
    documents: BTreeMap<String, Document>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_author(&mut self, author: Author) {
        self.authors.insert(author.name.clone(), author);
    }

    pub fn author(&self, name: &str) -> Option<&Author> {
        self.authors.get(name)
    }

    pub fn authors(&self) -> impl Iterator<Item = &Author> {
        self.authors.values()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    /// Documents in id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn remove_document(&mut self, id: &str) -> Option<Document> {
        self.documents.remove(id)
    }

    /// Validates metadata, stores the body verbatim and caches its word count.
    pub fn ingest_document(
        &mut self,
        body: String,
        meta: DocumentMeta,
    ) -> Result<&Document, CorpusError> {
        for (field, value) in [("id", &meta.id), ("author", &meta.author), ("title", &meta.title)] {
            if value.trim().is_empty() {
                return Err(CorpusError::MissingField {
                    id: meta.id.clone(),
                    field,
                });
            }
        }
        let date = NaiveDate::parse_from_str(&meta.date, "%Y-%m-%d").map_err(|_| {
            CorpusError::InvalidDate {
                id: meta.id.clone(),
                date: meta.date.clone(),
            }
        })?;
        if self.documents.contains_key(&meta.id) {
            return Err(CorpusError::DuplicateDocument(meta.id));
        }
        let words = word_count(&body);
        if words == 0 {
            return Err(CorpusError::EmptyBody(meta.id));
        }
        let doc = Document {
            id: meta.id.clone(),
            author: meta.author,
            title: meta.title,
            date,
            text_type: meta.text_type,
            topic: meta.topic,
            body,
            word_count: words,
        };
        Ok(self.documents.entry(meta.id).or_insert(doc))
    }

    /// Documents grouped by author name, each group in id order.
    pub fn by_author(&self) -> BTreeMap<&str, Vec<&Document>> {
        let mut out: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
        for doc in self.documents.values() {
            out.entry(doc.author.as_str()).or_default().push(doc);
        }
        out
    }

    /// Reads a corpus manifest; body paths resolve against the manifest's directory.
    pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| CorpusError::Manifest {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));

        let mut corpus = Corpus::new();
        for author in manifest.authors {
            corpus.add_author(author);
        }
        for entry in manifest.documents {
            let body_path = base.join(&entry.path);
            let body = std::fs::read_to_string(&body_path).map_err(|source| CorpusError::Io {
                path: body_path.clone(),
                source,
            })?;
            corpus
                .ingest_document(body, entry.meta)
                .map_err(|e| CorpusError::Entry {
                    path: path.to_path_buf(),
                    source: Box::new(e),
                })?;
        }
        Ok(corpus)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub authors: Vec<Author>,
    pub documents: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub meta: DocumentMeta,
    pub path: PathBuf,
}

/// Raw engagement inputs for one author.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorActivity {
    pub author: String,
    pub total_words: u64,
    pub distinct_dates: usize,
}

impl AuthorActivity {
    pub fn from_documents<'a>(
        author: &str,
        docs: impl IntoIterator<Item = &'a Document>,
    ) -> Self {
        let mut words = 0u64;
        let mut dates = BTreeSet::new();
        for d in docs {
            words += d.word_count as u64;
            dates.insert(d.date);
        }
        Self {
            author: author.to_string(),
            total_words: words,
            distinct_dates: dates.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

impl LogBase {
    fn apply(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngagementScore {
    pub author: String,
    pub w: u64,
    pub d: usize,
    pub w_norm: f64,
    pub d_norm: f64,
    pub e: f64,
}

impl fmt::Display for EngagementScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: w={} d={} w'={:.2} d'={:.2} E={:.2}",
            self.author, self.w, self.d, self.w_norm, self.d_norm, self.e
        )
    }
}

/// Scores below this are excluded; the comparison is strict.
pub const ENGAGEMENT_THRESHOLD: f64 = 0.5;

/// Min-max normalization; a degenerate range maps everything to 1.
fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; values.len()]
    }
}

/// E = (w' + d') / 2 where w' and d' are min-max normalizations of log(w)
/// and d across the pool.
pub fn engagement_from_activity(
    pool: &[AuthorActivity],
    base: LogBase,
) -> Result<Vec<EngagementScore>, CorpusError> {
    if pool.is_empty() {
        return Err(CorpusError::EmptyPool);
    }
    if let Some(a) = pool.iter().find(|a| a.total_words == 0) {
        return Err(CorpusError::NoWords(a.author.clone()));
    }
    let logs: Vec<f64> = pool
        .iter()
        .map(|a| base.apply(a.total_words as f64))
        .collect();
    let dates: Vec<f64> = pool.iter().map(|a| a.distinct_dates as f64).collect();
    let w_norm = min_max(&logs);
    let d_norm = min_max(&dates);
    Ok(pool
        .iter()
        .zip(w_norm.into_iter().zip(d_norm))
        .map(|(a, (w, d))| EngagementScore {
            author: a.author.clone(),
            w: a.total_words,
            d: a.distinct_dates,
            w_norm: w,
            d_norm: d,
            e: (w + d) / 2.0,
        })
        .collect())
}

pub fn engagement_scores(
    pool: &[(String, Vec<&Document>)],
) -> Result<Vec<EngagementScore>, CorpusError> {
    let activity: Vec<AuthorActivity> = pool
        .iter()
        .map(|(author, docs)| {
            if docs.is_empty() {
                Err(CorpusError::NoWords(author.clone()))
            } else {
                Ok(AuthorActivity::from_documents(author, docs.iter().copied()))
            }
        })
        .collect::<Result<_, _>>()?;
    engagement_from_activity(&activity, LogBase::Natural)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<'a> {
    pub documents: Vec<&'a Document>,
    /// Fewer than `k` documents were available.
    pub short: bool,
}

/// Default number of texts kept per author.
pub const TEXTS_PER_AUTHOR: usize = 2;

// Canonical order inside a selection: AI first, then longer, earlier, id.
fn preference(a: &Document, b: &Document) -> std::cmp::Ordering {
    a.topic
        .cmp(&b.topic)
        .then(b.word_count.cmp(&a.word_count))
        .then(a.date.cmp(&b.date))
        .then(a.id.cmp(&b.id))
}

/// Picks `k` texts by type diversity, then AI topic, then length, then
/// earlier date and id. Candidate subsets are enumerated exhaustively, which
/// is exact and cheap for the small per-author pools this is meant for.
pub fn select_author_texts(docs: &[Document], k: usize) -> Selection<'_> {
    let mut pool: Vec<&Document> = docs.iter().collect();
    pool.sort_by(|a, b| preference(a, b));
    if pool.len() <= k {
        return Selection {
            short: pool.len() < k,
            documents: pool,
        };
    }

    // Each subset is already in preference order because `pool` is.
    let best = pool
        .iter()
        .copied()
        .combinations(k)
        .max_by(|a, b| subset_rank(a, b))
        .expect("k < pool size");
    Selection {
        documents: best,
        short: false,
    }
}

fn subset_rank<'a>(a: &[&'a Document], b: &[&'a Document]) -> std::cmp::Ordering {
    let types = |s: &[&Document]| s.iter().map(|d| d.text_type).collect::<BTreeSet<_>>().len();
    let ai = |s: &[&Document]| s.iter().filter(|d| d.topic == Topic::Ai).count();
    let lengths = |s: &[&Document]| {
        let mut v: Vec<usize> = s.iter().map(|d| d.word_count).collect();
        v.sort_unstable_by(|x, y| y.cmp(x));
        v
    };
    let dates_ids = |s: &[&'a Document]| {
        let mut v: Vec<(NaiveDate, &'a str)> = s.iter().map(|d| (d.date, d.id.as_str())).collect();
        v.sort_unstable();
        v
    };
    types(a)
        .cmp(&types(b))
        .then(ai(a).cmp(&ai(b)))
        .then(lengths(a).cmp(&lengths(b)))
        // earlier and smaller ids win, so reverse
        .then(dates_ids(b).cmp(&dates_ids(a)))
}
