//! Coding schemes, standoff annotations and adherence/balance metrics for
//! critical discourse analysis of small corpora.
//!
//! Human coders annotate documents with codes from a [`schema::CodingScheme`];
//! [`metrics`] turns the annotations of each text into normalized code
//! frequencies, weighted component scores and the TSDA/TSDB pair, and
//! [`analysis`] and [`report`] work at corpus level.

pub mod analysis;
pub mod annotation;
pub mod corpus;
pub mod metrics;
pub mod project;
pub mod report;
pub mod schema;

pub use analysis::{Profile, ProfileThresholds};
pub use annotation::{Annotation, AnnotationSet};
pub use corpus::{Corpus, Document};
pub use metrics::{ComponentScores, TextMetrics, Tsdb};
pub use project::{AnalysisConfig, Project, View};
pub use schema::{builtin_tsd_scheme, CodingScheme};
