//! Shared session state: an immutable snapshot that readers clone cheaply,
//! and a writer lock that serializes mutations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use thiserror::Error;
use tokio::sync::Mutex;
use tsd_core::annotation::{annotation_problems, Annotation, AnnotationError};
use tsd_core::Project;

/// One committed state of the session.
#[derive(Debug)]
pub struct Snapshot {
    pub revision: u64,
    pub project: Project,
}

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("unknown document: {0}")]
    UnknownDocument(String),
    #[error("invalid annotation")]
    Invalid(Vec<AnnotationError>),
    #[error("duplicate annotation {0}")]
    Duplicate(String),
    #[error("no annotation with key {0}")]
    UnknownKey(String),
    #[error("failed to persist annotations to {path}: {source}")]
    Persist {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<AnnotationError> for MutationError {
    fn from(e: AnnotationError) -> Self {
        match e {
            AnnotationError::UnknownDocument(id) => MutationError::UnknownDocument(id),
            AnnotationError::Duplicate(key) => MutationError::Duplicate(key),
            other => MutationError::Invalid(vec![other]),
        }
    }
}

pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    annotations_path: Option<PathBuf>,
}

impl AppState {
    /// `annotations_path`, when given, is rewritten after every mutation.
    pub fn new(project: Project, annotations_path: Option<PathBuf>) -> Self {
        Self {
            current: RwLock::new(Arc::new(Snapshot {
                revision: 0,
                project,
            })),
            writer: Mutex::new(()),
            annotations_path,
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock poisoned").clone()
    }

    pub async fn add_annotation(&self, ann: Annotation) -> Result<Arc<Snapshot>, MutationError> {
        self.mutate(|project| {
            let problems = annotation_problems(&ann, &project.corpus, &project.scheme);
            if let Some(AnnotationError::UnknownDocument(id)) = problems.first() {
                return Err(MutationError::UnknownDocument(id.clone()));
            }
            if !problems.is_empty() {
                return Err(MutationError::Invalid(problems));
            }
            project
                .annotations
                .add(ann, &project.corpus, &project.scheme)
                .map_err(MutationError::from)
        })
        .await
    }

    pub async fn remove_annotation(
        &self,
        key: &str,
    ) -> Result<(Annotation, Arc<Snapshot>), MutationError> {
        let mut removed = None;
        let snap = self
            .mutate(|project| {
                removed = Some(
                    project
                        .annotations
                        .remove_by_key(key)
                        .ok_or_else(|| MutationError::UnknownKey(key.to_string()))?,
                );
                Ok(())
            })
            .await?;
        Ok((removed.expect("set on success"), snap))
    }

    /// Applies `f` to a copy of the current project, persists, then publishes
    /// the copy as the next revision. Nothing is published on error.
    async fn mutate<F>(&self, f: F) -> Result<Arc<Snapshot>, MutationError>
    where
        F: FnOnce(&mut Project) -> Result<(), MutationError>,
    {
        let _guard = self.writer.lock().await;
        let base = self.snapshot();
        let mut project = base.project.clone();
        f(&mut project)?;
        if let Some(path) = &self.annotations_path {
            write_atomic(path, &project.annotations.to_jsonl()).map_err(|source| {
                MutationError::Persist {
                    path: path.clone(),
                    source,
                }
            })?;
        }
        let next = Arc::new(Snapshot {
            revision: base.revision + 1,
            project,
        });
        *self.current.write().expect("snapshot lock poisoned") = next.clone();
        Ok(next)
    }
}

/// Write to a sibling temp file, then rename over the target.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
