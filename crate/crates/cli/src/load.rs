//! Reading inputs from disk with diagnostics that name the file and line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use tsd_core::annotation::{check_annotation, Annotation};
use tsd_core::report::{parse_events, EventMarker};
use tsd_core::schema::load_scheme;
use tsd_core::{builtin_tsd_scheme, AnnotationSet, CodingScheme, Corpus};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn corpus(path: &Path) -> Result<Corpus> {
    Ok(Corpus::load_manifest(path)?)
}

pub fn scheme(path: Option<&Path>) -> Result<CodingScheme> {
    match path {
        None => Ok(builtin_tsd_scheme()),
        Some(p) => load_scheme(&read(p)?).with_context(|| format!("invalid scheme {}", p.display())),
    }
}

pub fn events(path: Option<&Path>) -> Result<Vec<EventMarker>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_events(&read(p)?).with_context(|| format!("invalid events file {}", p.display())),
    }
}

/// Parses an annotation file line by line, checking each annotation against
/// the corpus and scheme as it goes.
pub fn annotations_into(
    set: &mut AnnotationSet,
    path: &Path,
    corpus: &Corpus,
    scheme: &CodingScheme,
    skip_duplicates: bool,
) -> Result<(usize, usize)> {
    let text = read(path)?;
    let (mut added, mut skipped) = (0, 0);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        let ann: Annotation = serde_json::from_str(line).with_context(at)?;
        if let Err(e) = check_annotation(&ann, corpus, scheme) {
            bail!("{}: {e}", at());
        }
        match set.add(ann, corpus, scheme) {
            Ok(()) => added += 1,
            Err(_) if skip_duplicates => skipped += 1,
            Err(e) => bail!("{}: {e}", at()),
        }
    }
    Ok((added, skipped))
}

pub fn annotations(path: Option<&Path>, corpus: &Corpus, scheme: &CodingScheme) -> Result<AnnotationSet> {
    let mut set = AnnotationSet::new(scheme.version.clone());
    if let Some(p) = path {
        annotations_into(&mut set, p, corpus, scheme, false)?;
    }
    Ok(set)
}

/// Write to a sibling temp file, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot replace {}", path.display()))
}
