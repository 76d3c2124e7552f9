#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use tsd_core::annotation::Annotation;
use tsd_core::corpus::{DocumentMeta, TextType, Topic};
use tsd_core::{AnnotationSet, Corpus};

/// Weight table written out by hand, independent of the scheme builder.
pub const WEIGHTS: &[(&str, &str, f64)] = &[
    ("CT-DE", "TCE", 2.0),
    ("CT-MP", "TCE", 2.0),
    ("CT-UF", "TCE", 2.0),
    ("SL-SP", "TCE", 2.0),
    ("TC-AA", "TCE", 2.0),
    ("TC-PD", "TCE", 2.0),
    ("SL-SF", "TCE", 1.0),
    ("SL-UI", "TCE", 1.0),
    ("TC-OS", "TCE", 1.0),
    ("TG-PE", "TCE", 1.0),
    ("TG-SO", "TCE", 1.0),
    ("TG-TF", "TCE", 1.0),
    ("ADD-ST", "TRR", 2.0),
    ("MAR-DI", "TRR", 2.0),
    ("MAR-MI", "TRR", 2.0),
    ("ACK-CR", "TRR", 1.0),
    ("ADD-JU", "TRR", 1.0),
    ("ADD-RE", "TRR", 1.0),
    ("MAR-DE", "TRR", 1.0),
    ("MAR-RF", "TRR", 1.0),
    ("ANTI-CT-DE", "ANTI_TCE", 2.0),
    ("ANTI-CT-MP", "ANTI_TCE", 2.0),
    ("ANTI-CT-UF", "ANTI_TCE", 2.0),
    ("ANTI-SL-SP", "ANTI_TCE", 2.0),
    ("ANTI-TC-AA", "ANTI_TCE", 2.0),
    ("ANTI-TC-PD", "ANTI_TCE", 2.0),
    ("ANTI-SL-SF", "ANTI_TCE", 1.0),
    ("ANTI-SL-UI", "ANTI_TCE", 1.0),
    ("ANTI-TC-OS", "ANTI_TCE", 1.0),
    ("ANTI-TG-PE", "ANTI_TCE", 1.0),
    ("ANTI-TG-SO", "ANTI_TCE", 1.0),
    ("ANTI-TG-TF", "ANTI_TCE", 1.0),
    ("ADD-SN", "ANTI_TRR", 2.0),
    ("ACK-RI", "ANTI_TRR", 1.0),
];

pub fn is_pro(component: &str) -> bool {
    component == "TCE" || component == "TRR"
}

/// (tce, trr, anti_tce, anti_trr) by direct summation over the table.
pub fn oracle_components(freqs: &[(&str, f64)]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (code, f) in freqs {
        let (_, comp, w) = WEIGHTS.iter().find(|(c, _, _)| c == code).unwrap();
        let slot = ["TCE", "TRR", "ANTI_TCE", "ANTI_TRR"]
            .iter()
            .position(|c| c == comp)
            .unwrap();
        out[slot] += w * f;
    }
    out
}

pub fn meta(id: &str, author: &str, date: &str) -> DocumentMeta {
    DocumentMeta {
        id: id.to_string(),
        author: author.to_string(),
        title: format!("Title of {id}"),
        date: date.to_string(),
        text_type: TextType::BlogPost,
        topic: Topic::Ai,
    }
}

pub fn ann(doc: &str, start: usize, end: usize, code: &str) -> Annotation {
    Annotation {
        doc_id: doc.to_string(),
        start,
        end,
        code_id: code.to_string(),
        annotator: "a1".to_string(),
        created_at: Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap(),
        note: None,
    }
}

/// A body of `words` short words.
pub fn body(words: usize) -> String {
    (0..words)
        .map(|i| ["alpha", "beta", "gamma", "delta"][i % 4])
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

pub fn load_fixture() -> (Corpus, AnnotationSet) {
    let dir = fixture_dir();
    let corpus = Corpus::load_manifest(&dir.join("manifest.json")).unwrap();
    let text = std::fs::read_to_string(dir.join("annotations.jsonl")).unwrap();
    let set = AnnotationSet::from_jsonl(&text, "1.0.0").unwrap();
    (corpus, set)
}
