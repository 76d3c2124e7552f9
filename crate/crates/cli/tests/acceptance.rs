//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use chrono::{NaiveDate, TimeZone, Utc};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};
use tsd_core::analysis::{
    ack_pivot_scan, classify, classify_profile, co_occurrence, dynamics, AnnotationRef,
    DatedScore, Evidence, PivotResult, Profile, ProfileThresholds,
};
use tsd_core::annotation::{Annotation, CodeCounts};
use tsd_core::corpus::{engagement_from_activity, AuthorActivity, DocumentMeta, LogBase, TextType, Topic};
use tsd_core::metrics::{component_scores, normalized_frequencies, text_metrics, tsda, tsdb, CodeFrequencies};
use tsd_core::{builtin_tsd_scheme, AnalysisConfig, AnnotationSet, ComponentScores, Corpus, Project, TextMetrics, Tsdb};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CASES: u32 = 1000;

/// Hand-kept weight table used as the oracle for component sums.
const WEIGHTS: &[(&str, usize, f64)] = &[
    ("CT-DE", 0, 2.0), ("CT-MP", 0, 2.0), ("CT-UF", 0, 2.0), ("SL-SP", 0, 2.0),
    ("TC-AA", 0, 2.0), ("TC-PD", 0, 2.0), ("SL-SF", 0, 1.0), ("SL-UI", 0, 1.0),
    ("TC-OS", 0, 1.0), ("TG-PE", 0, 1.0), ("TG-SO", 0, 1.0), ("TG-TF", 0, 1.0),
    ("ADD-ST", 1, 2.0), ("MAR-DI", 1, 2.0), ("MAR-MI", 1, 2.0), ("ACK-CR", 1, 1.0),
    ("ADD-JU", 1, 1.0), ("ADD-RE", 1, 1.0), ("MAR-DE", 1, 1.0), ("MAR-RF", 1, 1.0),
    ("ANTI-CT-DE", 2, 2.0), ("ANTI-CT-MP", 2, 2.0), ("ANTI-CT-UF", 2, 2.0), ("ANTI-SL-SP", 2, 2.0),
    ("ANTI-TC-AA", 2, 2.0), ("ANTI-TC-PD", 2, 2.0), ("ANTI-SL-SF", 2, 1.0), ("ANTI-SL-UI", 2, 1.0),
    ("ANTI-TC-OS", 2, 1.0), ("ANTI-TG-PE", 2, 1.0), ("ANTI-TG-SO", 2, 1.0), ("ANTI-TG-TF", 2, 1.0),
    ("ADD-SN", 3, 2.0), ("ACK-RI", 3, 1.0),
];

/// Reported spectrum points: (label, tsda, tsdb).
const POINTS: &[(&str, f64, f64)] = &[
    ("pichai-2020", -6.35, 0.43),
    ("pichai-2025", 28.83, 0.18),
    ("khosla-2017", -0.94, 0.49),
    ("khosla-2024", 32.38, 0.26),
    ("altman-2024a", 9.51, 0.30),
    ("altman-2024b", 55.15, 0.09),
];

fn main() {
    let criteria: [Criterion; 9] = [
        ("metric algebra on the hand-computed fixture", c1_algebra),
        ("TSDB edge cases", c2_edges),
        ("reported points from inverted components", c3_points),
        ("metric property suite", c4_properties),
        ("pattern miners against brute force", c5_miners),
        ("profile classification", c6_profiles),
        ("dynamics", c7_dynamics),
        ("engagement", c8_engagement),
        ("CLI determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({ms} ms)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn metrics_from(pairs: &[(&str, f64)]) -> TextMetrics {
    let freqs = CodeFrequencies::from_pairs("x", pairs.iter().copied());
    TextMetrics::from_frequencies(freqs, 1000, &builtin_tsd_scheme()).expect("metrics")
}

fn c1_algebra() -> Outcome {
    let started = Instant::now();
    let m = metrics_from(&[("CT-UF", 2.0), ("TG-TF", 1.0), ("ADD-ST", 1.0), ("ACK-RI", 3.0), ("ADD-SN", 0.5)]);
    let c = &m.components;
    // oracle: 2*2 + 1*1 + 2*1 = 7 pro; 1*3 + 2*0.5 = 4 anti
    let want = [(c.pro, 7.0), (c.anti, 4.0), (m.tsda, 3.0), (m.tsdb.value().unwrap_or(f64::NAN), 4.0 / 11.0)];
    for (got, exp) in want {
        ensure((got - exp).abs() < 1e-9, || format!("got {got}, expected {exp}"))?;
    }
    within(Duration::from_secs(1), started)?;
    Ok("pro 7, anti 4, tsda 3, tsdb 4/11 within 1e-9".into())
}

fn c2_edges() -> Outcome {
    let b = |p: f64, a: f64| tsdb(&ComponentScores::from_sides(p, a));
    let cases = [
        (b(3.5, 3.5), Tsdb::Defined(0.5)),
        (b(4.0, 0.0), Tsdb::Defined(0.0)),
        (b(0.0, 2.5), Tsdb::Defined(0.0)),
        (b(0.0, 0.0), Tsdb::Undefined),
    ];
    for (got, want) in cases {
        ensure(got == want, || format!("got {got:?}, expected {want:?}"))?;
    }
    ensure(serde_json::to_string(&Tsdb::Undefined).unwrap() == "null", || "undefined must serialize as null".into())?;
    Ok("0.5, 0, 0, undefined exactly".into())
}

/// (pro, anti) from a reported pair: s = |tsda| / (1 - 2 tsdb); the minority
/// side is tsdb * s and the majority (1 - tsdb) * s.
fn invert(a: f64, b: f64) -> (f64, f64) {
    let s = a.abs() / (1.0 - 2.0 * b);
    let (major, minor) = ((1.0 - b) * s, b * s);
    if a >= 0.0 {
        (major, minor)
    } else {
        (minor, major)
    }
}

/// Runs an inverted pair through the engine as single-code frequencies.
fn engine_point(a: f64, b: f64) -> TextMetrics {
    let (pro, anti) = invert(a, b);
    metrics_from(&[("TG-TF", pro), ("ACK-RI", anti)])
}

fn c3_points() -> Outcome {
    let started = Instant::now();
    for &(label, a, b) in POINTS {
        let m = engine_point(a, b);
        let got_b = m.tsdb.value().ok_or(format!("{label}: undefined tsdb"))?;
        ensure((m.tsda - a).abs() <= 0.01 && (got_b - b).abs() <= 0.01, || {
            format!("{label}: got ({:.4}, {:.4}), expected ({a}, {b})", m.tsda, got_b)
        })?;
    }
    let (p, q) = invert(55.15, 0.09);
    ensure((p - 61.21).abs() < 0.01 && (q - 6.06).abs() < 0.01, || format!("55.15/0.09 inverted to ({p:.3}, {q:.3})"))?;
    within(Duration::from_secs(1), started)?;
    Ok(format!("{} points within 0.01", POINTS.len()))
}

fn counts_map(counts: &[usize]) -> CodeCounts {
    WEIGHTS.iter().zip(counts).map(|((c, _, _), n)| (*c, *n)).collect()
}

fn metrics_for_counts(counts: &[usize], words: usize) -> TextMetrics {
    let freqs = normalized_frequencies("x", &counts_map(counts), words).unwrap();
    TextMetrics::from_frequencies(freqs, words, &builtin_tsd_scheme()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn same_tsdb(a: Tsdb, b: Tsdb) -> bool {
    match (a, b) {
        (Tsdb::Defined(x), Tsdb::Defined(y)) => close(x, y),
        (x, y) => x == y,
    }
}

fn run_cases<S: Strategy>(name: &str, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&s, f).map_err(|e| format!("{name}: {e}"))
}

fn doc_meta(id: &str, author: &str, date: &str) -> DocumentMeta {
    DocumentMeta {
        id: id.into(),
        author: author.into(),
        title: id.into(),
        date: date.into(),
        text_type: TextType::BlogPost,
        topic: Topic::Ai,
    }
}

fn ann(doc: &str, start: usize, end: usize, code: &str) -> Annotation {
    Annotation {
        doc_id: doc.into(),
        start,
        end,
        code_id: code.into(),
        annotator: "a".into(),
        created_at: Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap(),
        note: None,
    }
}

fn c4_properties() -> Outcome {
    let counts = || prop::collection::vec(0usize..12, WEIGHTS.len());
    run_cases("tsdb range", (0.0f64..500.0, 0.0f64..500.0, 0u8..3), |(p, a, z)| {
        let (p, a) = match z { 0 => (0.0, a), 1 => (p, 0.0), _ => (p, a) };
        match tsdb(&ComponentScores::from_sides(p, a)) {
            Tsdb::Defined(b) => prop_assert!((0.0..=0.5).contains(&b)),
            Tsdb::Undefined => prop_assert!(p == 0.0 && a == 0.0),
        }
        Ok(())
    })?;
    run_cases("swap symmetry", (0.0f64..500.0, 0.0f64..500.0), |(p, a)| {
        let x = ComponentScores::from_sides(p, a);
        let y = ComponentScores::from_sides(a, p);
        prop_assert_eq!(tsda(&x), -tsda(&y));
        prop_assert!(same_tsdb(tsdb(&x), tsdb(&y)));
        Ok(())
    })?;
    run_cases("count scaling", (counts(), 100usize..5000, 1usize..10), |(c, w, k)| {
        let scaled: Vec<usize> = c.iter().map(|n| n * k).collect();
        let (x, y) = (metrics_for_counts(&c, w), metrics_for_counts(&scaled, w));
        prop_assert!(close(y.tsda, k as f64 * x.tsda));
        prop_assert!(same_tsdb(x.tsdb, y.tsdb));
        Ok(())
    })?;
    run_cases(
        "document doubling",
        (10usize..200, prop::collection::vec((0usize..2000, 1usize..30, 0usize..WEIGHTS.len()), 0..25)),
        |(words, spans)| {
            let scheme = builtin_tsd_scheme();
            let text = vec!["word"; words].join(" ");
            let len = text.chars().count();
            let mut corpus = Corpus::new();
            corpus.ingest_document(format!("{text} {text}"), doc_meta("two", "A", "2024-01-01")).unwrap();
            corpus.ingest_document(text, doc_meta("one", "A", "2024-01-01")).unwrap();
            let mut set = AnnotationSet::new("1.0.0");
            for (s, w, c) in spans {
                let s = s % (len - 1);
                let e = (s + w).min(len);
                if set.add(ann("one", s, e, WEIGHTS[c].0), &corpus, &scheme).is_ok() {
                    set.add(ann("two", s, e, WEIGHTS[c].0), &corpus, &scheme).unwrap();
                    set.add(ann("two", s + len + 1, e + len + 1, WEIGHTS[c].0), &corpus, &scheme).unwrap();
                }
            }
            let m = |id: &str| text_metrics(corpus.document(id).unwrap(), &corpus, &set, &scheme, None).unwrap();
            let (x, y) = (m("one"), m("two"));
            prop_assert!(close(x.tsda, y.tsda));
            prop_assert!(same_tsdb(x.tsdb, y.tsdb));
            Ok(())
        },
    )?;
    run_cases("PRO monotonicity", (counts(), 100usize..5000, 0usize..20), |(c, w, i)| {
        let mut more = c.clone();
        more[i] += 1;
        let (x, y) = (metrics_for_counts(&c, w), metrics_for_counts(&more, w));
        prop_assert!(y.components.pro >= x.components.pro);
        prop_assert!(y.tsda >= x.tsda);
        Ok(())
    })?;
    run_cases(
        "weight-table oracle",
        (prop::collection::vec(0.0f64..50.0, WEIGHTS.len()), any::<u64>()),
        |(f, mask)| {
            let pairs: Vec<(&str, f64)> = WEIGHTS
                .iter()
                .zip(&f)
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, ((c, _, _), v))| (*c, *v))
                .collect();
            let mut want = [0.0; 4];
            for (code, v) in &pairs {
                let (_, slot, w) = WEIGHTS.iter().find(|(c, _, _)| c == code).unwrap();
                want[*slot] += w * v;
            }
            let got = component_scores(&CodeFrequencies::from_pairs("x", pairs.iter().copied()), &builtin_tsd_scheme()).unwrap();
            for (g, w) in [got.tce, got.trr, got.anti_tce, got.anti_trr].into_iter().zip(want) {
                prop_assert!(close(g, w));
            }
            Ok(())
        },
    )?;
    Ok(format!("6 properties x {CASES} cases"))
}

const MINER_CODES: &[&str] = &["ACK-RI", "ADD-ST", "MAR-DI", "ACK-CR", "CT-UF", "TC-PD", "ADD-SN", "TG-TF"];
const TRR: &[&str] = &["ADD-ST", "MAR-DI", "MAR-MI", "ACK-CR", "ADD-JU", "ADD-RE", "MAR-DE", "MAR-RF"];

fn c5_miners() -> Outcome {
    const DOCS: usize = 600;
    let started = Instant::now();
    let scheme = builtin_tsd_scheme();
    let mut runner = TestRunner::deterministic();
    let doc_strategy = prop::collection::vec((0usize..300, 1usize..25, 0usize..MINER_CODES.len()), 0..=50);
    let mut corpus = Corpus::new();
    let mut set = AnnotationSet::new("1.0.0");
    for i in 0..DOCS {
        let id = format!("d{i:04}");
        corpus.ingest_document(vec!["word"; 80].join(" "), doc_meta(&id, "A", "2024-01-01")).unwrap();
        for (s, w, c) in doc_strategy.new_tree(&mut runner).unwrap().current() {
            let _ = set.add(ann(&id, s, s + w, MINER_CODES[c]), &corpus, &scheme);
        }
    }
    let pivots = ack_pivot_scan(&set, &corpus, &scheme);
    let pairs = [("CT-UF", "TC-PD"), ("TC-PD", "CT-UF"), ("ACK-RI", "ADD-ST"), ("ADD-SN", "ADD-SN")];
    let cooc: Vec<_> = pairs.iter().map(|(a, b)| co_occurrence(&set, &corpus, &scheme, a, b).unwrap()).collect();

    let mut matched = 0;
    for (i, doc) in corpus.documents().enumerate() {
        let anns: Vec<&Annotation> = set.annotations().iter().filter(|a| a.doc_id == doc.id).collect();
        // brute force over all (ack, response) pairs
        let mut evidence = Vec::new();
        let mut any_ack = false;
        for a in anns.iter().filter(|a| a.code_id == "ACK-RI") {
            any_ack = true;
            let mut best: Option<&Annotation> = None;
            for r in &anns {
                if TRR.contains(&r.code_id.as_str()) && r.start > a.start && best.is_none_or(|b| r.start < b.start) {
                    best = Some(r);
                }
            }
            if let Some(r) = best {
                evidence.push(Evidence::Pivot { ack: AnnotationRef::from(*a), response: AnnotationRef::from(r) });
            }
        }
        let want = match (any_ack, evidence.is_empty()) {
            (false, _) => PivotResult::NotApplicable,
            (true, true) => PivotResult::NoPivot,
            (true, false) => PivotResult::Pivot { evidence },
        };
        ensure(pivots[i].doc_id == doc.id && pivots[i].result == want, || format!("pivot mismatch on {}", doc.id))?;
        for ((a, b), got) in pairs.iter().zip(&cooc) {
            let both = anns.iter().any(|x| x.code_id == *a) && anns.iter().any(|y| y.code_id == *b);
            ensure(both == got.doc_ids.contains(&doc.id), || format!("co-occurrence {a}/{b} mismatch on {}", doc.id))?;
        }
        matched += 1;
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{matched} documents, {} annotations", set.len()))
}

fn c6_profiles() -> Outcome {
    let th = ProfileThresholds::default();
    let cases = [
        (55.15, 0.09, Profile::ProImbalanced),
        (32.38, 0.26, Profile::ProImbalanced),
        (28.83, 0.18, Profile::ProImbalanced),
        (-0.94, 0.49, Profile::Balanced),
        (-20.0, 0.10, Profile::Critical),
    ];
    for (a, b, want) in cases {
        let got = classify_profile(&engine_point(a, b), &th).map_err(|e| e.to_string())?;
        ensure(got.profile == want, || format!("({a}, {b}) classified {} not {want}", got.profile))?;
    }
    run_cases("rule order", (0.001f64..100.0, 0.0f64..=0.5, 0.05f64..0.5, -0.04f64..0.04), |(a, b, t, dt)| {
        for t in [t, t + dt] {
            let (p, _) = classify(a, b, &ProfileThresholds { balanced_tsdb: t });
            prop_assert_ne!(p, Profile::Critical);
            prop_assert_eq!(p == Profile::Balanced, b >= t);
        }
        let (neg, _) = classify(-a, b, &ProfileThresholds { balanced_tsdb: t });
        prop_assert_eq!(neg == Profile::Critical, b < t);
        Ok(())
    })?;
    Ok(format!("5 fixtures, rule order over {CASES} perturbed thresholds"))
}

fn c7_dynamics() -> Outcome {
    let point = |doc: &str, author: &str, date: &str, a: f64, b: f64| {
        let m = engine_point(a, b);
        DatedScore {
            doc_id: doc.into(),
            author: author.into(),
            date: date.parse::<NaiveDate>().unwrap(),
            tsda: m.tsda,
            tsdb: m.tsdb,
        }
    };
    let scores = [
        point("p1", "Pichai", "2020-01-20", -6.35, 0.43),
        point("p2", "Pichai", "2025-02-11", 28.83, 0.18),
        point("k1", "Khosla", "2017-09-18", -0.94, 0.49),
        point("k2", "Khosla", "2024-09-20", 32.38, 0.26),
    ];
    let d = dynamics(&scores, NaiveDate::from_ymd_opt(2022, 11, 30).unwrap());
    for (author, want) in [("Pichai", 35.18), ("Khosla", 33.32)] {
        let t = d.trajectories.iter().find(|t| t.author == author).ok_or("missing trajectory")?;
        let got = t.delta_tsda.ok_or("missing delta")?;
        ensure((got - want).abs() <= 0.01, || format!("{author} delta {got:.4}, expected {want}"))?;
    }

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus");
    let corpus = Corpus::load_manifest(&dir.join("manifest.json")).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(dir.join("annotations.jsonl")).map_err(|e| e.to_string())?;
    let set = AnnotationSet::from_jsonl(&text, "1.0.0").map_err(|e| e.to_string())?;
    let p = Project::new(corpus, builtin_tsd_scheme(), set, AnalysisConfig::default());
    let metrics = p.metrics().map_err(|e| e.to_string())?;
    let trend = p.dynamics(&metrics).map_err(|e| e.to_string())?.analysis.trend;
    ensure(trend.multi_text_authors == 7 && trend.increasing == 5, || format!("{trend:?}"))?;
    ensure(trend.fraction_increasing == Some(5.0 / 7.0), || format!("fraction {:?}", trend.fraction_increasing))?;
    Ok("Pichai +35.18, Khosla +33.32, fixture corpus 5/7".into())
}

fn c8_engagement() -> Outcome {
    let pool = prop::collection::vec((1u64..5_000_000, 1usize..80), 1..25);
    let activity = |v: &[(u64, usize)]| -> Vec<AuthorActivity> {
        v.iter()
            .enumerate()
            .map(|(i, &(w, d))| AuthorActivity { author: format!("a{i}"), total_words: w, distinct_dates: d })
            .collect()
    };
    run_cases("log base", pool.clone(), |v| {
        let a = engagement_from_activity(&activity(&v), LogBase::Natural).unwrap();
        let b = engagement_from_activity(&activity(&v), LogBase::Ten).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.w_norm - y.w_norm).abs() <= 1e-12);
        }
        Ok(())
    })?;
    run_cases("monotonicity", (pool, any::<prop::sample::Index>(), 0u64..1_000_000, 0usize..5), |(v, who, dw, dd)| {
        let i = who.index(v.len());
        let mut grown = v.clone();
        grown[i].0 += dw;
        grown[i].1 += dd;
        let e0 = engagement_from_activity(&activity(&v), LogBase::Natural).unwrap()[i].e;
        let e1 = engagement_from_activity(&activity(&grown), LogBase::Natural).unwrap()[i].e;
        prop_assert!(e1 >= e0 - 1e-12);
        Ok(())
    })?;
    let single = engagement_from_activity(&activity(&[(900, 1)]), LogBase::Natural).map_err(|e| e.to_string())?;
    ensure(single[0].e == 1.0, || format!("single-author e = {}", single[0].e))?;
    Ok(format!("base invariance and monotonicity over {CASES} pools, degenerate pool e = 1"))
}

fn c9_determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus");
    let corpus = dir.join("manifest.json");
    let annotations = dir.join("annotations.jsonl");
    let (c, a) = (corpus.to_str().unwrap(), annotations.to_str().unwrap());
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;

    let mut runs = Vec::new();
    for i in 0..2 {
        let out_dir = tmp.path().join(format!("run{i}"));
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        let code = tsd_cli::run(["tsd", "metrics", "--corpus", c, "--annotations", a], &mut stdout, &mut stderr);
        ensure(code == 0, || String::from_utf8_lossy(&stderr).into_owned())?;
        let code = tsd_cli::run(
            ["tsd", "report", "--corpus", c, "--annotations", a, "--out", out_dir.to_str().unwrap()],
            &mut Vec::new(),
            &mut stderr,
        );
        ensure(code == 0, || String::from_utf8_lossy(&stderr).into_owned())?;
        let mut files = vec![("stdout".to_string(), stdout)];
        for name in ["spectrum.csv", "dynamics.csv", "metrics.csv"] {
            files.push((name.to_string(), std::fs::read(out_dir.join(name)).map_err(|e| e.to_string())?));
        }
        runs.push(files);
    }
    ensure(runs[0] == runs[1], || "outputs differ between runs".into())?;

    let mut checked = 0;
    for (name, bytes) in &runs[0][1..] {
        let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
        for line in text.lines().skip(1) {
            for cell in line.split(',') {
                let numeric = cell.parse::<f64>().is_ok() && cell.contains('.');
                if numeric {
                    let (_, frac) = cell.split_once('.').unwrap();
                    ensure(frac.len() == 2, || format!("{name}: {cell} is not 2 decimals"))?;
                    checked += 1;
                }
            }
        }
    }
    ensure(checked > 0, || "no numeric CSV cells found".into())?;
    Ok(format!("2 runs byte-identical, {checked} CSV values at 2 decimals"))
}
