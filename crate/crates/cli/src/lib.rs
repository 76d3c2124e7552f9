//! The `tsd` command line. [`run`] takes the argument list and output
//! streams so it can be driven from tests; `main` only wires it to the
//! process.

mod load;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tsd_core::analysis::{BtoThresholds, Profile, ProfileThresholds};
use tsd_core::corpus::{
    engagement_scores, select_author_texts, Document, Eligibility, ENGAGEMENT_THRESHOLD,
    TEXTS_PER_AUTHOR,
};
use tsd_core::report::{self, round2, Format, MetricsTable};
use tsd_core::{AnalysisConfig, Project, Tsdb, View};

#[derive(Debug, Parser)]
#[command(name = "tsd", version, about = "Code a corpus, measure adherence and balance, export chart data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a corpus manifest and show documents, engagement and text selection.
    Ingest(IngestArgs),
    /// Validate annotation files and merge them into an annotation set.
    AnnotateImport(ImportArgs),
    /// Per-document TSDA and TSDB.
    Metrics(MetricsArgs),
    /// Corpus statistics, profiles, patterns and dynamics.
    Analyze(AnalyzeArgs),
    /// Write the spectrum, dynamics and metrics datasets.
    Report(ReportArgs),
    /// Run the local HTTP API.
    Serve(ServeArgs),
    /// Print the active coding scheme.
    Scheme(SchemeArgs),
}

#[derive(Debug, Args)]
struct Inputs {
    /// Corpus manifest (JSON).
    #[arg(long)]
    corpus: PathBuf,
    /// Annotation file (JSON Lines).
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Coding scheme file; the built-in scheme when omitted.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Count only this annotator's codes (repeatable).
    #[arg(long = "annotator", value_name = "NAME")]
    annotators: Vec<String>,
}

#[derive(Debug, Args)]
struct Settings {
    /// TSDB at or above which a text is balanced.
    #[arg(long, default_value_t = 0.4)]
    balanced_tsdb: f64,
    /// Minimum CT-UF + CT-MP per 1,000 words for benign techno-optimism.
    #[arg(long, default_value_t = 2.0)]
    optimism_threshold: f64,
    /// Minimum ADD-SN per 1,000 words counting as a counterweight.
    #[arg(long, default_value_t = 1.0)]
    counter_threshold: f64,
    /// Polarization split date; texts on this date fall in the earlier period.
    #[arg(long, default_value = "2022-11-30")]
    cut_date: NaiveDate,
    /// Event markers for the dynamics dataset (JSON list of {date, label}).
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Drop texts shorter than this many words.
    #[arg(long)]
    min_words: Option<usize>,
    #[arg(long, default_value_t = TEXTS_PER_AUTHOR)]
    texts_per_author: usize,
}

#[derive(Debug, Args)]
struct ImportArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Annotation set to merge into; created when missing.
    #[arg(long)]
    annotations: PathBuf,
    /// Files to import.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricsFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value = "table")]
    format: MetricsFormat,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ViewArg {
    Spectrum,
    Dynamics,
    Patterns,
    Stats,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> View {
        match v {
            ViewArg::Spectrum => View::Spectrum,
            ViewArg::Dynamics => View::Dynamics,
            ViewArg::Patterns => View::Patterns,
            ViewArg::Stats => View::Stats,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    settings: Settings,
    /// Emit one view as JSON, as served by the HTTP API at revision 0.
    #[arg(long, value_enum)]
    view: Option<ViewArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    settings: Settings,
    /// Output directory; created when missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    settings: Settings,
    #[arg(long, default_value_t = tsd_service::DEFAULT_PORT)]
    port: u16,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(long)]
    scheme: Option<PathBuf>,
}

/// Runs the command line and returns the exit code: 0 on success, 1 on a
/// data or I/O error, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::AnnotateImport(a) => annotate_import(a, out),
        Command::Metrics(a) => metrics(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Report(a) => report(a, out),
        Command::Serve(a) => serve(a, out),
        Command::Scheme(a) => {
            let scheme = load::scheme(a.scheme.as_deref())?;
            out.write_all(scheme.to_json().as_bytes())?;
            Ok(())
        }
    }
}

fn project(inputs: &Inputs, settings: Option<&Settings>) -> Result<Project> {
    let corpus = load::corpus(&inputs.corpus)?;
    let scheme = load::scheme(inputs.scheme.as_deref())?;
    let annotations = load::annotations(inputs.annotations.as_deref(), &corpus, &scheme)?;
    let mut config = AnalysisConfig::default();
    if !inputs.annotators.is_empty() {
        config.annotators = Some(inputs.annotators.iter().cloned().collect());
    }
    if let Some(s) = settings {
        config.profile = ProfileThresholds {
            balanced_tsdb: s.balanced_tsdb,
        };
        config.bto = BtoThresholds {
            optimism: s.optimism_threshold,
            counter: s.counter_threshold,
        };
        config.cut_date = s.cut_date;
        config.events = load::events(s.events.as_deref())?;
    }
    Ok(Project::new(corpus, scheme, annotations, config))
}

/// Writes to `path` when given, otherwise to standard output.
fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => report::write_file(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn tsdb_text(t: Tsdb) -> String {
    t.value().map_or_else(|| "undefined".to_string(), round2)
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load::corpus(&a.corpus)?;
    let mut rule = Eligibility::default();
    if let Some(n) = a.min_words {
        rule = rule.with_min_words(n);
    }
    writeln!(out, "{} documents, {} authors", corpus.len(), corpus.by_author().len())?;
    writeln!(out, "{:<32} {:<20} {:<10} {:<12} {:<12} {:>6}", "id", "author", "date", "type", "topic", "words")?;
    for d in corpus.documents() {
        writeln!(
            out,
            "{:<32} {:<20} {:<10} {:<12} {:<12} {:>6}{}",
            d.id,
            d.author,
            d.date,
            enum_text(&d.text_type),
            enum_text(&d.topic),
            d.word_count,
            if rule.admits(d) { "" } else { "  (ineligible)" }
        )?;
    }

    let pool: Vec<(String, Vec<&Document>)> = corpus
        .by_author()
        .into_iter()
        .map(|(author, docs)| (author.to_string(), docs.into_iter().filter(|d| rule.admits(d)).collect::<Vec<_>>()))
        .filter(|(_, docs)| !docs.is_empty())
        .collect();
    if pool.is_empty() {
        writeln!(out, "\nno eligible documents")?;
        return Ok(());
    }
    writeln!(out, "\nengagement (kept when E > {ENGAGEMENT_THRESHOLD:.2})")?;
    let scores = engagement_scores(&pool)?;
    for s in &scores {
        let kept = if s.e > ENGAGEMENT_THRESHOLD { "kept" } else { "dropped" };
        writeln!(out, "  {s} {kept}")?;
    }

    writeln!(out, "\nselection ({} per author)", a.texts_per_author)?;
    for ((author, docs), s) in pool.iter().zip(&scores) {
        if s.e <= ENGAGEMENT_THRESHOLD {
            continue;
        }
        let owned: Vec<Document> = docs.iter().map(|d| (*d).clone()).collect();
        let sel = select_author_texts(&owned, a.texts_per_author);
        let ids: Vec<&str> = sel.documents.iter().map(|d| d.id.as_str()).collect();
        let short = if sel.short { " (short)" } else { "" };
        writeln!(out, "  {author}: {}{short}", ids.join(", "))?;
    }
    Ok(())
}

fn enum_text<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn annotate_import(a: ImportArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = load::corpus(&a.corpus)?;
    let scheme = load::scheme(a.scheme.as_deref())?;
    let mut set = if a.annotations.exists() {
        load::annotations(Some(&a.annotations), &corpus, &scheme)?
    } else {
        tsd_core::AnnotationSet::new(scheme.version.clone())
    };
    let before = set.len();
    let mut skipped = 0;
    for f in &a.files {
        let (_, s) = load::annotations_into(&mut set, f, &corpus, &scheme, true)?;
        skipped += s;
    }
    load::write_atomic(&a.annotations, &set.to_jsonl())?;
    writeln!(
        out,
        "imported {} annotations ({} duplicates skipped); {} now holds {}",
        set.len() - before,
        skipped,
        a.annotations.display(),
        set.len()
    )?;
    Ok(())
}

fn metrics(a: MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let p = project(&a.inputs, None)?;
    let metrics = p.metrics()?;
    let text = match a.format {
        MetricsFormat::Table => {
            let mut s = format!("{:<32} {:>8} {:>9}\n", "doc_id", "tsda", "tsdb");
            for m in &metrics {
                s.push_str(&format!("{:<32} {:>8} {:>9}\n", m.doc_id, round2(m.tsda), tsdb_text(m.tsdb)));
            }
            s
        }
        MetricsFormat::Csv => report::render(&MetricsTable::new(&p.corpus, &metrics), Format::Csv)?,
        MetricsFormat::Json => report::to_json(&metrics),
    };
    emit(out, a.out.as_deref(), &text)
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let p = project(&a.inputs, Some(&a.settings))?;
    if let Some(view) = a.view {
        let body = p.view_json(view.into(), 0)?;
        return emit(out, a.out.as_deref(), &body);
    }
    let text = summary(&p)?;
    emit(out, a.out.as_deref(), &text)
}

fn summary(p: &Project) -> Result<String> {
    use std::fmt::Write as _;
    let metrics = p.metrics()?;
    let stats = p.stats(&metrics)?;
    let patterns = p.patterns(&metrics)?;
    let dynamics = p.dynamics(&metrics)?;
    let mut s = String::new();

    let st = &stats.stats;
    writeln!(s, "documents: {} ({} with defined TSDB)", st.n, st.n_tsdb)?;
    writeln!(
        s,
        "TSDA: mean {} sd {} range [{}, {}]",
        round2(st.tsda.mean),
        round2(st.tsda.sd),
        round2(st.tsda.min),
        round2(st.tsda.max)
    )?;
    if let Some(b) = &st.tsdb {
        writeln!(s, "TSDB: mean {} sd {} range [{}, {}]", round2(b.mean), round2(b.sd), round2(b.min), round2(b.max))?;
    }
    if !st.undefined_tsdb.is_empty() {
        writeln!(s, "undefined TSDB: {}", st.undefined_tsdb.join(", "))?;
    }

    writeln!(s, "\nprofiles")?;
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for l in &stats.profiles {
        groups.entry(l.profile.as_str()).or_default().push(&l.doc_id);
    }
    for profile in [Profile::ProImbalanced, Profile::Balanced, Profile::Critical] {
        let ids = groups.remove(profile.as_str()).unwrap_or_default();
        writeln!(s, "  {:<15} {:>2}  {}", profile.as_str(), ids.len(), ids.join(", "))?;
    }

    writeln!(s, "\npatterns")?;
    let co = &patterns.co_occurrence;
    writeln!(s, "  {} with {}: {} of {} documents", co.code_a, co.code_b, co.count, st.n)?;
    let pc = &patterns.pivot_counts;
    writeln!(
        s,
        "  acknowledgment pivots: {} pivot, {} no pivot, {} without acknowledgment",
        pc.pivot, pc.no_pivot, pc.not_applicable
    )?;
    writeln!(s, "  benign techno-optimism: {}", if patterns.bto.is_empty() { "none".to_string() } else { patterns.bto.join(", ") })?;

    writeln!(s, "\ndynamics")?;
    for t in &dynamics.analysis.trajectories {
        let delta = t.delta_tsda.map_or_else(|| "n/a".to_string(), |d| format!("{:+.2}", d));
        let points: Vec<String> = t.points.iter().map(|p| format!("{} {}", p.date, round2(p.tsda))).collect();
        writeln!(s, "  {:<20} {:>7}  {}", t.author, delta, points.join(" -> "))?;
    }
    let tr = &dynamics.analysis.trend;
    if let Some(f) = tr.fraction_increasing {
        writeln!(
            s,
            "  TSDA increased for {} of {} authors ({:.0}%), {} of them less balanced",
            tr.increasing,
            tr.multi_text_authors,
            f * 100.0,
            tr.increasing_less_balanced
        )?;
    }
    let pol = &dynamics.analysis.polarization;
    for (name, period) in [("on or before", &pol.before), ("after", &pol.after)] {
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), round2);
        writeln!(
            s,
            "  {name} {}: n={} range {} sd {}",
            pol.cut_date,
            period.n,
            fmt(period.range),
            fmt(period.sd)
        )?;
    }
    Ok(s)
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let p = project(&a.inputs, Some(&a.settings))?;
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let metrics = p.metrics()?;
    let ext = format.extension();
    let files = [
        ("spectrum", report::render(&p.spectrum(&metrics)?, format)?),
        ("dynamics", report::render(&p.dynamics(&metrics)?.dataset, format)?),
        ("metrics", report::render(&MetricsTable::new(&p.corpus, &metrics), format)?),
    ];
    for (name, text) in files {
        let path = a.out.join(format!("{name}.{ext}"));
        report::write_file(&path, &text)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> Result<()> {
    let p = project(&a.inputs, Some(&a.settings))?;
    let state = Arc::new(tsd_service::AppState::new(p, a.inputs.annotations.clone()));
    let addr = tsd_service::default_addr(a.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        tsd_service::serve(listener, state).await?;
        Ok(())
    })
}
