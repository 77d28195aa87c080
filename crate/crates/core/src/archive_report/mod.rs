//! Jar against jar: per-entry analyzers, artifacts and the HTML report.

pub mod disasm;
mod html;
mod sources;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use html::render_report;
pub use sources::{compare_sources, tokenize, SourceComparison};

use crate::equivalence::{Checker, DerivationTree, Side, Status, Verdict, DIFF_FILE, PROJECTION_FILE, TIMING_FILE};
use crate::extractor::{serialize_database, ExtractionConfig, Fact, FactDatabase, Term};
use crate::rulelang::RuleError;
use crate::rules_library::{NormalizerOptions, SoundnessMode};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a readable archive: {message}")]
    BadArchive { path: PathBuf, message: String },
    #[error(transparent)]
    Rules(#[from] RuleError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellStatus {
    Pass,
    Fail,
    Na,
    Error,
}

impl CellStatus {
    pub const ALL: [CellStatus; 4] = [CellStatus::Pass, CellStatus::Fail, CellStatus::Na, CellStatus::Error];

    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Pass => "PASS",
            CellStatus::Fail => "FAIL",
            CellStatus::Na => "N/A",
            CellStatus::Error => "ERROR",
        }
    }
}

/// A derived fact with the EDB facts at the leaves of its derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationView {
    pub side: Side,
    pub fact: String,
    pub tree: DerivationTree,
    pub premises: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Detail {
    Diff(String),
    Log(String),
    Derivations(Vec<DerivationView>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerResult {
    pub status: CellStatus,
    pub detail: Option<Detail>,
}

impl AnalyzerResult {
    pub fn pass() -> Self {
        AnalyzerResult { status: CellStatus::Pass, detail: None }
    }

    pub fn na() -> Self {
        AnalyzerResult { status: CellStatus::Na, detail: None }
    }

    pub fn fail(detail: Detail) -> Self {
        AnalyzerResult { status: CellStatus::Fail, detail: Some(detail) }
    }

    pub fn error(log: impl Into<String>) -> Self {
        AnalyzerResult { status: CellStatus::Error, detail: Some(Detail::Log(log.into())) }
    }
}

/// One row's inputs. Sources are the matching source files, if any.
#[derive(Debug, Clone, Copy)]
pub struct Entry<'a> {
    pub name: &'a str,
    pub a: Option<&'a [u8]>,
    pub b: Option<&'a [u8]>,
    pub source_a: Option<&'a [u8]>,
    pub source_b: Option<&'a [u8]>,
}

impl Entry<'_> {
    pub fn both(&self) -> Option<(&[u8], &[u8])> {
        Some((self.a?, self.b?))
    }

    pub fn is_class(&self) -> bool {
        self.name.ends_with(".class")
    }
}

pub struct Context {
    pub checker: Checker,
    /// Where per-class artifacts go; none are written without it.
    pub out: Option<PathBuf>,
    pub dump_merged: bool,
}

pub trait Analyzer: Send + Sync {
    fn name(&self) -> &str;
    /// Entries outside this analyzer's scope get N/A.
    fn applies(&self, entry: &Entry) -> bool;
    fn analyze(&self, entry: &Entry, ctx: &Context) -> Result<AnalyzerResult, String>;
}

pub fn run_analyzer(analyzer: &dyn Analyzer, entry: &Entry, ctx: &Context) -> AnalyzerResult {
    if !analyzer.applies(entry) {
        return AnalyzerResult::na();
    }
    let r = match catch_unwind(AssertUnwindSafe(|| analyzer.analyze(entry, ctx))) {
        Ok(Ok(r)) => r,
        Ok(Err(log)) => AnalyzerResult::error(log),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "analyzer panicked".into());
            AnalyzerResult::error(format!("{} panicked: {msg}", analyzer.name()))
        }
    };
    match r.status {
        CellStatus::Fail | CellStatus::Error if r.detail.is_none() => {
            AnalyzerResult { detail: Some(Detail::Log(format!("{} gave no details", analyzer.name()))), ..r }
        }
        _ => r,
    }
}

pub struct Presence;

impl Analyzer for Presence {
    fn name(&self) -> &str {
        "presence"
    }

    fn applies(&self, _: &Entry) -> bool {
        true
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        Ok(match (e.a, e.b) {
            (Some(_), Some(_)) => AnalyzerResult::pass(),
            (Some(_), None) => AnalyzerResult::fail(Detail::Log(format!("{} is only present in a", e.name))),
            _ => AnalyzerResult::fail(Detail::Log(format!("{} is only present in b", e.name))),
        })
    }
}

fn text_or_summary(name: &str, a: &[u8], b: &[u8]) -> Detail {
    match (std::str::from_utf8(a), std::str::from_utf8(b)) {
        (Ok(x), Ok(y)) => Detail::Diff(unified_diff_named(name, x, y)),
        _ => Detail::Log(format!("binary contents differ: {} bytes in a, {} bytes in b", a.len(), b.len())),
    }
}

fn unified_diff_named(name: &str, a: &str, b: &str) -> String {
    similar::TextDiff::from_lines(a, b)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{name}"), &format!("b/{name}"))
        .to_string()
}

pub struct Bitwise;

impl Analyzer for Bitwise {
    fn name(&self) -> &str {
        "bitwise"
    }

    fn applies(&self, e: &Entry) -> bool {
        e.both().is_some()
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        let (a, b) = e.both().expect("applies");
        Ok(if a == b { AnalyzerResult::pass() } else { AnalyzerResult::fail(text_or_summary(e.name, a, b)) })
    }
}

pub struct SourceEqual;
pub struct SourceEquivalent;

impl Analyzer for SourceEqual {
    fn name(&self) -> &str {
        "source-equal"
    }

    fn applies(&self, e: &Entry) -> bool {
        e.source_a.is_some() && e.source_b.is_some()
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        let (a, b) = (e.source_a.expect("applies"), e.source_b.expect("applies"));
        Ok(if a == b { AnalyzerResult::pass() } else { AnalyzerResult::fail(text_or_summary(e.name, a, b)) })
    }
}

impl Analyzer for SourceEquivalent {
    fn name(&self) -> &str {
        "source-equivalent"
    }

    fn applies(&self, e: &Entry) -> bool {
        e.source_a.is_some() && e.source_b.is_some()
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        Ok(match compare_sources(e.source_a.expect("applies"), e.source_b.expect("applies")) {
            SourceComparison::Equal | SourceComparison::Equivalent => AnalyzerResult::pass(),
            SourceComparison::Different(d) => AnalyzerResult::fail(Detail::Diff(d)),
        })
    }
}

pub struct Disasm;

impl Analyzer for Disasm {
    fn name(&self) -> &str {
        "disasm"
    }

    fn applies(&self, e: &Entry) -> bool {
        e.is_class() && e.both().is_some()
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        let (a, b) = e.both().expect("applies");
        if a == b {
            return Ok(AnalyzerResult::pass());
        }
        let x = disasm::disassemble(a).map_err(|m| format!("side a: {m}"))?;
        let y = disasm::disassemble(b).map_err(|m| format!("side b: {m}"))?;
        Ok(if x == y {
            AnalyzerResult::pass()
        } else {
            AnalyzerResult::fail(Detail::Diff(unified_diff_named(e.name, &x, &y)))
        })
    }
}

pub struct Daleq;

/// `p/A$B.class` becomes `p.A$B`.
pub fn class_dir_name(entry: &str) -> String {
    entry.strip_suffix(".class").unwrap_or(entry).replace('/', ".")
}

fn fact_text(f: &Fact) -> String {
    let args: Vec<String> = f
        .terms
        .iter()
        .map(|t| match t {
            Term::Sym(s) => format!("{s:?}"),
            Term::Num(n) => n.to_string(),
        })
        .collect();
    format!("{}({})", f.predicate, args.join(", "))
}

/// Derivations of a verdict with their premise facts resolved.
pub fn derivation_views(v: &Verdict) -> Vec<DerivationView> {
    let Some(analyses) = &v.analyses else { return Vec::new() };
    let index: [HashMap<&str, &Fact>; 2] = [0, 1].map(|i| analyses[i].edb.iter().map(|f| (f.id.as_str(), f)).collect());
    v.derivations
        .iter()
        .map(|d| {
            let idx = &index[usize::from(d.side == Side::B)];
            let premises = d
                .tree
                .leaves()
                .into_iter()
                .map(|id| (id.to_string(), idx.get(id).map(|f| fact_text(f)).unwrap_or_default()))
                .collect();
            DerivationView { side: d.side, fact: fact_text(&d.fact), tree: d.tree.clone(), premises }
        })
        .collect()
}

fn zip_database(db: &FactDatabase, path: &Path) -> Result<(), ReportError> {
    let tmp = tempfile::tempdir().map_err(io_err(path))?;
    let files = serialize_database(db, tmp.path())
        .map_err(|e| ReportError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) })?;
    let zerr =
        |e: zip::result::ZipError| ReportError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) };
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut zip = zip::ZipWriter::new(file);
    let opts = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for f in files {
        let name = f.file_name().expect("file").to_string_lossy().into_owned();
        zip.start_file(name, opts).map_err(zerr)?;
        zip.write_all(&std::fs::read(&f).map_err(io_err(&f))?).map_err(io_err(path))?;
    }
    zip.finish().map_err(zerr)?;
    Ok(())
}

/// Writes `daleq-diff.txt` and, per side, the projection, the timing and the
/// zipped EDB and IDB into `dir`. With `dump_merged` the EDB is also written
/// as text.
pub fn write_class_artifacts(dir: &Path, v: &Verdict, dump_merged: bool) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let diff = dir.join(DIFF_FILE);
    std::fs::write(&diff, v.diff.as_deref().unwrap_or("")).map_err(io_err(&diff))?;
    let Some(analyses) = &v.analyses else { return Ok(()) };
    for (side, an) in [Side::A, Side::B].into_iter().zip(analyses.iter()) {
        let sd = dir.join(side.name());
        std::fs::create_dir_all(&sd).map_err(io_err(&sd))?;
        let p = sd.join(PROJECTION_FILE);
        std::fs::write(&p, &an.projection).map_err(io_err(&p))?;
        let p = sd.join(TIMING_FILE);
        std::fs::write(&p, format!("{}\n", an.times.total().as_millis())).map_err(io_err(&p))?;
        zip_database(&an.edb, &sd.join("edb.zip"))?;
        zip_database(&an.idb, &sd.join("idb.zip"))?;
        if dump_merged {
            let p = sd.join("edb.txt");
            std::fs::write(&p, disasm::listing(&an.edb)).map_err(io_err(&p))?;
        }
    }
    Ok(())
}

/// Maps a verdict onto a report cell.
pub fn verdict_cell(v: &Verdict) -> AnalyzerResult {
    match v.status {
        Status::Equivalent => {
            let views = derivation_views(v);
            AnalyzerResult {
                status: CellStatus::Pass,
                detail: if views.is_empty() { None } else { Some(Detail::Derivations(views)) },
            }
        }
        Status::NotEquivalent => AnalyzerResult::fail(Detail::Diff(v.diff.clone().unwrap_or_default())),
        Status::Error => AnalyzerResult::error(v.error.clone().unwrap_or_default()),
    }
}

impl Analyzer for Daleq {
    fn name(&self) -> &str {
        "daleq"
    }

    fn applies(&self, e: &Entry) -> bool {
        e.is_class() && e.both().is_some()
    }

    fn analyze(&self, e: &Entry, ctx: &Context) -> Result<AnalyzerResult, String> {
        let (a, b) = e.both().expect("applies");
        if a == b {
            return Ok(AnalyzerResult::pass());
        }
        let v = ctx.checker.check(a, b);
        if let Some(out) = &ctx.out {
            write_class_artifacts(&out.join(class_dir_name(e.name)).join("daleq"), &v, ctx.dump_merged)
                .map_err(|e| e.to_string())?;
        }
        Ok(verdict_cell(&v))
    }
}

/// Runs `program args.. <file a> <file b>` per entry pair; exit code 0 is
/// PASS, 1 is FAIL and anything else ERROR.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    pub name: String,
    pub program: String,
    pub args: Vec<String>,
    /// Entry name suffixes in scope; empty means all.
    pub suffixes: Vec<String>,
}

impl Analyzer for ExternalCommand {
    fn name(&self) -> &str {
        &self.name
    }

    fn applies(&self, e: &Entry) -> bool {
        e.both().is_some() && (self.suffixes.is_empty() || self.suffixes.iter().any(|s| e.name.ends_with(s.as_str())))
    }

    fn analyze(&self, e: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
        let (a, b) = e.both().expect("applies");
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let base = e.name.rsplit('/').next().unwrap_or("entry");
        let mut files = Vec::new();
        for (side, bytes) in [("a", a), ("b", b)] {
            let d = tmp.path().join(side);
            std::fs::create_dir_all(&d).map_err(|e| e.to_string())?;
            let f = d.join(base);
            std::fs::write(&f, bytes).map_err(|e| e.to_string())?;
            files.push(f);
        }
        let out = Command::new(&self.program)
            .args(&self.args)
            .args(&files)
            .output()
            .map_err(|err| format!("cannot run {}: {err}", self.program))?;
        let log = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
        Ok(match out.status.code() {
            Some(0) => AnalyzerResult::pass(),
            Some(1) => AnalyzerResult::fail(Detail::Log(log)),
            c => AnalyzerResult::error(format!("{} exited with {c:?}\n{log}", self.program)),
        })
    }
}

pub fn default_analyzers() -> Vec<Box<dyn Analyzer>> {
    vec![
        Box::new(Presence),
        Box::new(Bitwise),
        Box::new(SourceEqual),
        Box::new(SourceEquivalent),
        Box::new(Disasm),
        Box::new(Daleq),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub input_a: String,
    pub input_b: String,
    pub mode: String,
    pub tool_version: String,
    pub started: String,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub entry: String,
    pub cells: Vec<AnalyzerResult>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

impl Report {
    /// Per column, the count of each status.
    pub fn summary(&self) -> Vec<BTreeMap<CellStatus, usize>> {
        (0..self.columns.len())
            .map(|c| {
                let mut m: BTreeMap<CellStatus, usize> = CellStatus::ALL.iter().map(|s| (*s, 0)).collect();
                for r in &self.rows {
                    *m.get_mut(&r.cells[c].status).expect("all") += 1;
                }
                m
            })
            .collect()
    }

    /// 0 if every cell passed or is N/A, 2 if any errored, else 1 if any failed.
    pub fn exit_code(&self) -> i32 {
        let all = self.rows.iter().flat_map(|r| &r.cells);
        let (mut fail, mut error) = (false, false);
        for c in all {
            fail |= c.status == CellStatus::Fail;
            error |= c.status == CellStatus::Error;
        }
        if error {
            2
        } else if fail {
            1
        } else {
            0
        }
    }

    pub fn cell(&self, entry: &str, column: &str) -> Option<&AnalyzerResult> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|r| r.entry == entry).map(|r| &r.cells[c])
    }
}

#[derive(Debug, Clone, Default)]
pub struct ArchiveOptions {
    pub mode: SoundnessMode,
    pub config: ExtractionConfig,
    pub sources: Option<(PathBuf, PathBuf)>,
    pub out: Option<PathBuf>,
    pub extra_rules: Vec<PathBuf>,
    /// 0 lets the thread pool decide.
    pub workers: usize,
    /// Keeps wall-clock data out of the report.
    pub deterministic: bool,
    pub dump_merged: bool,
    pub external: Vec<ExternalCommand>,
}

/// File entries of a zip archive; directories are skipped and nested
/// archives stay opaque.
pub fn read_archive(path: &Path) -> Result<BTreeMap<String, Vec<u8>>, ReportError> {
    let bad = |e: zip::result::ZipError| ReportError::BadArchive { path: path.to_path_buf(), message: e.to_string() };
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut zip = zip::ZipArchive::new(file).map_err(bad)?;
    let mut out = BTreeMap::new();
    for i in 0..zip.len() {
        let mut f = zip.by_index(i).map_err(bad)?;
        if f.is_dir() {
            continue;
        }
        let mut data = Vec::new();
        f.read_to_end(&mut data)
            .map_err(|e| ReportError::BadArchive { path: path.to_path_buf(), message: e.to_string() })?;
        out.insert(f.name().to_string(), data);
    }
    Ok(out)
}

/// Source file for an entry: `p/A$1.class` maps to `p/A.java`, source
/// entries map to themselves.
pub fn source_name(entry: &str) -> Option<String> {
    if let Some(stem) = entry.strip_suffix(".class") {
        let (dir, file) = stem.rsplit_once('/').map_or(("", stem), |(d, f)| (d, f));
        let top = file.split('$').next().unwrap_or(file);
        return Some(if dir.is_empty() { format!("{top}.java") } else { format!("{dir}/{top}.java") });
    }
    [".java", ".kt", ".scala", ".groovy"].iter().any(|s| entry.ends_with(s)).then(|| entry.to_string())
}

pub fn compare_archives(a: &Path, b: &Path, options: &ArchiveOptions) -> Result<Report, ReportError> {
    compare_archives_with(a, b, options, default_analyzers())
}

pub fn compare_archives_with(
    a: &Path,
    b: &Path,
    options: &ArchiveOptions,
    mut analyzers: Vec<Box<dyn Analyzer>>,
) -> Result<Report, ReportError> {
    let clock = Instant::now();
    let started = if options.deterministic {
        "-".to_string()
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs().to_string()).unwrap_or_default()
    };
    let (ea, eb) = (read_archive(a)?, read_archive(b)?);
    let sources = match &options.sources {
        Some((x, y)) => Some((read_archive(x)?, read_archive(y)?)),
        None => None,
    };
    let normalizer =
        NormalizerOptions { mode: options.mode, extra_roots: options.extra_rules.clone(), ..Default::default() };
    let checker = Checker::with_options(&normalizer, options.config.clone())?;
    if let Some(out) = &options.out {
        std::fs::create_dir_all(out).map_err(io_err(out))?;
        if options.dump_merged {
            let p = out.join("merged.rules");
            std::fs::write(&p, checker.normalizer().rules().render()).map_err(io_err(&p))?;
        }
    }
    let ctx = Context { checker, out: options.out.clone(), dump_merged: options.dump_merged };
    for e in &options.external {
        analyzers.push(Box::new(e.clone()));
    }
    let names: Vec<&String> = ea.keys().chain(eb.keys()).collect::<BTreeSet<_>>().into_iter().collect();

    fn get<'m>(m: &'m BTreeMap<String, Vec<u8>>, k: &str) -> Option<&'m [u8]> {
        m.get(k).map(Vec::as_slice)
    }
    let row = |name: &&String| -> Row {
        let (src_a, src_b) = match (source_name(name), &sources) {
            (Some(s), _) if s == **name => (get(&ea, &s), get(&eb, &s)),
            (Some(s), Some((sa, sb))) => (get(sa, &s), get(sb, &s)),
            _ => (None, None),
        };
        let entry = Entry {
            name,
            a: ea.get(*name).map(Vec::as_slice),
            b: eb.get(*name).map(Vec::as_slice),
            source_a: src_a,
            source_b: src_b,
        };
        let mut cells = Vec::with_capacity(analyzers.len());
        for an in &analyzers {
            let present = cells.first().is_none_or(|c: &AnalyzerResult| c.status == CellStatus::Pass);
            cells.push(if present { run_analyzer(an.as_ref(), &entry, &ctx) } else { AnalyzerResult::na() });
        }
        Row { entry: name.to_string(), cells }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if options.workers > 0 {
        pool = pool.num_threads(options.workers);
    }
    let pool = pool.build().map_err(|e| ReportError::Io { path: a.to_path_buf(), source: std::io::Error::other(e) })?;
    let rows: Vec<Row> = pool.install(|| names.par_iter().map(row).collect());

    Ok(Report {
        columns: analyzers.iter().map(|a| a.name().to_string()).collect(),
        rows,
        metadata: Metadata {
            input_a: a.display().to_string(),
            input_b: b.display().to_string(),
            mode: options.mode.name().to_string(),
            tool_version: TOOL_VERSION.to_string(),
            started,
            wall_clock_ms: if options.deterministic { 0 } else { clock.elapsed().as_millis() },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_names() {
        assert_eq!(source_name("p/A$1.class").as_deref(), Some("p/A.java"));
        assert_eq!(source_name("A.class").as_deref(), Some("A.java"));
        assert_eq!(source_name("p/A.java").as_deref(), Some("p/A.java"));
        assert_eq!(source_name("META-INF/MANIFEST.MF"), None);
    }

    #[test]
    fn class_dirs() {
        assert_eq!(class_dir_name("p/q/A$B.class"), "p.q.A$B");
    }

    struct Boom;

    impl Analyzer for Boom {
        fn name(&self) -> &str {
            "boom"
        }
        fn applies(&self, e: &Entry) -> bool {
            e.is_class()
        }
        fn analyze(&self, _: &Entry, _: &Context) -> Result<AnalyzerResult, String> {
            panic!("corrupt")
        }
    }

    fn ctx() -> Context {
        Context {
            checker: Checker::new(SoundnessMode::SoundOnly, Default::default()).unwrap(),
            out: None,
            dump_merged: false,
        }
    }

    #[test]
    fn run_analyzer_states() {
        let ctx = ctx();
        let props = Entry { name: "x.properties", a: Some(b"a=1"), b: Some(b"a=1"), source_a: None, source_b: None };
        assert_eq!(run_analyzer(&Daleq, &props, &ctx).status, CellStatus::Na);
        assert_eq!(run_analyzer(&Bitwise, &props, &ctx).status, CellStatus::Pass);
        let bad = Entry { name: "p/A.class", a: Some(b"\xca\xfe"), b: Some(b"junk"), source_a: None, source_b: None };
        let r = run_analyzer(&Daleq, &bad, &ctx);
        assert_eq!(r.status, CellStatus::Error);
        assert!(matches!(r.detail, Some(Detail::Log(_))));
        let r = run_analyzer(&Boom, &bad, &ctx);
        assert_eq!(r.status, CellStatus::Error);
        assert_eq!(r.detail, Some(Detail::Log("boom panicked: corrupt".into())));
    }
}
