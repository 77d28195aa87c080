use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use daleq_core::archive_report::{
    compare_archives, render_report, write_class_artifacts, ArchiveOptions, ExternalCommand,
};
use daleq_core::classfile::parse_class;
use daleq_core::equivalence::{classify_diff, Checker, Pattern, Status, DIFF_FILE};
use daleq_core::extractor::{extract_edb, serialize_database, ExtractionConfig};
use daleq_core::rules_library::{NormalizerOptions, SoundnessMode};

#[derive(Parser)]
#[command(name = "daleq", version, about = "Equivalence checking for JVM class files")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct RuleArgs {
    /// Leave out rules that are only soundy.
    #[arg(long)]
    sound_only: bool,
    /// Additional rule directory, merged after the built-in rules.
    #[arg(long = "rules", value_name = "DIR")]
    rules: Vec<PathBuf>,
    /// Distance between consecutive instruction counters.
    #[arg(long, default_value_t = 1, value_name = "N")]
    stride: i64,
    /// Write the merged program and EDB listings next to the results.
    #[arg(long)]
    dump_merged: bool,
}

impl RuleArgs {
    fn mode(&self) -> SoundnessMode {
        if self.sound_only {
            SoundnessMode::SoundOnly
        } else {
            SoundnessMode::WithSoundy
        }
    }

    fn config(&self) -> ExtractionConfig {
        ExtractionConfig { counter_stride: self.stride, ..Default::default() }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare two jars and write an HTML report.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Source jars for a and b.
        #[arg(long, num_args = 2, value_names = ["A_SRC", "B_SRC"])]
        sources: Option<Vec<PathBuf>>,
        #[command(flatten)]
        rules: RuleArgs,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Keep timestamps out of the report.
        #[arg(long)]
        deterministic: bool,
        /// Extra analyzer as NAME[:SUFFIX,..]=COMMAND; the command gets both
        /// files as its last two arguments.
        #[arg(long = "external", value_name = "SPEC")]
        external: Vec<String>,
    },
    /// Compare two class files.
    Class {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Write the EDB of a class file as fact files.
    Extract {
        class: PathBuf,
        #[arg(long)]
        edb: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: i64,
    },
    /// Tally the non-equivalence patterns of all diffs below a results directory.
    Patterns { results: PathBuf },
}

fn parse_external(spec: &str) -> Result<ExternalCommand> {
    let Some((head, command)) = spec.split_once('=') else { bail!("expected NAME[:SUFFIX,..]=COMMAND, got {spec:?}") };
    let (name, suffixes) = match head.split_once(':') {
        Some((n, s)) => (n, s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect()),
        None => (head, Vec::new()),
    };
    let mut words = command.split_whitespace().map(str::to_string);
    let Some(program) = words.next() else { bail!("empty command in {spec:?}") };
    Ok(ExternalCommand { name: name.to_string(), program, args: words.collect(), suffixes })
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn compare(
    a: &Path,
    b: &Path,
    out: &Path,
    sources: Option<Vec<PathBuf>>,
    rules: &RuleArgs,
    workers: usize,
    deterministic: bool,
    external: &[String],
) -> Result<u8> {
    let options = ArchiveOptions {
        mode: rules.mode(),
        config: rules.config(),
        sources: sources.map(|s| (s[0].clone(), s[1].clone())),
        out: Some(out.to_path_buf()),
        extra_rules: rules.rules.clone(),
        workers,
        deterministic,
        dump_merged: rules.dump_merged,
        external: external.iter().map(|s| parse_external(s)).collect::<Result<_>>()?,
    };
    let report = compare_archives(a, b, &options)?;
    render_report(&report, out)?;
    println!("{} entries", report.rows.len());
    for (col, counts) in report.columns.iter().zip(report.summary()) {
        let parts: Vec<String> = counts.iter().map(|(s, n)| format!("{} {n}", s.name())).collect();
        println!("{col:<18} {}", parts.join("  "));
    }
    println!("report: {}", out.join("index.html").display());
    Ok(report.exit_code() as u8)
}

fn class(a: &Path, b: &Path, out: Option<&Path>, rules: &RuleArgs) -> Result<u8> {
    let (x, y) = (read(a)?, read(b)?);
    let options = NormalizerOptions { mode: rules.mode(), extra_roots: rules.rules.clone(), ..Default::default() };
    let checker = Checker::with_options(&options, rules.config())?;
    let v = checker.check(&x, &y);
    if let Some(out) = out {
        write_class_artifacts(&out.join("daleq"), &v, rules.dump_merged)?;
        if rules.dump_merged {
            std::fs::write(out.join("merged.rules"), checker.normalizer().rules().render())?;
        }
    }
    println!("{}", v.status.name());
    match v.status {
        Status::Equivalent => {
            for d in &v.derivations {
                println!("{}\t{}\t{}", d.side.name(), d.fact.predicate, d.tree);
            }
            Ok(0)
        }
        Status::NotEquivalent => {
            print!("{}", v.diff.as_deref().unwrap_or(""));
            Ok(1)
        }
        Status::Error => {
            eprintln!("{}", v.error.as_deref().unwrap_or(""));
            Ok(2)
        }
    }
}

fn extract(class: &Path, edb: &Path, stride: i64) -> Result<u8> {
    let model = parse_class(&read(class)?).with_context(|| class.display().to_string())?;
    let db = extract_edb(&model, &ExtractionConfig { counter_stride: stride, ..Default::default() })?;
    let files = serialize_database(&db, edb)?;
    println!("{} facts in {} files", db.len(), files.len());
    Ok(0)
}

fn find_diffs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> =
        std::fs::read_dir(dir).with_context(|| dir.display().to_string())?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if e.file_type()?.is_dir() {
            find_diffs(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == DIFF_FILE) {
            out.push(p);
        }
    }
    Ok(())
}

fn patterns(results: &Path) -> Result<u8> {
    let mut files = Vec::new();
    find_diffs(results, &mut files)?;
    let mut counts: BTreeMap<Pattern, usize> = Pattern::ALL.iter().map(|p| (*p, 0)).collect();
    let (mut total, mut multiple, mut unclassified) = (0usize, 0usize, 0usize);
    for f in &files {
        let text = std::fs::read_to_string(f).with_context(|| f.display().to_string())?;
        if text.trim().is_empty() {
            continue;
        }
        total += 1;
        let set = classify_diff(&text);
        if set.is_empty() {
            unclassified += 1;
        }
        if set.multiple() {
            multiple += 1;
        } else {
            for p in &set.patterns {
                *counts.get_mut(p).expect("all") += 1;
            }
        }
    }
    let pct = |n: usize| if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
    println!("{:<14} {:>6} {:>8}", "pattern", "count", "percent");
    for (p, n) in &counts {
        println!("{:<14} {n:>6} {:>7.2}%", p.name(), pct(*n));
    }
    println!("{:<14} {multiple:>6} {:>7.2}%", "MULTIPLE", pct(multiple));
    println!("{:<14} {unclassified:>6} {:>7.2}%", "unclassified", pct(unclassified));
    println!("{:<14} {total:>6}", "total");
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Cmd::Compare { a, b, out, sources, rules, workers, deterministic, external } => {
            compare(&a, &b, &out, sources, &rules, workers, deterministic, &external)
        }
        Cmd::Class { a, b, out, rules } => class(&a, &b, out.as_deref(), &rules),
        Cmd::Extract { class: c, edb, stride } => extract(&c, &edb, stride),
        Cmd::Patterns { results } => patterns(&results),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
