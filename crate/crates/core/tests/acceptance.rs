//! End-to-end acceptance checks. Runs without the libtest harness and
//! prints one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use daleq_core::archive_report::{compare_archives, render_report, ArchiveOptions, CellStatus, Detail, Report};
use daleq_core::engine::evaluate;
use daleq_core::equivalence::{classify_diff, parse_derivation, Checker, DerivationTree, Pattern, Status, Verdict};
use daleq_core::extractor::ExtractionConfig;
use daleq_core::rulelang::parse_rule_source;
use daleq_core::rules_library::SoundnessMode;
use daleq_testkit::fixtures::*;
use daleq_testkit::{acc, op, write_jar, Anno, ClassBuilder, Ev, Member};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = fn(&Env) -> Outcome;
type Pages = Vec<(String, Vec<u8>)>;
type Tweak = fn(&mut Knobs);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Env {
    soundy: Checker,
    sound: Checker,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn describe(v: &Verdict) -> String {
    format!("{} {:?} {}", v.status.name(), v.error, v.diff.as_deref().unwrap_or(""))
}

fn has_rule(v: &Verdict, name: &str) -> bool {
    v.derivations.iter().any(|d| d.tree.rules().contains(&name))
}

fn projection(c: &Checker, bytes: &[u8]) -> Result<String, String> {
    c.analyze(bytes).map(|a| a.projection)
}

fn determinism(env: &Env) -> Outcome {
    let start = Instant::now();
    let classes: Vec<Vec<u8>> = corpus(&mut rng(1), 200).iter().map(ClassSpec::build).collect();
    for (i, c) in classes.iter().enumerate() {
        let first = projection(&env.soundy, c)?;
        let second = projection(&env.soundy, c)?;
        ensure!(first == second, "class {i}: projections differ between runs");
    }
    let t = start.elapsed();
    ensure!(t <= Duration::from_secs(60), "took {t:?}");
    Ok(format!("200 classes, 2 runs each, {:.1} s", t.as_secs_f64()))
}

fn laws(env: &Env) -> Outcome {
    // Groups of variants that should land in one class: a base class, a
    // decorated copy and a copy with another class file version.
    let mut r = rng(2);
    let mut groups: Vec<Vec<Vec<u8>>> = Vec::new();
    for spec in corpus(&mut r, 40) {
        let deco = decorate(&spec, &mut r);
        let mut newer = spec.clone();
        newer.class.major = 61;
        groups.push(vec![spec.build(), deco.build(), newer.build()]);
    }
    for pair in [
        version_pair(),
        nullcheck_pair(),
        checkcast_pair(),
        object_method_pair(),
        enum_values_pair(),
        anon_final_pair(),
    ] {
        groups.push(vec![pair.0, pair.1]);
    }
    let items: Vec<(usize, &Vec<u8>)> =
        groups.iter().enumerate().flat_map(|(g, v)| v.iter().map(move |c| (g, c))).collect();
    for (i, (_, c)) in items.iter().enumerate() {
        let v = env.soundy.check(c, c);
        ensure!(v.status == Status::Equivalent, "item {i} not reflexive: {}", describe(&v));
        let (x, y) = (projection(&env.soundy, c)?, projection(&env.soundy, c)?);
        ensure!(x == y, "item {i} projects differently on two runs");
    }
    let projections: Vec<String> = items.iter().map(|(_, c)| projection(&env.soundy, c)).collect::<Result<_, _>>()?;
    let eq = |a: usize, b: usize| projections[a] == projections[b];
    let (mut pairs_eq, mut chains) = (0, 0);
    for t in 0..1000 {
        let pick = if t % 2 == 0 {
            let g = r.gen_range(0..groups.len());
            let members: Vec<usize> =
                items.iter().enumerate().filter(|(_, (gi, _))| *gi == g).map(|(i, _)| i).collect();
            [*members.choose(&mut r).unwrap(), *members.choose(&mut r).unwrap(), *members.choose(&mut r).unwrap()]
        } else {
            [r.gen_range(0..items.len()), r.gen_range(0..items.len()), r.gen_range(0..items.len())]
        };
        let [x, y, z] = pick;
        ensure!(eq(x, y) == eq(y, x), "symmetry fails on {x} {y}");
        if eq(x, y) && eq(y, z) {
            chains += 1;
            ensure!(eq(x, z), "transitivity fails on {x} {y} {z}");
        }
        pairs_eq += usize::from(eq(x, y));
    }
    ensure!(chains > 100, "only {chains} transitive chains exercised");
    // Sampled pairs through the full checker, both ways round.
    for _ in 0..60 {
        let (x, y) = (r.gen_range(0..items.len()), r.gen_range(0..items.len()));
        let (a, b) = (env.soundy.check(items[x].1, items[y].1), env.soundy.check(items[y].1, items[x].1));
        ensure!(
            a.status == b.status,
            "check({x},{y}) is {} but check({y},{x}) is {}",
            a.status.name(),
            b.status.name()
        );
        ensure!(a.is_equivalent() == eq(x, y), "check disagrees with projections on {x} {y}");
    }
    Ok(format!("{} fixtures reflexive, 1000 triples ({pairs_eq} equal pairs, {chains} chains)", items.len()))
}

fn level2(env: &Env) -> Outcome {
    let mut r = rng(3);
    let specs = corpus(&mut r, 200);
    for (i, s) in specs.iter().enumerate() {
        let d = decorate(s, &mut r);
        let (a, b) = (env.soundy.analyze(&s.build())?, env.soundy.analyze(&d.build())?);
        ensure!(a.edb == b.edb, "class {i}: decorated copy has a different EDB");
    }
    Ok("200 decorated classes have identical EDBs".into())
}

fn version(env: &Env) -> Outcome {
    let (a, b) = version_pair();
    let v = env.sound.check(&a, &b);
    ensure!(v.status == Status::Equivalent, "{}", describe(&v));
    ensure!(has_rule(&v, "R_REMOVE_BYTECODE_VERSION"), "no R_REMOVE_BYTECODE_VERSION node in the derivations");
    let [x, y] = &**v.analyses.as_ref().ok_or("no analyses kept")?;
    ensure!(x.edb != y.edb, "EDBs are identical");
    Ok("EQUIVALENT, version removal in the derivation, EDBs differ".into())
}

fn nullcheck(env: &Env) -> Outcome {
    let (a, b) = nullcheck_pair();
    let v = env.sound.check(&a, &b);
    ensure!(v.status == Status::Equivalent, "bracketed pair: {}", describe(&v));
    let (a, b) = nullcheck_unbracketed_pair();
    let v = env.soundy.check(&a, &b);
    ensure!(v.status == Status::NotEquivalent, "unbracketed pair: {}", v.status.name());
    Ok("bracketed EQUIVALENT, unbracketed NOT_EQUIVALENT".into())
}

fn rewrites(env: &Env) -> Outcome {
    for (name, (a, b)) in [("checkcast", checkcast_pair()), ("object methods", object_method_pair())] {
        let v = env.sound.check(&a, &b);
        ensure!(v.status == Status::Equivalent, "{name}: {}", describe(&v));
    }
    for (name, (a, b)) in [("inlined values", enum_values_pair()), ("anonymous final", anon_final_pair())] {
        let v = env.soundy.check(&a, &b);
        ensure!(v.status == Status::Equivalent, "{name}: {}", describe(&v));
        let v = env.sound.check(&a, &b);
        ensure!(v.status == Status::NotEquivalent, "{name} without soundy rules: {}", v.status.name());
    }
    Ok("4 pairs EQUIVALENT, the 2 soundy ones NOT_EQUIVALENT when sound only".into())
}

fn soundness(env: &Env) -> Outcome {
    let mut r = rng(7);
    let specs = corpus(&mut r, 40);
    let mut done = 0;
    for kind in Mutation::ALL {
        let mut per_kind = 0;
        for s in &specs {
            if per_kind == 5 {
                break;
            }
            let Some(m) = mutate(s, kind, &mut r) else { continue };
            let v = env.soundy.check(&s.build(), &m.build());
            ensure!(v.status == Status::NotEquivalent, "{kind:?} mutant of {}: {}", s.name(), v.status.name());
            per_kind += 1;
        }
        ensure!(per_kind == 5, "only {per_kind} {kind:?} mutants");
        done += per_kind;
    }
    Ok(format!("{done} mutants NOT_EQUIVALENT"))
}

fn engine(env: &Env) -> Outcome {
    let mut r = rng(8);
    let mut facts = 0;
    for i in 0..500 {
        let p = common::random_program(&mut r);
        let src = p.source();
        let rules = parse_rule_source(&src).map_err(|e| format!("program {i}: {e}"))?;
        let edb = p.edb_database();
        let idb = evaluate(&edb, &rules).map_err(|e| format!("program {i}: {e}"))?;
        ensure!(common::tuples(&idb) == common::naive(&p), "program {i} differs from the naive evaluation:\n{src}");
        facts += common::validate_provenance(&rules, &common::merged(&edb, &idb), &idb)
            .map_err(|e| format!("program {i}: {e}\n{src}"))?;
    }
    let mut library = 0;
    for (a, b) in [
        version_pair(),
        nullcheck_pair(),
        checkcast_pair(),
        object_method_pair(),
        enum_values_pair(),
        anon_final_pair(),
    ] {
        for bytes in [a, b] {
            let an = env.soundy.analyze(&bytes)?;
            library += common::validate_provenance(
                env.soundy.normalizer().rules(),
                &common::merged(&an.edb, &an.idb),
                &an.idb,
            )?;
        }
    }
    Ok(format!("500 programs match the oracle, {facts} + {library} library facts replayed"))
}

fn random_tree(r: &mut ChaCha8Rng, depth: u32) -> DerivationTree {
    if depth == 0 || r.gen_bool(0.4) {
        return DerivationTree::Leaf(format!("F{}", r.gen_range(0..1_000_000)));
    }
    let name: String =
        (0..r.gen_range(1..10)).map(|_| *b"ABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789".choose(r).unwrap() as char).collect();
    let kids = (0..r.gen_range(1..4)).map(|_| random_tree(r, depth - 1)).collect();
    DerivationTree::Node(format!("R_{name}"), kids)
}

fn provenance(_: &Env) -> Outcome {
    let mut r = rng(9);
    for i in 0..10_000 {
        let t = random_tree(&mut r, 6);
        let text = t.render();
        let back = parse_derivation(&text).map_err(|e| format!("tree {i} {text}: {e}"))?;
        ensure!(back == t, "tree {i} does not round trip: {text}");
    }
    let t = parse_derivation("R_REMOVE_BYTECODE_VERSION[F42]").map_err(|e| e.to_string())?;
    ensure!(
        t == DerivationTree::Node("R_REMOVE_BYTECODE_VERSION".into(), vec![DerivationTree::Leaf("F42".into())]),
        "unexpected tree {t:?}"
    );
    Ok("10000 trees round trip".into())
}

/// One class with a few knobs, each of which produces one kind of diff.
#[derive(Clone, Default)]
struct Knobs {
    constant: bool,
    cast: bool,
    sb_capacity: bool,
    signature: bool,
    synthetic_method: bool,
    synthetic_field: bool,
    anno: bool,
    protected: bool,
}

fn knob_class(k: &Knobs) -> Vec<u8> {
    let mut code = daleq_testkit::Code::new();
    code.ldc_str(if k.constant { "beta" } else { "alpha" }).op(op::POP);
    code.type_op(op::NEW, "java/lang/StringBuilder").op(op::DUP);
    if k.sb_capacity {
        code.bipush(16).invoke(op::INVOKESPECIAL, "java/lang/StringBuilder", "<init>", "(I)V");
    } else {
        code.invoke(op::INVOKESPECIAL, "java/lang/StringBuilder", "<init>", "()V");
    }
    code.op(op::POP);
    if k.cast {
        code.var(op::ALOAD, 0).type_op(op::CHECKCAST, "java/lang/Runnable").op(op::POP);
    }
    code.op(op::RETURN);
    let access = if k.protected { acc::PROTECTED } else { acc::PUBLIC };
    let mut c = ClassBuilder::new("p/Knobs").default_constructor().method(Member::new(access, "run", "()V").code(code));
    let mut field = Member::new(acc::PRIVATE, "items", "Ljava/util/List;");
    if k.signature {
        field = field.signature("Ljava/util/List<Ljava/lang/String;>;");
    }
    c = c.field(field);
    if k.synthetic_method {
        let mut body = daleq_testkit::Code::new();
        body.op(op::RETURN);
        c = c.method(Member::new(acc::STATIC | acc::SYNTHETIC, "access$000", "()V").code(body));
    }
    if k.synthetic_field {
        c = c.field(Member::new(acc::FINAL | acc::SYNTHETIC, "val$x", "I"));
    }
    c = c.annotation(Anno::new("Lp/Marker;").with("v", Ev::Int(if k.anno { 2 } else { 1 })));
    c.build()
}

fn patterns(env: &Env) -> Outcome {
    let base = Knobs::default();
    let single: [(Pattern, Tweak); 8] = [
        (Pattern::Constant, |k| k.constant = true),
        (Pattern::Checkcast, |k| k.cast = true),
        (Pattern::Sbinit, |k| k.sb_capacity = true),
        (Pattern::Signtr, |k| k.signature = true),
        (Pattern::Synmet, |k| k.synthetic_method = true),
        (Pattern::Synfld, |k| k.synthetic_field = true),
        (Pattern::Anno, |k| k.anno = true),
        (Pattern::Access, |k| k.protected = true),
    ];
    let diff_of = |k: &Knobs| -> Result<String, String> {
        let v = env.soundy.check(&knob_class(&base), &knob_class(k));
        ensure!(v.status == Status::NotEquivalent, "expected a diff, got {}", describe(&v));
        Ok(v.diff.unwrap_or_default())
    };
    for (p, f) in &single {
        let mut k = base.clone();
        f(&mut k);
        let got = classify_diff(&diff_of(&k)?);
        let want: BTreeSet<Pattern> = [*p].into();
        ensure!(got.patterns == want, "{}: classified as {got}", p.name());
        ensure!(!got.multiple(), "{}: flagged MULTIPLE", p.name());
    }
    let combos: [([usize; 2], &str); 3] =
        [([0, 6], "constant+anno"), ([1, 7], "checkcast+access"), ([3, 5], "signature+synthetic field")];
    for (idx, name) in combos {
        let mut k = base.clone();
        for i in idx {
            single[i].1(&mut k);
        }
        let got = classify_diff(&diff_of(&k)?);
        let want: BTreeSet<Pattern> = idx.iter().map(|i| single[*i].0).collect();
        ensure!(got.patterns == want && got.multiple(), "{name}: classified as {got}");
    }
    ensure!(classify_diff("").is_empty(), "empty diff classified");
    let v = env.soundy.check(&knob_class(&base), &knob_class(&base));
    ensure!(classify_diff(v.diff.as_deref().unwrap_or("")).is_empty(), "identical classes classified");
    Ok("8 single, 3 multiple, empty diff unclassified".into())
}

fn throughput(env: &Env) -> Outcome {
    let mut r = rng(11);
    let specs = corpus(&mut r, 50);
    let mut total = Duration::ZERO;
    for s in &specs {
        let d = decorate(s, &mut r);
        let start = Instant::now();
        let v = env.soundy.check(&s.build(), &d.build());
        total += start.elapsed();
        ensure!(v.status != Status::Error, "{}", describe(&v));
    }
    let mean = total / specs.len() as u32;
    ensure!(mean <= Duration::from_millis(2000), "mean {mean:?}");
    Ok(format!("mean {:.1} ms per class over {} pairs", mean.as_secs_f64() * 1000.0, specs.len()))
}

fn jar_pair(dir: &Path) -> Result<(), String> {
    let (va, vb) = version_pair();
    let base = corpus(&mut rng(12), 1).remove(0);
    let changed = mutate(&base, Mutation::Constant, &mut rng(13)).ok_or("no mutation site")?;
    let same = corpus(&mut rng(14), 2).remove(1).build();
    // Truncated right after the pool count, differing so bitwise cannot settle it.
    let corrupt_a: &[u8] = &[0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 52, 0, 9];
    let corrupt_b: &[u8] = &[0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 61, 0, 9];
    let props_a: &[u8] = b"name=a\n";
    let props_b: &[u8] = b"name=b\n";
    let a = write_jar(&[
        ("META-INF/MANIFEST.MF", b"Manifest-Version: 1.0\n"),
        ("app.properties", props_a),
        ("only-in-a.txt", b"x\n"),
        ("p/Versioned.class", &va),
        ("p/Changed.class", &base.build()),
        ("p/Same.class", &same),
        ("p/Broken.class", corrupt_a),
    ]);
    let b = write_jar(&[
        ("META-INF/MANIFEST.MF", b"Manifest-Version: 1.0\n"),
        ("app.properties", props_b),
        ("p/Versioned.class", &vb),
        ("p/Changed.class", &changed.build()),
        ("p/Same.class", &same),
        ("p/Broken.class", corrupt_b),
    ]);
    std::fs::write(dir.join("a.jar"), a).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("b.jar"), b).map_err(|e| e.to_string())
}

fn run_report(dir: &Path, out: &str) -> Result<(Report, Pages), String> {
    let out = dir.join(out);
    let options = ArchiveOptions { out: Some(out.clone()), deterministic: true, workers: 4, ..Default::default() };
    let report = compare_archives(&dir.join("a.jar"), &dir.join("b.jar"), &options).map_err(|e| e.to_string())?;
    let files = render_report(&report, &out).map_err(|e| e.to_string())?;
    let mut pages = Vec::new();
    for f in files {
        let rel = f.strip_prefix(&out).map_err(|e| e.to_string())?.display().to_string();
        pages.push((rel, std::fs::read(&f).map_err(|e| e.to_string())?));
    }
    pages.sort();
    Ok((report, pages))
}

fn report(_: &Env) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    jar_pair(tmp.path())?;
    let (rep, first) = run_report(tmp.path(), "run1")?;
    let (_, second) = run_report(tmp.path(), "run2")?;
    ensure!(first.len() == second.len(), "{} pages against {}", first.len(), second.len());
    for ((n1, b1), (n2, b2)) in first.iter().zip(&second) {
        ensure!(n1 == n2 && b1 == b2, "{n1} differs between runs");
    }
    let cell = |entry: &str, column: &str| {
        rep.cell(entry, column).map(|c| c.status).ok_or(format!("no cell {entry} {column}"))
    };
    ensure!(cell("only-in-a.txt", "presence")? == CellStatus::Fail, "presence of only-in-a.txt");
    for col in rep.columns.iter().filter(|c| *c != "presence") {
        ensure!(cell("only-in-a.txt", col)? == CellStatus::Na, "{col} of only-in-a.txt is not N/A");
    }
    ensure!(cell("p/Versioned.class", "daleq")? == CellStatus::Pass, "daleq of p/Versioned.class");
    ensure!(cell("p/Versioned.class", "disasm")? == CellStatus::Fail, "disasm of p/Versioned.class");
    ensure!(cell("p/Versioned.class", "bitwise")? == CellStatus::Fail, "bitwise of p/Versioned.class");
    let versioned = rep.cell("p/Versioned.class", "daleq").unwrap();
    ensure!(matches!(&versioned.detail, Some(Detail::Derivations(v)) if !v.is_empty()), "no derivation detail");
    ensure!(
        first.iter().any(|(n, b)| n.contains("Versioned")
            && n.contains("daleq")
            && String::from_utf8_lossy(b).contains("R_REMOVE_BYTECODE_VERSION")),
        "no derivation page"
    );
    ensure!(cell("p/Changed.class", "daleq")? == CellStatus::Fail, "daleq of p/Changed.class");
    ensure!(cell("p/Same.class", "daleq")? == CellStatus::Pass, "daleq of p/Same.class");
    ensure!(cell("app.properties", "daleq")? == CellStatus::Na, "daleq of app.properties");
    ensure!(cell("app.properties", "bitwise")? == CellStatus::Fail, "bitwise of app.properties");
    ensure!(cell("p/Broken.class", "daleq")? == CellStatus::Error, "daleq of p/Broken.class");
    ensure!(rep.exit_code() == 2, "exit code {}", rep.exit_code());
    Ok(format!("{} pages identical across runs, cell states as expected", first.len()))
}

fn main() {
    let env = Env {
        soundy: Checker::new(SoundnessMode::WithSoundy, ExtractionConfig::default()).expect("rules"),
        sound: Checker::new(SoundnessMode::SoundOnly, ExtractionConfig::default()).expect("rules"),
    };
    let criteria: [(&str, Criterion); 12] = [
        ("pipeline determinism", determinism),
        ("reflexivity, symmetry, transitivity", laws),
        ("line numbers and spare labels", level2),
        ("class file version", version),
        ("null checks", nullcheck),
        ("rewrite pairs", rewrites),
        ("mutants", soundness),
        ("engine against naive oracle", engine),
        ("derivation grammar", provenance),
        ("pattern classifier", patterns),
        ("per-class time", throughput),
        ("report", report),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| f(&env))).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS [{:>2}] {name}: {msg} ({secs:.1} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {msg} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
