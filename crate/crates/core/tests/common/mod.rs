//! Shared test oracles: a random stratified program generator with a naive
//! bottom-up evaluator, and a provenance replay validator.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use daleq_core::engine::replay;
use daleq_core::equivalence::{parse_derivation, DerivationTree};
use daleq_core::extractor::{Column, ColumnType, DatabaseKind, Fact, FactDatabase, Schema, Term};
use daleq_core::rulelang::{Atom, Expr, Rule, RuleSet};
use rand::Rng;

pub const EDB_PREDS: [&str; 3] = ["E0", "E1", "E2"];
pub const IDB_PREDS: [&str; 4] = ["P0", "P1", "P2", "P3"];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

#[derive(Debug, Clone)]
pub enum Arg {
    Var(String),
    Num(i64),
    Wild,
}

#[derive(Debug, Clone)]
pub struct GAtom {
    pub pred: String,
    pub id: Arg,
    pub args: [Arg; 2],
}

#[derive(Debug, Clone)]
pub enum GLit {
    Pos(GAtom),
    Neg(GAtom),
    /// var op arg, with op one of = != < <= > >=
    Cmp(String, &'static str, Arg),
    /// new = f(var, constant), f one of add sub band
    Assign(String, &'static str, String, i64),
}

#[derive(Debug, Clone)]
pub enum HeadId {
    Copy(String),
    Cat(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct GRule {
    pub name: String,
    pub head: String,
    pub id: HeadId,
    pub args: [Arg; 2],
    pub body: Vec<GLit>,
}

#[derive(Debug, Clone)]
pub struct Program {
    pub rules: Vec<GRule>,
    pub edb: Vec<Fact>,
}

fn arg_text(a: &Arg) -> String {
    match a {
        Arg::Var(v) => v.clone(),
        Arg::Num(n) => n.to_string(),
        Arg::Wild => "_".into(),
    }
}

fn atom_text(a: &GAtom) -> String {
    format!("{}({}, {}, {})", a.pred, arg_text(&a.id), arg_text(&a.args[0]), arg_text(&a.args[1]))
}

pub fn schema() -> Schema {
    let cols = vec![
        Column::new("id", ColumnType::Symbol),
        Column::new("a", ColumnType::Number),
        Column::new("b", ColumnType::Number),
    ];
    EDB_PREDS.iter().chain(IDB_PREDS.iter()).map(|p| (p.to_string(), cols.clone())).collect()
}

impl Program {
    pub fn source(&self) -> String {
        let mut s = String::new();
        for p in EDB_PREDS.iter().chain(IDB_PREDS.iter()) {
            s.push_str(&format!(".decl {p}(id:symbol, a:number, b:number)\n"));
        }
        for r in &self.rules {
            let id = match &r.id {
                HeadId::Copy(v) => v.clone(),
                HeadId::Cat(vs) => {
                    let mut parts = vec![format!("\"{}\"", r.name), "\"[\"".to_string()];
                    for (i, v) in vs.iter().enumerate() {
                        if i > 0 {
                            parts.push("\",\"".into());
                        }
                        parts.push(v.clone());
                    }
                    parts.push("\"]\"".into());
                    format!("cat({})", parts.join(", "))
                }
            };
            let body: Vec<String> = r
                .body
                .iter()
                .map(|l| match l {
                    GLit::Pos(a) => atom_text(a),
                    GLit::Neg(a) => format!("!{}", atom_text(a)),
                    GLit::Cmp(v, op, a) => format!("{v} {op} {}", arg_text(a)),
                    GLit::Assign(n, f, v, k) => format!("{n} = {f}({v}, {k})"),
                })
                .collect();
            s.push_str(&format!(
                "\n@name({})\n{}({}, {}, {}) :-\n    {}.\n",
                r.name,
                r.head,
                id,
                arg_text(&r.args[0]),
                arg_text(&r.args[1]),
                body.join(",\n    ")
            ));
        }
        s
    }

    pub fn edb_database(&self) -> FactDatabase {
        let mut db = FactDatabase::new(DatabaseKind::Edb, schema());
        for f in &self.edb {
            db.push(f.clone());
        }
        db
    }
}

fn level(pred: &str) -> Option<usize> {
    IDB_PREDS.iter().position(|p| *p == pred)
}

pub fn random_program(rng: &mut impl Rng) -> Program {
    let mut edb = Vec::new();
    let mut next = 1;
    for p in EDB_PREDS {
        for _ in 0..rng.gen_range(0..7) {
            edb.push(Fact::new(
                p,
                format!("F{next}"),
                vec![Term::Num(rng.gen_range(0..4)), Term::Num(rng.gen_range(0..4))],
            ));
            next += 1;
        }
    }
    let mut rules = Vec::new();
    for k in 0..rng.gen_range(1..7) {
        let head_level = rng.gen_range(0..IDB_PREDS.len());
        let mut body = Vec::new();
        let mut bound: Vec<String> = Vec::new();
        let mut ids = Vec::new();
        let mut recursive = false;
        let pick_arg = |rng: &mut dyn rand::RngCore, bound: &mut Vec<String>| -> Arg {
            match rng.gen_range(0..20) {
                0..=11 => {
                    let v = VARS[rng.gen_range(0..VARS.len())].to_string();
                    if !bound.contains(&v) {
                        bound.push(v.clone());
                    }
                    Arg::Var(v)
                }
                12..=16 => Arg::Num(rng.gen_range(0..4)),
                _ => Arg::Wild,
            }
        };
        for a in 0..rng.gen_range(1..4) {
            let pred = if rng.gen_bool(0.35) {
                let l = rng.gen_range(0..=head_level);
                recursive |= l == head_level;
                IDB_PREDS[l]
            } else {
                EDB_PREDS[rng.gen_range(0..EDB_PREDS.len())]
            };
            let id = format!("i{a}");
            ids.push(id.clone());
            let args = [pick_arg(rng, &mut bound), pick_arg(rng, &mut bound)];
            body.push(GLit::Pos(GAtom { pred: pred.into(), id: Arg::Var(id), args }));
        }
        let bound_arg = |rng: &mut dyn rand::RngCore, bound: &[String]| -> Arg {
            match rng.gen_range(0..3) {
                0 if !bound.is_empty() => Arg::Var(bound[rng.gen_range(0..bound.len())].clone()),
                1 => Arg::Num(rng.gen_range(0..4)),
                _ => Arg::Wild,
            }
        };
        if rng.gen_bool(0.3) {
            let pred = if head_level > 0 && rng.gen_bool(0.5) {
                IDB_PREDS[rng.gen_range(0..head_level)]
            } else {
                EDB_PREDS[rng.gen_range(0..EDB_PREDS.len())]
            };
            let args = [bound_arg(rng, &bound), bound_arg(rng, &bound)];
            body.push(GLit::Neg(GAtom { pred: pred.into(), id: Arg::Wild, args }));
        }
        if !bound.is_empty() && rng.gen_bool(0.3) {
            let v = bound[rng.gen_range(0..bound.len())].clone();
            let op = ["=", "!=", "<", "<=", ">", ">="][rng.gen_range(0..6)];
            let rhs = if rng.gen_bool(0.5) {
                Arg::Var(bound[rng.gen_range(0..bound.len())].clone())
            } else {
                Arg::Num(rng.gen_range(0..4))
            };
            body.push(GLit::Cmp(v, op, rhs));
        }
        if !recursive && !bound.is_empty() && rng.gen_bool(0.25) {
            let v = bound[rng.gen_range(0..bound.len())].clone();
            let f = ["add", "sub", "band"][rng.gen_range(0..3)];
            body.push(GLit::Assign("V".into(), f, v, rng.gen_range(0..4)));
            bound.push("V".into());
        }
        let head_arg = |rng: &mut dyn rand::RngCore| -> Arg {
            if !bound.is_empty() && rng.gen_bool(0.8) {
                Arg::Var(bound[rng.gen_range(0..bound.len())].clone())
            } else {
                Arg::Num(rng.gen_range(0..4))
            }
        };
        let args = [head_arg(rng), head_arg(rng)];
        let id = if recursive { HeadId::Copy(ids[0].clone()) } else { HeadId::Cat(ids) };
        rules.push(GRule { name: format!("R_{k}"), head: IDB_PREDS[head_level].into(), id, args, body });
    }
    Program { rules, edb }
}

type Tuple = (String, Vec<Term>);
type Db = HashMap<String, BTreeSet<Tuple>>;

fn text(t: &Term) -> String {
    match t {
        Term::Sym(s) => s.clone(),
        Term::Num(n) => n.to_string(),
    }
}

fn unify(arg: &Arg, value: &Term, env: &mut HashMap<String, Term>) -> bool {
    match arg {
        Arg::Wild => true,
        Arg::Num(n) => value == &Term::Num(*n),
        Arg::Var(v) => match env.get(v) {
            Some(x) => x == value,
            None => {
                env.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

fn matches(a: &GAtom, (id, vals): &Tuple, env: &HashMap<String, Term>) -> Option<HashMap<String, Term>> {
    let mut e = env.clone();
    (unify(&a.id, &Term::Sym(id.clone()), &mut e)
        && unify(&a.args[0], &vals[0], &mut e)
        && unify(&a.args[1], &vals[1], &mut e))
    .then_some(e)
}

fn value(a: &Arg, env: &HashMap<String, Term>) -> Term {
    match a {
        Arg::Var(v) => env[v].clone(),
        Arg::Num(n) => Term::Num(*n),
        Arg::Wild => unreachable!(),
    }
}

fn solve(body: &[GLit], db: &Db, env: HashMap<String, Term>, out: &mut Vec<HashMap<String, Term>>) {
    let Some((first, rest)) = body.split_first() else {
        out.push(env);
        return;
    };
    let empty = BTreeSet::new();
    match first {
        GLit::Pos(a) => {
            for t in db.get(&a.pred).unwrap_or(&empty) {
                if let Some(e) = matches(a, t, &env) {
                    solve(rest, db, e, out);
                }
            }
        }
        GLit::Neg(a) => {
            if !db.get(&a.pred).unwrap_or(&empty).iter().any(|t| matches(a, t, &env).is_some()) {
                solve(rest, db, env, out);
            }
        }
        GLit::Cmp(v, op, rhs) => {
            let (x, y) = (env[v].as_num().unwrap(), value(rhs, &env).as_num().unwrap());
            let ok = match *op {
                "=" => x == y,
                "!=" => x != y,
                "<" => x < y,
                "<=" => x <= y,
                ">" => x > y,
                _ => x >= y,
            };
            if ok {
                solve(rest, db, env, out);
            }
        }
        GLit::Assign(n, f, v, k) => {
            let x = env[v].as_num().unwrap();
            let r = match *f {
                "add" => x + k,
                "sub" => x - k,
                _ => x & k,
            };
            let mut e = env.clone();
            e.insert(n.clone(), Term::Num(r));
            solve(rest, db, e, out);
        }
    }
}

/// Naive fixpoint, predicate by predicate in level order.
pub fn naive(p: &Program) -> BTreeSet<(String, String, Vec<Term>)> {
    let mut db: Db = HashMap::new();
    for f in &p.edb {
        db.entry(f.predicate.clone()).or_default().insert((f.id.clone(), f.terms.clone()));
    }
    for (l, pred) in IDB_PREDS.iter().enumerate() {
        loop {
            let mut new = Vec::new();
            for r in p.rules.iter().filter(|r| level(&r.head) == Some(l)) {
                let mut envs = Vec::new();
                solve(&r.body, &db, HashMap::new(), &mut envs);
                for env in envs {
                    let id = match &r.id {
                        HeadId::Copy(v) => text(&env[v]),
                        HeadId::Cat(vs) => {
                            format!("{}[{}]", r.name, vs.iter().map(|v| text(&env[v])).collect::<Vec<_>>().join(","))
                        }
                    };
                    new.push((id, vec![value(&r.args[0], &env), value(&r.args[1], &env)]));
                }
            }
            let rel = db.entry(pred.to_string()).or_default();
            let before = rel.len();
            rel.extend(new);
            if rel.len() == before {
                break;
            }
        }
    }
    let mut out = BTreeSet::new();
    for pred in IDB_PREDS {
        for (id, vals) in db.get(pred).into_iter().flatten() {
            out.insert((pred.to_string(), id.clone(), vals.clone()));
        }
    }
    out
}

pub fn tuples(db: &FactDatabase) -> BTreeSet<(String, String, Vec<Term>)> {
    db.iter().map(|f| (f.predicate.clone(), f.id.clone(), f.terms.clone())).collect()
}

/// EDB and IDB in one database, for negation checks during replay.
pub fn merged(edb: &FactDatabase, idb: &FactDatabase) -> FactDatabase {
    let mut schema = edb.schema.clone();
    schema.extend(idb.schema.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut db = FactDatabase::new(DatabaseKind::Idb, schema);
    for f in edb.iter().chain(idb.iter()) {
        db.push(f.clone());
    }
    db
}

fn constant_ok(atom: &Atom, f: &Fact) -> bool {
    atom.args.iter().skip(1).zip(&f.terms).all(|(e, t)| match e {
        Expr::Sym(s) => t == &Term::Sym(s.clone()),
        Expr::Num(n) => t == &Term::Num(*n),
        _ => true,
    })
}

fn search(rule: &Rule, cands: &[Vec<&Fact>], chosen: &mut Vec<usize>, ctx: &FactDatabase, target: &Fact) -> bool {
    if chosen.len() == cands.len() {
        let premises: Vec<&Fact> = chosen.iter().enumerate().map(|(i, &c)| cands[i][c]).collect();
        return replay(rule, &premises, ctx).map(|fs| fs.contains(target)).unwrap_or(false);
    }
    for c in 0..cands[chosen.len()].len() {
        chosen.push(c);
        if search(rule, cands, chosen, ctx, target) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Checks that every IDB fact is re-derived by replaying a rule on
/// premises from `ctx`. Composite IDs name the rule and the premise IDs;
/// plain IDs were copied from the premise that carries them.
pub fn validate_provenance(rules: &RuleSet, ctx: &FactDatabase, idb: &FactDatabase) -> Result<usize, String> {
    let mut checked = 0;
    for fact in idb.iter() {
        let tree = parse_derivation(&fact.id).ok();
        // The named rule, then rules that copy an ID from a premise.
        let named = match &tree {
            Some(DerivationTree::Node(name, _)) => rules.rule(name),
            _ => None,
        };
        let copying = rules.rules.iter().filter(|r| matches!(r.head.args[0], Expr::Var(_)));
        let mut ok = false;
        for rule in named.into_iter().chain(copying) {
            if rule.head.predicate != fact.predicate {
                continue;
            }
            let atoms: Vec<&Atom> = rule.positive_atoms().collect();
            let pinned: Vec<Option<String>> = match (&rule.head.args[0], &tree) {
                (Expr::Var(v), _) => atoms
                    .iter()
                    .map(|a| matches!(&a.args[0], Expr::Var(x) if x == v).then(|| fact.id.clone()))
                    .collect(),
                (_, Some(DerivationTree::Node(_, kids))) if kids.len() == atoms.len() => {
                    kids.iter().map(|k| Some(k.render())).collect()
                }
                _ => continue,
            };
            let cands: Vec<Vec<&Fact>> = atoms
                .iter()
                .zip(&pinned)
                .map(|(a, pin)| {
                    ctx.get(&a.predicate)
                        .iter()
                        .filter(|f| pin.as_ref().is_none_or(|id| &f.id == id) && constant_ok(a, f))
                        .collect()
                })
                .collect();
            if search(rule, &cands, &mut Vec::new(), ctx, fact) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(format!("no replay derives {} {} {:?}", fact.predicate, fact.id, fact.terms));
        }
        checked += 1;
    }
    Ok(checked)
}
