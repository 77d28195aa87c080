use std::collections::{BTreeMap, BTreeSet, HashMap};

use indexmap::IndexSet;

use super::{compare, eval_builtin, stratify, EngineError};
use crate::extractor::{ColumnType, DatabaseKind, Fact, FactDatabase, Schema, Term};
use crate::rulelang::{Atom, CmpOp, Expr, Literal, Rule, RuleSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOptions {
    /// Maximum number of semi-naive rounds per stratum.
    pub iteration_cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { iteration_cap: 10_000 }
    }
}

type Tuple = Vec<Term>;

/// Tuple set with lazily added hash indexes on column subsets.
#[derive(Debug, Default, Clone)]
struct Relation {
    tuples: IndexSet<Tuple>,
    indexes: HashMap<Vec<usize>, HashMap<Vec<Term>, Vec<usize>>>,
}

impl Relation {
    fn from_tuples(tuples: impl IntoIterator<Item = Tuple>) -> Relation {
        Relation { tuples: tuples.into_iter().collect(), indexes: HashMap::new() }
    }

    fn insert(&mut self, t: Tuple) -> bool {
        let (pos, fresh) = self.tuples.insert_full(t);
        if fresh {
            let t = &self.tuples[pos];
            for (cols, idx) in self.indexes.iter_mut() {
                idx.entry(cols.iter().map(|&c| t[c].clone()).collect()).or_default().push(pos);
            }
        }
        fresh
    }

    fn ensure_index(&mut self, cols: &[usize]) {
        if cols.is_empty() || self.indexes.contains_key(cols) {
            return;
        }
        let mut idx: HashMap<Vec<Term>, Vec<usize>> = HashMap::new();
        for (pos, t) in self.tuples.iter().enumerate() {
            idx.entry(cols.iter().map(|&c| t[c].clone()).collect()).or_default().push(pos);
        }
        self.indexes.insert(cols.to_vec(), idx);
    }

    /// Tuples whose `cols` equal `key`, scanning when no index exists.
    fn lookup<'a>(&'a self, cols: &[usize], key: &[Term]) -> Box<dyn Iterator<Item = &'a Tuple> + 'a> {
        if cols.is_empty() {
            return Box::new(self.tuples.iter());
        }
        let Some(idx) = self.indexes.get(cols) else {
            let (cols, key) = (cols.to_vec(), key.to_vec());
            return Box::new(
                self.tuples.iter().filter(move |t| cols.iter().zip(&key).all(|(&c, k)| t.get(c) == Some(k))),
            );
        };
        match idx.get(key) {
            Some(ps) => Box::new(ps.iter().map(move |&p| &self.tuples[p])),
            None => Box::new(std::iter::empty()),
        }
    }
}

#[derive(Debug, Clone)]
enum Arg {
    /// Column must equal this expression (constant or bound variables).
    Key(Expr),
    Bind(usize),
    Same(usize),
    Ignore,
}

#[derive(Debug, Clone)]
enum Step {
    Scan { pred: String, negated: bool, args: Vec<Arg>, key_cols: Vec<usize>, atom: usize },
    Filter(Expr, CmpOp, Expr),
    Assign(usize, Expr),
}

#[derive(Debug, Clone)]
struct Plan {
    steps: Vec<Step>,
    slots: HashMap<String, usize>,
}

fn vars_of(e: &Expr) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    e.vars(&mut s);
    s
}

fn plan_rule(rule: &Rule) -> Result<Plan, EngineError> {
    let mut slots: HashMap<String, usize> = HashMap::new();
    let mut bound: BTreeSet<String> = BTreeSet::new();
    let mut steps = Vec::new();
    let mut pending: Vec<&Literal> = Vec::new();
    let mut atom_no = 0;

    fn slot(slots: &mut HashMap<String, usize>, v: &str) -> usize {
        let n = slots.len();
        *slots.entry(v.to_string()).or_insert(n)
    }

    fn key_atom(
        a: &Atom,
        negated: bool,
        atom: usize,
        bound: &BTreeSet<String>,
        slots: &mut HashMap<String, usize>,
    ) -> Step {
        let mut args = Vec::new();
        let mut key_cols = Vec::new();
        let mut local: BTreeSet<String> = BTreeSet::new();
        for (i, e) in a.args.iter().enumerate() {
            match e {
                Expr::Wildcard => args.push(Arg::Ignore),
                Expr::Var(v) if !bound.contains(v) => {
                    let s = slot(slots, v);
                    if local.insert(v.clone()) {
                        args.push(Arg::Bind(s));
                    } else {
                        args.push(Arg::Same(s));
                    }
                }
                other => {
                    key_cols.push(i);
                    args.push(Arg::Key(other.clone()));
                }
            }
        }
        Step::Scan { pred: a.predicate.clone(), negated, args, key_cols, atom }
    }

    let flush = |pending: &mut Vec<&Literal>,
                 bound: &mut BTreeSet<String>,
                 steps: &mut Vec<Step>,
                 slots: &mut HashMap<String, usize>| loop {
        let mut progressed = false;
        let mut i = 0;
        while i < pending.len() {
            let ready = match pending[i] {
                Literal::Neg(a) => {
                    if a.vars().is_subset(bound) {
                        steps.push(key_atom(a, true, usize::MAX, bound, slots));
                        true
                    } else {
                        false
                    }
                }
                Literal::Cmp(l, op, r) => {
                    let (lv, rv) = (vars_of(l), vars_of(r));
                    if lv.is_subset(bound) && rv.is_subset(bound) {
                        steps.push(Step::Filter(l.clone(), *op, r.clone()));
                        true
                    } else if *op == CmpOp::Eq {
                        match (l, r) {
                            (Expr::Var(v), e) | (e, Expr::Var(v))
                                if !bound.contains(v) && vars_of(e).is_subset(bound) =>
                            {
                                let s = slot(slots, v);
                                steps.push(Step::Assign(s, e.clone()));
                                bound.insert(v.clone());
                                true
                            }
                            _ => false,
                        }
                    } else {
                        false
                    }
                }
                Literal::Pos(_) => unreachable!(),
            };
            if ready {
                pending.remove(i);
                progressed = true;
            } else {
                i += 1;
            }
        }
        if !progressed {
            break;
        }
    };

    flush(&mut pending, &mut bound, &mut steps, &mut slots);
    for l in &rule.body {
        match l {
            Literal::Pos(a) => {
                steps.push(key_atom(a, false, atom_no, &bound, &mut slots));
                atom_no += 1;
                bound.extend(a.vars());
            }
            other => pending.push(other),
        }
        flush(&mut pending, &mut bound, &mut steps, &mut slots);
    }
    if !pending.is_empty() {
        return Err(crate::rulelang::check_range_restriction(rule).err().map(EngineError::from).unwrap_or_else(|| {
            EngineError::BuiltinTypeError { rule: rule.name.clone(), message: "cannot order body literals".into() }
        }));
    }
    for v in rule.head.vars() {
        if !bound.contains(&v) {
            return Err(EngineError::from(crate::rulelang::RuleError::RangeRestrictionViolation {
                rule: rule.name.clone(),
                variable: v,
            }));
        }
    }
    Ok(Plan { steps, slots })
}

fn eval_expr(e: &Expr, env: &[Option<Term>], slots: &HashMap<String, usize>, rule: &str) -> Result<Term, EngineError> {
    match e {
        Expr::Sym(s) => Ok(Term::Sym(s.clone())),
        Expr::Num(n) => Ok(Term::Num(*n)),
        Expr::Var(v) => Ok(env[slots[v]].clone().expect("planned variable is bound")),
        Expr::Call(b, args) => {
            let vals = args.iter().map(|a| eval_expr(a, env, slots, rule)).collect::<Result<Vec<_>, _>>()?;
            eval_builtin(*b, &vals).map_err(|message| EngineError::BuiltinTypeError { rule: rule.to_string(), message })
        }
        Expr::Wildcard => unreachable!("wildcards are rejected in evaluated positions"),
    }
}

/// Runs a plan. `source(step)` picks the relation for each scan step.
fn run<'a>(
    rule: &Rule,
    plan: &Plan,
    source: &dyn Fn(usize) -> &'a Relation,
    out: &mut Vec<Tuple>,
) -> Result<(), EngineError> {
    let mut env: Vec<Option<Term>> = vec![None; plan.slots.len()];
    step(rule, plan, 0, &mut env, source, out)
}

fn step<'a>(
    rule: &Rule,
    plan: &Plan,
    i: usize,
    env: &mut Vec<Option<Term>>,
    source: &dyn Fn(usize) -> &'a Relation,
    out: &mut Vec<Tuple>,
) -> Result<(), EngineError> {
    let Some(s) = plan.steps.get(i) else {
        let head =
            rule.head.args.iter().map(|e| eval_expr(e, env, &plan.slots, &rule.name)).collect::<Result<Vec<_>, _>>()?;
        out.push(head);
        return Ok(());
    };
    match s {
        Step::Filter(l, op, r) => {
            let (x, y) = (eval_expr(l, env, &plan.slots, &rule.name)?, eval_expr(r, env, &plan.slots, &rule.name)?);
            let ok = compare(*op, &x, &y)
                .map_err(|message| EngineError::BuiltinTypeError { rule: rule.name.clone(), message })?;
            if ok {
                step(rule, plan, i + 1, env, source, out)?;
            }
            Ok(())
        }
        Step::Assign(slot, e) => {
            let v = eval_expr(e, env, &plan.slots, &rule.name)?;
            env[*slot] = Some(v);
            step(rule, plan, i + 1, env, source, out)?;
            env[*slot] = None;
            Ok(())
        }
        Step::Scan { negated, args, key_cols, .. } => {
            let rel = source(i);
            let key = key_cols
                .iter()
                .map(|&c| match &args[c] {
                    Arg::Key(e) => eval_expr(e, env, &plan.slots, &rule.name),
                    _ => unreachable!(),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if *negated {
                let found = rel.lookup(key_cols, &key).any(|t| t.len() == args.len());
                if !found {
                    step(rule, plan, i + 1, env, source, out)?;
                }
                return Ok(());
            }
            'tuples: for t in rel.lookup(key_cols, &key) {
                if t.len() != args.len() {
                    continue;
                }
                let mut bound_here = Vec::new();
                for (c, a) in args.iter().enumerate() {
                    match a {
                        Arg::Bind(s) => {
                            env[*s] = Some(t[c].clone());
                            bound_here.push(*s);
                        }
                        Arg::Same(s) if env[*s].as_ref() != Some(&t[c]) => {
                            for b in bound_here.drain(..) {
                                env[b] = None;
                            }
                            continue 'tuples;
                        }
                        _ => {}
                    }
                }
                step(rule, plan, i + 1, env, source, out)?;
                for b in bound_here {
                    env[b] = None;
                }
            }
            Ok(())
        }
    }
}

fn check_types(rule: &Rule, decls: &Schema, t: &Tuple) -> Result<(), EngineError> {
    let Some(cols) = decls.get(&rule.head.predicate) else { return Ok(()) };
    for (c, v) in cols.iter().zip(t) {
        if c.ty != v.column_type() {
            return Err(EngineError::TypeMismatch {
                rule: rule.name.clone(),
                predicate: rule.head.predicate.clone(),
                column: c.name.clone(),
                expected: c.ty.name(),
            });
        }
    }
    if t.first().and_then(Term::as_sym).is_none() {
        return Err(EngineError::TypeMismatch {
            rule: rule.name.clone(),
            predicate: rule.head.predicate.clone(),
            column: "id".into(),
            expected: ColumnType::Symbol.name(),
        });
    }
    Ok(())
}

fn tuple_of(f: &Fact) -> Tuple {
    let mut t = Vec::with_capacity(f.terms.len() + 1);
    t.push(Term::Sym(f.id.clone()));
    t.extend(f.terms.iter().cloned());
    t
}

pub fn evaluate(edb: &FactDatabase, rules: &RuleSet) -> Result<FactDatabase, EngineError> {
    evaluate_with(edb, rules, &EngineOptions::default())
}

pub fn evaluate_with(
    edb: &FactDatabase,
    rules: &RuleSet,
    options: &EngineOptions,
) -> Result<FactDatabase, EngineError> {
    let strata = stratify(rules)?;
    let plans: Vec<Plan> = rules.rules.iter().map(plan_rule).collect::<Result<_, _>>()?;
    let empty = Relation::default();

    let mut rels: BTreeMap<String, Relation> = BTreeMap::new();
    for f in edb.iter() {
        rels.entry(f.predicate.clone()).or_default().insert(tuple_of(f));
    }
    let mut derived: Vec<String> = Vec::new();
    let mut derived_set = BTreeSet::new();
    for r in &rules.rules {
        if derived_set.insert(r.head.predicate.clone()) {
            derived.push(r.head.predicate.clone());
        }
        rels.entry(r.head.predicate.clone()).or_default();
    }

    for (si, stratum) in strata.strata.iter().enumerate() {
        let heads: BTreeSet<&str> = stratum.iter().map(|&r| rules.rules[r].head.predicate.as_str()).collect();
        for &ri in stratum {
            for s in &plans[ri].steps {
                if let Step::Scan { pred, key_cols, .. } = s {
                    if let Some(rel) = rels.get_mut(pred) {
                        rel.ensure_index(key_cols);
                    }
                }
            }
        }

        // First pass over full relations.
        let mut produced: Vec<(usize, Tuple)> = Vec::new();
        for &ri in stratum {
            let mut out = Vec::new();
            let plan = &plans[ri];
            let source = |i: usize| match &plan.steps[i] {
                Step::Scan { pred, .. } => rels.get(pred).unwrap_or(&empty),
                _ => unreachable!(),
            };
            run(&rules.rules[ri], plan, &source, &mut out)?;
            produced.extend(out.into_iter().map(|t| (ri, t)));
        }
        let mut delta = absorb(&mut rels, rules, produced)?;

        let mut rounds = 0;
        while !delta.is_empty() {
            rounds += 1;
            if rounds > options.iteration_cap {
                return Err(EngineError::IterationCapExceeded { stratum: si, cap: options.iteration_cap });
            }
            let mut delta_rels: BTreeMap<String, Relation> =
                delta.into_iter().map(|(p, ts)| (p, Relation::from_tuples(ts))).collect();
            let mut produced = Vec::new();
            for &ri in stratum {
                let plan = &plans[ri];
                for (di, s) in plan.steps.iter().enumerate() {
                    let Step::Scan { pred, negated: false, key_cols, .. } = s else { continue };
                    if !heads.contains(pred.as_str()) {
                        continue;
                    }
                    let Some(d) = delta_rels.get_mut(pred) else { continue };
                    d.ensure_index(key_cols);
                    let d = &delta_rels[pred];
                    let source = |i: usize| match &plan.steps[i] {
                        Step::Scan { .. } if i == di => d,
                        Step::Scan { pred, .. } => rels.get(pred).unwrap_or(&empty),
                        _ => unreachable!(),
                    };
                    let mut out = Vec::new();
                    run(&rules.rules[ri], plan, &source, &mut out)?;
                    produced.extend(out.into_iter().map(|t| (ri, t)));
                }
            }
            delta_rels.clear();
            delta = absorb(&mut rels, rules, produced)?;
        }
    }

    let schema: Schema =
        derived.iter().filter_map(|p| rules.declarations.get(p).map(|c| (p.clone(), c.clone()))).collect();
    let mut idb = FactDatabase::new(DatabaseKind::Idb, schema);
    for p in &derived {
        let Some(rel) = rels.get(p) else { continue };
        let facts = idb.facts.entry(p.clone()).or_default();
        for t in &rel.tuples {
            let id = match &t[0] {
                Term::Sym(s) => s.clone(),
                Term::Num(n) => n.to_string(),
            };
            facts.push(Fact::new(p.clone(), id, t[1..].to_vec()));
        }
    }
    idb.facts.retain(|_, v| !v.is_empty());
    Ok(idb)
}

/// Inserts produced tuples, returning the genuinely new ones per predicate.
fn absorb(
    rels: &mut BTreeMap<String, Relation>,
    rules: &RuleSet,
    produced: Vec<(usize, Tuple)>,
) -> Result<BTreeMap<String, Vec<Tuple>>, EngineError> {
    let mut delta: BTreeMap<String, Vec<Tuple>> = BTreeMap::new();
    for (ri, t) in produced {
        let rule = &rules.rules[ri];
        check_types(rule, &rules.declarations, &t)?;
        let rel = rels.entry(rule.head.predicate.clone()).or_default();
        if rel.insert(t.clone()) {
            delta.entry(rule.head.predicate.clone()).or_default().push(t);
        }
    }
    Ok(delta)
}

/// Re-applies `rule` with its positive atoms pinned to `premises` (one fact
/// per positive atom, in body order). Negated atoms are checked against
/// `context`. Returns the derived heads as facts.
pub fn replay(rule: &Rule, premises: &[&Fact], context: &FactDatabase) -> Result<Vec<Fact>, EngineError> {
    let plan = plan_rule(rule)?;
    let positive = rule.positive_atoms().count();
    if premises.len() != positive {
        return Ok(Vec::new());
    }
    let mut pinned: Vec<Relation> = Vec::new();
    for (i, s) in plan.steps.iter().enumerate() {
        let rel = match s {
            Step::Scan { negated: false, atom, key_cols, pred, .. } => {
                if premises[*atom].predicate != *pred {
                    return Ok(Vec::new());
                }
                let mut r = Relation::from_tuples([tuple_of(premises[*atom])]);
                r.ensure_index(key_cols);
                r
            }
            Step::Scan { negated: true, pred, key_cols, .. } => {
                let mut r = Relation::from_tuples(context.get(pred).iter().map(tuple_of));
                r.ensure_index(key_cols);
                r
            }
            _ => Relation::default(),
        };
        debug_assert_eq!(pinned.len(), i);
        pinned.push(rel);
    }
    let source = |i: usize| &pinned[i];
    let mut out = Vec::new();
    run(rule, &plan, &source, &mut out)?;
    Ok(out
        .into_iter()
        .map(|t| {
            let id = t[0].to_string();
            Fact::new(rule.head.predicate.clone(), id, t[1..].to_vec())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::{edb_schema, Column};
    use crate::rulelang::{parse_rule_source, synthesize_default_rules};

    fn db(schema: Schema, facts: Vec<Fact>) -> FactDatabase {
        let mut d = FactDatabase::new(DatabaseKind::Edb, schema);
        for f in facts {
            d.push(f);
        }
        d
    }

    fn rules_for(edb: &Schema, extra: &str) -> RuleSet {
        let mut set = RuleSet { declarations: edb.clone(), ..Default::default() };
        set.merge(synthesize_default_rules(edb), "<default>").unwrap();
        set.merge(parse_rule_source(extra).unwrap(), "<extra>").unwrap();
        set.validate().unwrap();
        set
    }

    fn small_schema() -> Schema {
        edb_schema().into_iter().filter(|(k, _)| k == "ILOAD" || k == "VERSION").collect()
    }

    #[test]
    fn version_rule_replaces_version() {
        let schema = small_schema();
        let edb = db(schema.clone(), vec![Fact::new("VERSION", "F42", vec![Term::Num(52)])]);
        let rules = rules_for(
            &schema,
            r#"IDB_VERSION(cat("R_REMOVE_BYTECODE_VERSION", "[", fid, "]"), 0) :- VERSION(fid, v).
               @name(R_REMOVE_BYTECODE_VERSION_GUARD) REMOVED_VERSION(fid) :- VERSION(fid, v)."#,
        );
        let idb = evaluate(&edb, &rules).unwrap();
        assert_eq!(
            idb.get("IDB_VERSION"),
            &[Fact::new("IDB_VERSION", "R_REMOVE_BYTECODE_VERSION[F42]", vec![Term::Num(0)])]
        );
    }

    #[test]
    fn copy_rules_only() {
        let schema = small_schema();
        let edb = db(schema.clone(), vec![Fact::new("ILOAD", "F7", vec!["m()I".into(), Term::Num(1), Term::Num(0)])]);
        let idb = evaluate(&edb, &rules_for(&schema, "")).unwrap();
        assert_eq!(
            idb.get("IDB_ILOAD"),
            &[Fact::new("IDB_ILOAD", "F7", vec!["m()I".into(), "1".into(), Term::Num(0)])]
        );
        assert_eq!(idb.get("IDB_INSTRUCTION"), &[Fact::new("IDB_INSTRUCTION", "F7", vec!["m()I".into(), "1".into()])]);
    }

    #[test]
    fn empty_edb_gives_empty_idb() {
        let schema = small_schema();
        let idb = evaluate(&db(schema.clone(), vec![]), &rules_for(&schema, "")).unwrap();
        assert!(idb.is_empty());
    }

    fn graph_schema() -> Schema {
        let s = |n: &str| Column::new(n, ColumnType::Symbol);
        Schema::from([("E".into(), vec![s("id"), s("a"), s("b")]), ("T".into(), vec![s("id"), s("a"), s("b")])])
    }

    #[test]
    fn transitive_closure_semi_naive() {
        let schema = graph_schema();
        let facts = (0..5)
            .map(|i| {
                Fact::new(
                    "E",
                    format!("F{i}"),
                    vec![Term::Num(i).to_string().into(), Term::Num(i + 1).to_string().into()],
                )
            })
            .collect();
        let edb = db(schema.clone(), facts);
        let mut rules = RuleSet { declarations: schema, ..Default::default() };
        rules
            .merge(
                parse_rule_source(
                    r#"@name(R_BASE) T(cat("R_BASE[", i, "]"), a, b) :- E(i, a, b).
                       @name(R_STEP) T(cat("R_STEP[", i, ",", j, "]"), a, c) :- T(i, a, b), E(j, b, c)."#,
                )
                .unwrap(),
                "x",
            )
            .unwrap();
        let idb = evaluate(&edb, &rules).unwrap();
        let pairs: BTreeSet<(String, String)> =
            idb.get("T").iter().map(|f| (f.terms[0].to_string(), f.terms[1].to_string())).collect();
        assert_eq!(pairs.len(), 15);
        assert!(pairs.contains(&("0".into(), "5".into())));
    }

    #[test]
    fn iteration_cap() {
        let schema = graph_schema();
        let edb = db(schema.clone(), vec![Fact::new("E", "F1", vec!["a".into(), "a".into()])]);
        let mut rules = RuleSet { declarations: schema, ..Default::default() };
        rules
            .merge(
                parse_rule_source(
                    r#"@name(R_BASE) T(cat("R_BASE[", i, "]"), a, b) :- E(i, a, b).
                       @name(R_GROW) T(cat("R_GROW[", i, "]"), a, b) :- T(i, a, b)."#,
                )
                .unwrap(),
                "x",
            )
            .unwrap();
        let err = evaluate_with(&edb, &rules, &EngineOptions { iteration_cap: 50 }).unwrap_err();
        assert_eq!(err, EngineError::IterationCapExceeded { stratum: 0, cap: 50 });
    }

    #[test]
    fn builtin_type_error_surfaces() {
        let schema = graph_schema();
        let edb = db(schema.clone(), vec![Fact::new("E", "F1", vec!["a".into(), "b".into()])]);
        let mut rules = RuleSet { declarations: schema, ..Default::default() };
        rules
            .merge(parse_rule_source(r#"@name(R_X) T(i, a, b) :- E(i, a, b), band(a, 1) = 1."#).unwrap(), "x")
            .unwrap();
        assert!(matches!(evaluate(&edb, &rules), Err(EngineError::BuiltinTypeError { .. })));
    }

    #[test]
    fn head_type_checked() {
        let schema = small_schema();
        let edb = db(schema.clone(), vec![Fact::new("VERSION", "F1", vec![Term::Num(52)])]);
        let rules = rules_for(&schema, r#"IDB_VERSION(cat("R_BAD[", fid, "]"), "zero") :- VERSION(fid, v)."#);
        assert!(matches!(evaluate(&edb, &rules), Err(EngineError::TypeMismatch { .. })));
    }

    #[test]
    fn replay_rederives() {
        let schema = graph_schema();
        let edb = db(
            schema.clone(),
            vec![
                Fact::new("E", "F1", vec!["a".into(), "b".into()]),
                Fact::new("E", "F2", vec!["b".into(), "c".into()]),
            ],
        );
        let src = r#"@name(R_J) T(cat("R_J[", i, ",", j, "]"), a, c) :- E(i, a, b), E(j, b, c)."#;
        let mut rules = RuleSet { declarations: schema, ..Default::default() };
        rules.merge(parse_rule_source(src).unwrap(), "x").unwrap();
        let idb = evaluate(&edb, &rules).unwrap();
        let derived = &idb.get("T")[0];
        assert_eq!(derived.id, "R_J[F1,F2]");
        let f = edb.get("E");
        let again = replay(&rules.rules[0], &[&f[0], &f[1]], &edb).unwrap();
        assert_eq!(again, vec![derived.clone()]);
    }

    #[test]
    fn repeated_variables_in_atom() {
        let schema = graph_schema();
        let edb = db(
            schema.clone(),
            vec![
                Fact::new("E", "F1", vec!["a".into(), "a".into()]),
                Fact::new("E", "F2", vec!["a".into(), "b".into()]),
            ],
        );
        let mut rules = RuleSet { declarations: schema, ..Default::default() };
        rules
            .merge(parse_rule_source(r#"@name(R_L) T(cat("R_L[", i, "]"), a, a) :- E(i, a, a)."#).unwrap(), "x")
            .unwrap();
        let idb = evaluate(&edb, &rules).unwrap();
        assert_eq!(idb.get("T").len(), 1);
    }
}
