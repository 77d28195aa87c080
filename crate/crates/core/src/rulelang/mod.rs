//! The rule language: a small datalog dialect with provenance-carrying IDs.
//!
//! ```text
//! .decl IDB_VERSION(id:symbol, version:number)
//! @name(R_REMOVE_BYTECODE_VERSION)
//! IDB_VERSION(cat("R_REMOVE_BYTECODE_VERSION", "[", fid, "]"), 0) :- VERSION(fid, v).
//! ```
//!
//! `$NAME` tokens are parameters substituted at parse time (the shipped
//! library uses `$STRIDE`).

mod ast;
mod parser;

pub use ast::*;
pub use parser::name_from_head;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::extractor::{is_instruction_predicate, render_decl, Column, ColumnType, Schema};

pub const GUARD_PREFIX: &str = "REMOVED_";
pub const IDB_PREFIX: &str = "IDB_";
pub const INSTRUCTION_GUARD: &str = "REMOVED_INSTRUCTION";
pub const INSTRUCTION_INDEX: &str = "IDB_INSTRUCTION";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("{file}:{line}:{column}: syntax error: {message}")]
    Syntax { file: String, line: usize, column: usize, message: String },
    #[error("rule {rule}: undeclared predicate {predicate}")]
    UndeclaredPredicate { rule: String, predicate: String },
    #[error("rule {rule}: {predicate} expects {expected} arguments, found {found}")]
    ArityMismatch { rule: String, predicate: String, expected: usize, found: usize },
    #[error("rule {rule}: variable {variable} is not bound by a positive body atom")]
    RangeRestrictionViolation { rule: String, variable: String },
    #[error("rule {rule}: head ID does not record premise ID {premise}")]
    ProvenanceIncomplete { rule: String, premise: String },
    #[error("rule {rule}: {message}")]
    InvalidRule { rule: String, message: String },
    #[error("predicate {predicate} redeclared with a different shape at {file}")]
    ConflictingDeclaration { predicate: String, file: String },
    #[error("duplicate rule name {name} (in {file})")]
    DuplicateRule { name: String, file: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Partition a rule file belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Soundness {
    Core,
    Sound,
    Soundy,
}

impl Soundness {
    pub fn name(self) -> &'static str {
        match self {
            Soundness::Core => "core",
            Soundness::Sound => "sound",
            Soundness::Soundy => "soundy",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    pub declarations: Schema,
    pub rules: Vec<Rule>,
    /// Rule file to its partition.
    pub soundness_tags: BTreeMap<String, Soundness>,
    /// Rule name to the file it came from.
    pub origins: BTreeMap<String, String>,
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.declarations == other.declarations && self.rules == other.rules
    }
}

pub type Params = BTreeMap<String, i64>;

pub fn default_params() -> Params {
    Params::from([("STRIDE".to_string(), 1)])
}

pub fn parse_rule_source(text: &str) -> Result<RuleSet, RuleError> {
    parse_rule_source_with(text, "<input>", &default_params())
}

pub fn parse_rule_source_with(text: &str, file: &str, params: &Params) -> Result<RuleSet, RuleError> {
    parser::parse(text, file, params)
}

impl RuleSet {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn rule_names(&self) -> BTreeSet<&str> {
        self.rules.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn add_rule(&mut self, rule: Rule, file: &str) -> Result<(), RuleError> {
        if self.origins.contains_key(&rule.name) {
            return Err(RuleError::DuplicateRule { name: rule.name, file: file.to_string() });
        }
        self.origins.insert(rule.name.clone(), file.to_string());
        self.rules.push(rule);
        Ok(())
    }

    pub fn declare(&mut self, name: &str, columns: Vec<Column>, file: &str) -> Result<(), RuleError> {
        if let Some(existing) = self.declarations.get(name) {
            let same = existing.len() == columns.len() && existing.iter().zip(&columns).all(|(a, b)| a.ty == b.ty);
            if !same {
                return Err(RuleError::ConflictingDeclaration { predicate: name.to_string(), file: file.to_string() });
            }
            return Ok(());
        }
        self.declarations.insert(name.to_string(), columns);
        Ok(())
    }

    /// Appends `other`; declarations must agree, rule names must not clash.
    pub fn merge(&mut self, other: RuleSet, file: &str) -> Result<(), RuleError> {
        for (name, cols) in other.declarations {
            self.declare(&name, cols, file)?;
        }
        for rule in other.rules {
            let origin = other.origins.get(&rule.name).cloned().unwrap_or_else(|| file.to_string());
            self.add_rule(rule, &origin)?;
        }
        self.soundness_tags.extend(other.soundness_tags);
        Ok(())
    }

    /// Declarations and rules as rule-language text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, cols) in &self.declarations {
            out.push_str(&render_decl(name, cols));
            out.push('\n');
        }
        for rule in &self.rules {
            out.push('\n');
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }

    /// Predicates appearing in some rule head.
    pub fn derived_predicates(&self) -> BTreeSet<&str> {
        self.rules.iter().map(|r| r.head.predicate.as_str()).collect()
    }

    /// Full well-formedness check of a merged rule set.
    pub fn validate(&self) -> Result<(), RuleError> {
        for rule in &self.rules {
            let atoms = std::iter::once(&rule.head).chain(rule.body.iter().filter_map(|l| match l {
                Literal::Pos(a) | Literal::Neg(a) => Some(a),
                Literal::Cmp(..) => None,
            }));
            for atom in atoms {
                let cols = self.declarations.get(&atom.predicate).ok_or_else(|| RuleError::UndeclaredPredicate {
                    rule: rule.name.clone(),
                    predicate: atom.predicate.clone(),
                })?;
                if cols.len() != atom.args.len() {
                    return Err(RuleError::ArityMismatch {
                        rule: rule.name.clone(),
                        predicate: atom.predicate.clone(),
                        expected: cols.len(),
                        found: atom.args.len(),
                    });
                }
            }
            check_range_restriction(rule)?;
            check_provenance(rule)?;
        }
        self.check_negation()
    }

    /// Negation may only target guard predicates or predicates no rule
    /// derives.
    pub fn check_negation(&self) -> Result<(), RuleError> {
        let derived = self.derived_predicates();
        for rule in &self.rules {
            for a in rule.negated_atoms() {
                if !a.predicate.starts_with(GUARD_PREFIX) && derived.contains(a.predicate.as_str()) {
                    return Err(RuleError::InvalidRule {
                        rule: rule.name.clone(),
                        message: format!("negation of derived predicate {}", a.predicate),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Every variable in the head, in a negated atom or in a constraint must be
/// bound by a positive atom or by an assignment from bound variables.
pub fn check_range_restriction(rule: &Rule) -> Result<(), RuleError> {
    let invalid = |message: String| RuleError::InvalidRule { rule: rule.name.clone(), message };
    if rule.head.args.iter().any(Expr::has_wildcard) {
        return Err(invalid("wildcard in rule head".into()));
    }
    for l in &rule.body {
        match l {
            Literal::Pos(a) | Literal::Neg(a) => {
                if a.args.iter().any(|e| matches!(e, Expr::Call(..))) {
                    return Err(invalid(format!("function call inside body atom {}", a.predicate)));
                }
            }
            Literal::Cmp(x, _, y) => {
                if x.has_wildcard() || y.has_wildcard() {
                    return Err(invalid("wildcard in constraint".into()));
                }
            }
        }
    }
    let bound = rule.bound_vars();
    let mut needed = rule.head.vars();
    for l in &rule.body {
        match l {
            Literal::Neg(a) => needed.extend(a.vars()),
            Literal::Cmp(x, _, y) => {
                x.vars(&mut needed);
                y.vars(&mut needed);
            }
            Literal::Pos(_) => {}
        }
    }
    if let Some(v) = needed.difference(&bound).next() {
        return Err(RuleError::RangeRestrictionViolation { rule: rule.name.clone(), variable: v.clone() });
    }
    Ok(())
}

/// Guard rules (heads on `REMOVED_*`) only name the fact they suppress.
pub fn is_guard_rule(rule: &Rule) -> bool {
    rule.head.predicate.starts_with(GUARD_PREFIX)
}

/// The head ID must be a premise ID passed through, or a `cat` naming the
/// rule and covering the IDs of all positive premises.
pub fn check_provenance(rule: &Rule) -> Result<(), RuleError> {
    if is_guard_rule(rule) {
        return Ok(());
    }
    let invalid = |message: &str| RuleError::InvalidRule { rule: rule.name.clone(), message: message.to_string() };
    let id = &rule.head.args[0];
    let mut id_vars = BTreeSet::new();
    id.vars(&mut id_vars);
    match id {
        Expr::Var(_) => {}
        Expr::Call(Builtin::Cat, _) => {
            if name_from_head(&rule.head).as_deref() != Some(rule.name.as_str()) {
                return Err(invalid("head ID must start with the rule name"));
            }
        }
        _ => return Err(invalid("head ID must be a premise ID or a cat expression")),
    }
    for a in rule.positive_atoms() {
        match &a.args[0] {
            Expr::Var(v) if id_vars.contains(v) => {}
            other => {
                return Err(RuleError::ProvenanceIncomplete {
                    rule: rule.name.clone(),
                    premise: format!("{} of {}", other, a.predicate),
                })
            }
        }
    }
    Ok(())
}

/// One rule file: path relative to its root, contents and partition.
#[derive(Debug, Clone)]
pub struct RuleFile {
    pub path: String,
    pub text: String,
    pub soundness: Soundness,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub include_soundy: bool,
    pub stride: i64,
    /// Further rule roots, merged after the main root in order.
    pub extra_roots: Vec<PathBuf>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { include_soundy: true, stride: 1, extra_roots: Vec::new() }
    }
}

/// Partition of a rule file from its location below a root.
pub fn classify_path(rel: &str) -> Soundness {
    let parts: Vec<&str> = rel.split('/').collect();
    if parts.len() == 1 && parts[0].starts_with("core.") || parts[0] == "commons" {
        Soundness::Core
    } else if parts.contains(&"soundy") {
        Soundness::Soundy
    } else {
        Soundness::Sound
    }
}

fn load_order(rel: &str) -> u8 {
    let parts: Vec<&str> = rel.split('/').collect();
    match parts.as_slice() {
        [f] if f.starts_with("core.") => 0,
        ["commons", ..] => 1,
        ["normalisations", "sound", ..] => 2,
        ["normalisations", "soundy", ..] => 3,
        _ => 4,
    }
}

fn walk(dir: &Path, root: &Path, out: &mut Vec<RuleFile>) -> Result<(), RuleError> {
    let io = |e: std::io::Error| RuleError::Io { path: dir.to_path_buf(), message: e.to_string() };
    let mut entries: Vec<PathBuf> =
        fs::read_dir(dir).map_err(io)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, root, out)?;
        } else if p.extension().is_some_and(|e| e == "rules") {
            let rel = p
                .strip_prefix(root)
                .unwrap_or(&p)
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            let text = fs::read_to_string(&p).map_err(|e| RuleError::Io { path: p.clone(), message: e.to_string() })?;
            out.push(RuleFile { soundness: classify_path(&rel), path: rel, text });
        }
    }
    Ok(())
}

/// All `.rules` files below `root` in load order.
pub fn collect_rule_files(root: &Path) -> Result<Vec<RuleFile>, RuleError> {
    let mut files = Vec::new();
    walk(root, root, &mut files)?;
    files.sort_by(|a, b| (load_order(&a.path), &a.path).cmp(&(load_order(&b.path), &b.path)));
    Ok(files)
}

/// Parses and merges files, dropping soundy ones unless requested.
pub fn assemble(files: &[RuleFile], include_soundy: bool, params: &Params, label: &str) -> Result<RuleSet, RuleError> {
    let mut set = RuleSet::default();
    for f in files {
        if f.soundness == Soundness::Soundy && !include_soundy {
            continue;
        }
        let name = if label.is_empty() { f.path.clone() } else { format!("{label}/{}", f.path) };
        let mut frag = parse_rule_source_with(&f.text, &name, params)?;
        frag.soundness_tags.insert(name.clone(), f.soundness);
        set.merge(frag, &name)?;
    }
    Ok(set)
}

pub fn load_rules(root: &Path, include_soundy: bool) -> Result<RuleSet, RuleError> {
    load_rules_with(root, &LoadOptions { include_soundy, ..Default::default() })
}

pub fn load_rules_with(root: &Path, options: &LoadOptions) -> Result<RuleSet, RuleError> {
    let params = Params::from([("STRIDE".to_string(), options.stride)]);
    let mut set = assemble(&collect_rule_files(root)?, options.include_soundy, &params, &root.display().to_string())?;
    for extra in &options.extra_roots {
        let more =
            assemble(&collect_rule_files(extra)?, options.include_soundy, &params, &extra.display().to_string())?;
        set.merge(more, &extra.display().to_string())?;
    }
    Ok(set)
}

fn var(s: &str) -> Expr {
    Expr::Var(s.to_string())
}

/// Default rules copying every EDB predicate into its `IDB_` counterpart
/// unless a guard fact suppresses it.
pub fn synthesize_default_rules(edb_schema: &Schema) -> RuleSet {
    let mut set = RuleSet::default();
    let file = "<default>";
    let id = Column::new("id", ColumnType::Symbol);
    let mut any_instruction = false;
    for (pred, cols) in edb_schema {
        let instruction = is_instruction_predicate(cols);
        let mut idb_cols = cols.clone();
        let mut body_args = vec![var("fid")];
        let mut head_args = vec![var("fid")];
        for (i, c) in cols.iter().enumerate().skip(1) {
            let v = var(&format!("v_{}", c.name));
            body_args.push(v.clone());
            if instruction && i == 2 {
                idb_cols[i].ty = ColumnType::Symbol;
                head_args.push(Expr::Call(Builtin::Cat, vec![v, Expr::Sym(String::new())]));
            } else {
                head_args.push(v);
            }
        }
        let idb = format!("{IDB_PREFIX}{pred}");
        let guard = if instruction { INSTRUCTION_GUARD.to_string() } else { format!("{GUARD_PREFIX}{pred}") };
        set.declarations.insert(idb.clone(), idb_cols);
        set.declarations.insert(guard.clone(), vec![id.clone()]);
        let copy = Rule {
            name: format!("COPY_{pred}"),
            head: Atom { predicate: idb.clone(), args: head_args },
            body: vec![
                Literal::Pos(Atom { predicate: pred.clone(), args: body_args }),
                Literal::Neg(Atom { predicate: guard, args: vec![var("fid")] }),
            ],
        };
        set.add_rule(copy, file).expect("unique generated names");
        if instruction {
            any_instruction = true;
            let mut args = vec![var("id"), var("m"), var("c")];
            args.extend(std::iter::repeat_n(Expr::Wildcard, cols.len() - 3));
            let index = Rule {
                name: format!("INSTRUCTION_{pred}"),
                head: Atom { predicate: INSTRUCTION_INDEX.into(), args: vec![var("id"), var("m"), var("c")] },
                body: vec![Literal::Pos(Atom { predicate: idb, args })],
            };
            set.add_rule(index, file).expect("unique generated names");
        }
    }
    if any_instruction {
        set.declarations.insert(
            INSTRUCTION_INDEX.into(),
            vec![id, Column::new("method", ColumnType::Symbol), Column::new("counter", ColumnType::Symbol)],
        );
    }
    set
}
