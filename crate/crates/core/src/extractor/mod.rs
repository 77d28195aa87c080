//! EDB extraction: turns a [`ClassModel`] into relational facts.
//!
//! Global facts describe the class and its members, instruction facts
//! describe method bodies, one predicate per logical opcode mnemonic. Labels
//! are renamed `label1`, `label2`, ... in first-use order and unreferenced
//! labels are dropped, so incidental differences in label identity and
//! debug-only positions do not show up in the database.

mod facts;
mod tsv;

pub use facts::*;
pub use tsv::{escape, parse_database, parse_schema, serialize_database, unescape, TsvError, SCHEMA_FILE};

use std::collections::HashMap;

use crate::classfile::descriptor::{as_reference_operand, return_type};
use crate::classfile::opcodes::{self, Family};
use crate::classfile::{
    array_type_name, ClassAttribute, ClassModel, CodeItem, InstructionSeq, LabelId, MemberModel, Operand,
};

/// Symbol used for absent optional values.
pub const ABSENT: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionConfig {
    pub counter_start: i64,
    pub counter_stride: i64,
    pub include_source_file: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { counter_start: 1, counter_stride: 1, include_source_file: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("counter stride must be at least 1, got {0}")]
    InvalidStride(i64),
}

use ColumnType::{Number as N, Symbol as S};

const GLOBAL_PREDICATES: &[(&str, &[(&str, ColumnType)])] = &[
    ("VERSION", &[("version", N)]),
    ("CLASSNAME", &[("name", S)]),
    ("SUPERCLASS", &[("name", S)]),
    ("INTERFACE", &[("position", N), ("name", S)]),
    ("ACCESS", &[("element", S), ("flags", N)]),
    ("FIELD", &[("name", S), ("descriptor", S)]),
    ("METHOD", &[("name", S), ("descriptor", S)]),
    ("SIGNATURE", &[("element", S), ("signature", S)]),
    ("ANNOTATION", &[("element", S), ("descriptor", S), ("values", S)]),
    ("ANNOTATIONDEFAULT", &[("element", S), ("value", S)]),
    ("INNERCLASS", &[("inner", S), ("outer", S), ("innername", S), ("flags", N)]),
    ("SOURCEFILE", &[("name", S)]),
    ("ENCLOSINGMETHOD", &[("class", S), ("element", S)]),
    ("NESTHOST", &[("name", S)]),
    ("NESTMEMBER", &[("name", S)]),
    ("PERMITTEDSUBCLASS", &[("name", S)]),
    ("RECORDCOMPONENT", &[("position", N), ("name", S), ("descriptor", S), ("signature", S)]),
    ("EXCEPTION", &[("element", S), ("position", N), ("type", S)]),
    ("CONSTANTVALUE", &[("element", S), ("kind", S), ("value", S)]),
    ("TRYCATCH", &[("element", S), ("position", N), ("start", S), ("end", S), ("handler", S), ("type", S)]),
];

/// Operand columns of an instruction predicate, after `(id, method, counter)`.
fn operand_columns(family: Family) -> &'static [(&'static str, ColumnType)] {
    match family {
        Family::Simple => &[],
        Family::Var | Family::VarImplicit(_) | Family::Ret => &[("var", N)],
        Family::Iinc => &[("var", N), ("increment", N)],
        Family::Bipush | Family::Sipush => &[("value", N)],
        Family::Newarray => &[("type", S)],
        Family::Ldc | Family::LdcWide => &[("kind", S), ("value", S)],
        Family::Field => &[("owner", S), ("name", S), ("descriptor", S)],
        Family::Method | Family::InvokeInterface => &[("owner", S), ("name", S), ("descriptor", S), ("returntype", S)],
        Family::InvokeDynamic => &[("name", S), ("descriptor", S), ("bootstrap", S)],
        Family::Type => &[("type", S)],
        Family::MultiANewArray => &[("type", S), ("dimensions", N)],
        Family::Jump | Family::JumpWide => &[("label", S)],
        Family::TableSwitch => &[("low", N), ("high", N), ("default", S), ("labels", S)],
        Family::LookupSwitch => &[("default", S), ("pairs", S)],
        Family::Wide => &[],
    }
}

/// Predicate name of an instruction mnemonic.
pub fn instruction_predicate(mnemonic: &str) -> String {
    mnemonic.to_ascii_uppercase()
}

fn columns(spec: &[(&str, ColumnType)], instruction: bool) -> Vec<Column> {
    let mut cols = vec![Column::new("id", S)];
    if instruction {
        cols.push(Column::new("method", S));
        cols.push(Column::new("counter", N));
    }
    cols.extend(spec.iter().map(|(n, t)| Column::new(n, *t)));
    cols
}

/// The fixed EDB schema: global predicates, one predicate per logical
/// opcode, and `LABEL`.
pub fn edb_schema() -> Schema {
    let mut schema = Schema::new();
    for (name, spec) in GLOBAL_PREDICATES {
        schema.insert(name.to_string(), columns(spec, false));
    }
    for info in opcodes::logical() {
        schema.insert(instruction_predicate(info.mnemonic), columns(operand_columns(info.family), true));
    }
    schema.insert("LABEL".into(), columns(&[("name", S)], true));
    schema
}

/// Element reference of a method: name followed by descriptor.
pub fn method_ref(name: &str, descriptor: &str) -> String {
    format!("{name}{descriptor}")
}

/// Element reference of a field: `name:descriptor`.
pub fn field_ref(name: &str, descriptor: &str) -> String {
    format!("{name}:{descriptor}")
}

struct Emitter {
    db: FactDatabase,
    next: u64,
}

impl Emitter {
    fn emit(&mut self, predicate: &str, terms: Vec<Term>) {
        self.next += 1;
        let id = format!("F{}", self.next);
        self.db.push(Fact::new(predicate, id, terms));
    }
}

fn opt(s: Option<&str>) -> Term {
    Term::sym(s.unwrap_or(ABSENT))
}

pub fn extract_edb(model: &ClassModel, config: &ExtractionConfig) -> Result<FactDatabase, ExtractError> {
    if config.counter_stride < 1 {
        return Err(ExtractError::InvalidStride(config.counter_stride));
    }
    let mut e = Emitter { db: FactDatabase::new(DatabaseKind::Edb, edb_schema()), next: 0 };
    let class = model.this_class.as_str();

    e.emit("VERSION", vec![Term::Num(model.major_version as i64)]);
    e.emit("CLASSNAME", vec![class.into()]);
    e.emit("SUPERCLASS", vec![opt(model.super_class.as_deref())]);
    for (i, iface) in model.interfaces.iter().enumerate() {
        e.emit("INTERFACE", vec![Term::Num(i as i64), iface.as_str().into()]);
    }
    e.emit("ACCESS", vec![class.into(), Term::Num(model.access_flags as i64)]);
    for attr in &model.attributes {
        match attr {
            ClassAttribute::Signature(s) => e.emit("SIGNATURE", vec![class.into(), s.as_str().into()]),
            ClassAttribute::Annotations(annos) => {
                for a in annos {
                    e.emit("ANNOTATION", vec![class.into(), a.type_descriptor.as_str().into(), a.values_text().into()]);
                }
            }
            ClassAttribute::InnerClasses(entries) => {
                for ic in entries {
                    e.emit(
                        "INNERCLASS",
                        vec![
                            ic.inner.as_str().into(),
                            opt(ic.outer.as_deref()),
                            opt(ic.inner_name.as_deref()),
                            Term::Num(ic.access_flags as i64),
                        ],
                    );
                }
            }
            ClassAttribute::SourceFile(s) => {
                if config.include_source_file {
                    e.emit("SOURCEFILE", vec![s.as_str().into()]);
                }
            }
            ClassAttribute::BootstrapMethods(_) => {}
            ClassAttribute::EnclosingMethod { class: c, method } => {
                let m = method.as_ref().map(|(n, d)| method_ref(n, d));
                e.emit("ENCLOSINGMETHOD", vec![c.as_str().into(), opt(m.as_deref())]);
            }
            ClassAttribute::NestHost(h) => e.emit("NESTHOST", vec![h.as_str().into()]),
            ClassAttribute::NestMembers(ms) => {
                for m in ms {
                    e.emit("NESTMEMBER", vec![m.as_str().into()]);
                }
            }
            ClassAttribute::PermittedSubclasses(ps) => {
                for p in ps {
                    e.emit("PERMITTEDSUBCLASS", vec![p.as_str().into()]);
                }
            }
            ClassAttribute::Record(comps) => {
                for (i, c) in comps.iter().enumerate() {
                    e.emit(
                        "RECORDCOMPONENT",
                        vec![
                            Term::Num(i as i64),
                            c.name.as_str().into(),
                            c.descriptor.as_str().into(),
                            opt(c.signature.as_deref()),
                        ],
                    );
                }
            }
        }
    }

    for f in &model.fields {
        let r = field_ref(&f.name, &f.descriptor);
        e.emit("FIELD", vec![f.name.as_str().into(), f.descriptor.as_str().into()]);
        member_facts(&mut e, f, &r);
        if let Some(c) = &f.constant_value {
            e.emit("CONSTANTVALUE", vec![r.as_str().into(), c.kind().into(), c.canonical().into()]);
        }
    }
    for m in &model.methods {
        let r = method_ref(&m.name, &m.descriptor);
        e.emit("METHOD", vec![m.name.as_str().into(), m.descriptor.as_str().into()]);
        member_facts(&mut e, m, &r);
        for (i, params) in m.parameter_annotations.iter().enumerate() {
            let pr = format!("{r}#{i}");
            for a in params {
                e.emit(
                    "ANNOTATION",
                    vec![pr.as_str().into(), a.type_descriptor.as_str().into(), a.values_text().into()],
                );
            }
        }
        for (i, x) in m.exceptions.iter().enumerate() {
            e.emit("EXCEPTION", vec![r.as_str().into(), Term::Num(i as i64), x.as_str().into()]);
        }
        if let Some(d) = &m.annotation_default {
            e.emit("ANNOTATIONDEFAULT", vec![r.as_str().into(), d.to_string().into()]);
        }
        if let Some(code) = &m.code {
            code_facts(&mut e, code, &r, config);
        }
    }
    Ok(e.db)
}

fn member_facts(e: &mut Emitter, m: &MemberModel, r: &str) {
    e.emit("ACCESS", vec![r.into(), Term::Num(m.access_flags as i64)]);
    if let Some(s) = &m.signature {
        e.emit("SIGNATURE", vec![r.into(), s.as_str().into()]);
    }
    for a in &m.annotations {
        e.emit("ANNOTATION", vec![r.into(), a.type_descriptor.as_str().into(), a.values_text().into()]);
    }
}

/// Assigns `label1`, `label2`, ... to referenced labels in order of first
/// appearance, either at their position or as a jump/switch/handler target.
pub fn label_names(code: &InstructionSeq) -> HashMap<LabelId, String> {
    let mut used: std::collections::HashSet<LabelId> = std::collections::HashSet::new();
    for tc in &code.try_catch {
        used.extend([tc.start, tc.end, tc.handler]);
    }
    for insn in code.instructions() {
        used.extend(insn.targets());
    }
    let mut names = HashMap::new();
    let name = |l: LabelId, names: &mut HashMap<LabelId, String>| {
        let n = names.len() + 1;
        names.entry(l).or_insert_with(|| format!("label{n}"));
    };
    for item in &code.items {
        match item {
            CodeItem::Label(l) if used.contains(l) => name(*l, &mut names),
            CodeItem::Label(_) => {}
            CodeItem::Insn(insn) => {
                for t in insn.targets() {
                    name(t, &mut names);
                }
            }
        }
    }
    names
}

fn code_facts(e: &mut Emitter, code: &InstructionSeq, mref: &str, config: &ExtractionConfig) {
    let names = label_names(code);
    let label = |l: &LabelId| Term::sym(names[l].clone());
    let mut counter = config.counter_start;
    for item in &code.items {
        let (pred, operands) = match item {
            CodeItem::Label(l) => match names.get(l) {
                Some(n) => ("LABEL".to_string(), vec![Term::sym(n.clone())]),
                None => continue,
            },
            CodeItem::Insn(insn) => {
                let ops: Vec<Term> = match &insn.operand {
                    Operand::None => vec![],
                    Operand::Var(v) => vec![Term::Num(*v as i64)],
                    Operand::Iinc { var, delta } => vec![Term::Num(*var as i64), Term::Num(*delta as i64)],
                    Operand::Int(v) => vec![Term::Num(*v as i64)],
                    Operand::ArrayType(t) => {
                        vec![Term::sym(array_type_name(*t).map(str::to_string).unwrap_or_else(|| t.to_string()))]
                    }
                    Operand::Constant(c) => vec![c.kind().into(), c.canonical().into()],
                    Operand::Field { owner, name, descriptor } => {
                        vec![owner.as_str().into(), name.as_str().into(), descriptor.as_str().into()]
                    }
                    Operand::Method { owner, name, descriptor, .. } => vec![
                        owner.as_str().into(),
                        name.as_str().into(),
                        descriptor.as_str().into(),
                        opt(as_reference_operand(return_type(descriptor))),
                    ],
                    Operand::InvokeDynamic { name, descriptor, bootstrap } => {
                        vec![name.as_str().into(), descriptor.as_str().into(), bootstrap.to_string().into()]
                    }
                    Operand::Type(t) => vec![t.as_str().into()],
                    Operand::MultiANewArray { class, dimensions } => {
                        vec![class.as_str().into(), Term::Num(*dimensions as i64)]
                    }
                    Operand::Jump(l) => vec![label(l)],
                    Operand::TableSwitch { low, high, default, targets } => {
                        let ls: Vec<String> = targets.iter().map(|t| names[t].clone()).collect();
                        vec![Term::Num(*low as i64), Term::Num(*high as i64), label(default), ls.join(",").into()]
                    }
                    Operand::LookupSwitch { default, pairs } => {
                        let ps: Vec<String> = pairs.iter().map(|(k, t)| format!("{k}:{}", names[t])).collect();
                        vec![label(default), ps.join(",").into()]
                    }
                };
                (instruction_predicate(insn.mnemonic()), ops)
            }
        };
        let mut terms = vec![Term::sym(mref), Term::Num(counter)];
        terms.extend(operands);
        e.emit(&pred, terms);
        counter += config.counter_stride;
    }
    for (i, tc) in code.try_catch.iter().enumerate() {
        e.emit(
            "TRYCATCH",
            vec![
                mref.into(),
                Term::Num(i as i64),
                label(&tc.start),
                label(&tc.end),
                label(&tc.handler),
                opt(tc.catch_type.as_deref()),
            ],
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classfile::opcodes::lookup;
    use crate::classfile::{Instruction, TryCatchBlock};

    fn insn(code: u8, operand: Operand) -> CodeItem {
        CodeItem::Insn(Instruction { op: lookup(code).unwrap(), operand })
    }

    fn class_with(code: InstructionSeq) -> ClassModel {
        let mut m = MemberModel::new("m", "()I", 0);
        m.code = Some(code);
        ClassModel {
            major_version: 52,
            minor_version: 0,
            access_flags: 0x21,
            this_class: "A".into(),
            super_class: Some("java/lang/Object".into()),
            interfaces: vec![],
            fields: vec![],
            methods: vec![m],
            attributes: vec![],
        }
    }

    fn terms(db: &FactDatabase, pred: &str) -> Vec<Vec<Term>> {
        db.get(pred).iter().map(|f| f.terms.clone()).collect()
    }

    #[test]
    fn version_fact_is_first() {
        let db = extract_edb(&class_with(InstructionSeq::default()), &ExtractionConfig::default()).unwrap();
        assert_eq!(db.get("VERSION"), &[Fact::new("VERSION", "F1", vec![Term::Num(52)])]);
    }

    #[test]
    fn counters_follow_config() {
        let code =
            InstructionSeq { items: vec![insn(0x1a, Operand::Var(0)), insn(0xac, Operand::None)], try_catch: vec![] };
        let db = extract_edb(&class_with(code.clone()), &ExtractionConfig::default()).unwrap();
        assert_eq!(terms(&db, "ILOAD"), vec![vec!["m()I".into(), Term::Num(1), Term::Num(0)]]);
        assert_eq!(terms(&db, "IRETURN"), vec![vec!["m()I".into(), Term::Num(2)]]);

        let cfg = ExtractionConfig { counter_start: 100, counter_stride: 10, ..Default::default() };
        let db = extract_edb(&class_with(code), &cfg).unwrap();
        assert_eq!(terms(&db, "IRETURN"), vec![vec!["m()I".into(), Term::Num(110)]]);
    }

    #[test]
    fn unused_labels_are_dropped() {
        let code = InstructionSeq {
            items: vec![
                CodeItem::Label(LabelId(7)),
                insn(0x03, Operand::None),
                CodeItem::Label(LabelId(3)),
                insn(0xa7, Operand::Jump(LabelId(3))),
            ],
            try_catch: vec![],
        };
        let db = extract_edb(&class_with(code), &ExtractionConfig::default()).unwrap();
        assert_eq!(terms(&db, "LABEL"), vec![vec!["m()I".into(), Term::Num(2), "label1".into()]]);
        assert_eq!(terms(&db, "GOTO"), vec![vec!["m()I".into(), Term::Num(3), "label1".into()]]);
    }

    #[test]
    fn forward_targets_named_at_first_reference() {
        let code = InstructionSeq {
            items: vec![
                insn(0x99, Operand::Jump(LabelId(9))),
                CodeItem::Label(LabelId(1)),
                insn(0xa7, Operand::Jump(LabelId(1))),
                CodeItem::Label(LabelId(9)),
                insn(0xb1, Operand::None),
            ],
            try_catch: vec![TryCatchBlock {
                start: LabelId(1),
                end: LabelId(9),
                handler: LabelId(9),
                catch_type: None,
            }],
        };
        let names = label_names(&code);
        assert_eq!(names[&LabelId(9)], "label1");
        assert_eq!(names[&LabelId(1)], "label2");
        let db = extract_edb(&class_with(code), &ExtractionConfig::default()).unwrap();
        assert_eq!(
            terms(&db, "TRYCATCH"),
            vec![vec!["m()I".into(), Term::Num(0), "label2".into(), "label1".into(), "label1".into(), "-".into()]]
        );
    }

    #[test]
    fn ids_are_unique_and_sequential() {
        let code =
            InstructionSeq { items: vec![insn(0x1a, Operand::Var(0)), insn(0xac, Operand::None)], try_catch: vec![] };
        let db = extract_edb(&class_with(code), &ExtractionConfig::default()).unwrap();
        let mut ids: Vec<u64> = db.iter().map(|f| f.id[1..].parse().unwrap()).collect();
        ids.sort();
        assert_eq!(ids, (1..=db.len() as u64).collect::<Vec<_>>());
    }

    #[test]
    fn schema_marks_instruction_predicates() {
        let s = edb_schema();
        assert!(is_instruction_predicate(&s["ILOAD"]));
        assert!(is_instruction_predicate(&s["LABEL"]));
        assert!(!is_instruction_predicate(&s["TRYCATCH"]));
        assert!(!is_instruction_predicate(&s["VERSION"]));
        assert_eq!(s.values().filter(|c| is_instruction_predicate(c)).count(), 158);
    }

    #[test]
    fn zero_stride_rejected() {
        let cfg = ExtractionConfig { counter_stride: 0, ..Default::default() };
        assert!(extract_edb(&class_with(InstructionSeq::default()), &cfg).is_err());
    }
}
