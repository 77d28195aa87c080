//! Generators for the rule files that are mechanical per predicate.

use crate::extractor::{edb_schema, is_instruction_predicate};

const HEADER: &str = "// Generated file, see rules_library::generate. Do not edit by hand.\n";

/// Access flags decoded for every element kind.
const ALL_FLAGS: &[(&str, u16)] = &[
    ("PUBLIC", 0x0001),
    ("PRIVATE", 0x0002),
    ("PROTECTED", 0x0004),
    ("STATIC", 0x0008),
    ("FINAL", 0x0010),
    ("NATIVE", 0x0100),
    ("INTERFACE", 0x0200),
    ("ABSTRACT", 0x0400),
    ("STRICT", 0x0800),
    ("SYNTHETIC", 0x1000),
    ("ANNOTATION", 0x2000),
    ("ENUM", 0x4000),
];

/// Bits whose meaning depends on the element kind.
const METHOD_FLAGS: &[(&str, u16)] = &[("SYNCHRONIZED", 0x0020), ("BRIDGE", 0x0040), ("VARARGS", 0x0080)];
const FIELD_FLAGS: &[(&str, u16)] = &[("VOLATILE", 0x0040), ("TRANSIENT", 0x0080)];

pub fn access_rules() -> String {
    let mut out = String::from(HEADER);
    out.push_str("// Readable facts for integer-encoded access flags.\n\n");
    let mut names: Vec<&str> = ALL_FLAGS.iter().chain(METHOD_FLAGS).chain(FIELD_FLAGS).map(|f| f.0).collect();
    names.sort();
    for n in &names {
        out.push_str(&format!(".decl ACC_{n}(id:symbol, element:symbol)\n"));
    }
    for (name, bit) in ALL_FLAGS {
        out.push_str(&format!(
            "\n@name(R_ACC_{name})\nACC_{name}(cat(\"R_ACC_{name}\", \"[\", id, \"]\"), ref) :-\n    IDB_ACCESS(id, ref, f),\n    band(f, {bit}) = {bit}.\n"
        ));
    }
    for (kinds, pred, sep) in [(METHOD_FLAGS, "IDB_METHOD", ""), (FIELD_FLAGS, "IDB_FIELD", ":")] {
        for (name, bit) in kinds {
            let join = if sep.is_empty() { "cat(n, d)".to_string() } else { format!("cat(n, \"{sep}\", d)") };
            out.push_str(&format!(
                "\n@name(R_ACC_{name})\nACC_{name}(cat(\"R_ACC_{name}\", \"[\", id, \",\", mid, \"]\"), ref) :-\n    IDB_ACCESS(id, ref, f),\n    band(f, {bit}) = {bit},\n    {pred}(mid, n, d),\n    ref = {join}.\n"
            ));
        }
    }
    out
}

/// Flag mask of a private static synthetic method.
const PRIVATE_STATIC_SYNTHETIC: u16 = 0x0002 | 0x0008 | 0x1000;

pub fn inline_values_rules() -> String {
    let mask = PRIVATE_STATIC_SYNTHETIC;
    let callee = format!(
        "METHOD(mid, \"$values\", d),\n    vm = cat(\"$values\", d),\n    ACCESS(aid, vm, fl),\n    band(fl, {mask}) = {mask}"
    );
    let callee_anon = format!(
        "METHOD(_, \"$values\", d),\n    vm = cat(\"$values\", d),\n    ACCESS(_, vm, fl),\n    band(fl, {mask}) = {mask}"
    );
    let call = "INVOKESTATIC(cid, \"<clinit>()V\", cc, cls, \"$values\", d, _),\n    CLASSNAME(nid, cls)";

    let mut out = String::from(HEADER);
    out.push_str("// Inlines the enum helper $values() into its call site in <clinit>.\n");
    out.push_str("// Callee instructions are re-emitted at order keys cc.k below the call.\n");
    out.push_str(&format!("\n@name(R_INLINE_VALUES)\nREMOVED_INSTRUCTION(cid) :-\n    {call},\n    {callee}.\n"));
    out.push_str(&format!("\n@name(R_INLINE_VALUES_DECLARATION)\nREMOVED_METHOD(mid) :-\n    {callee}.\n"));
    out.push_str(&format!("\n@name(R_INLINE_VALUES_FLAGS)\nREMOVED_ACCESS(aid) :-\n    {callee}.\n"));

    for (pred, cols) in edb_schema() {
        if !is_instruction_predicate(&cols) {
            continue;
        }
        let ops: Vec<String> = cols[3..].iter().map(|c| format!("o_{}", c.name)).collect();
        let wild: Vec<&str> = cols[3..].iter().map(|_| "_").collect();
        let tail = |xs: &[String]| xs.iter().map(|x| format!(", {x}")).collect::<String>();
        let wild_tail: String = wild.iter().map(|x| format!(", {x}")).collect();
        out.push_str(&format!(
            "\n@name(R_INLINE_VALUES_DROP_{pred})\nREMOVED_INSTRUCTION(fid) :-\n    {callee_anon},\n    {pred}(fid, vm, _{wild_tail}).\n"
        ));
        if pred == "ARETURN" {
            continue;
        }
        let name = format!("R_INLINE_VALUES_{pred}");
        out.push_str(&format!(
            "\n@name({name})\nIDB_{pred}(cat(\"{name}\", \"[\", cid, \",\", nid, \",\", mid, \",\", aid, \",\", fid, \"]\"), \"<clinit>()V\", cat(cc, \".\", k){}) :-\n    {call},\n    {callee},\n    {pred}(fid, vm, k{}).\n",
            tail(&ops),
            tail(&ops)
        ));
    }
    out
}

const OBJECT_METHODS: &[(&str, &str, &str)] = &[
    ("GETCLASS", "getClass", "()Ljava/lang/Class;"),
    ("HASHCODE", "hashCode", "()I"),
    ("EQUALS", "equals", "(Ljava/lang/Object;)Z"),
    ("CLONE", "clone", "()Ljava/lang/Object;"),
    ("TOSTRING", "toString", "()Ljava/lang/String;"),
    ("NOTIFY", "notify", "()V"),
    ("NOTIFYALL", "notifyAll", "()V"),
    ("WAIT", "wait", "()V"),
    ("WAIT_J", "wait", "(J)V"),
    ("WAIT_JI", "wait", "(JI)V"),
    ("FINALIZE", "finalize", "()V"),
];

pub fn object_method_rules() -> String {
    let mut out = String::from(HEADER);
    out.push_str("// Calls of java/lang/Object methods through an interface type dispatch\n");
    out.push_str("// exactly like invokevirtual on java/lang/Object.\n");
    for (tag, name, desc) in OBJECT_METHODS {
        let rule = format!("R_OBJECT_METHOD_{tag}");
        out.push_str(&format!(
            "\n@name({rule})\nIDB_INVOKEVIRTUAL(cat(\"{rule}\", \"[\", fid, \"]\"), m, cat(c, \"\"), \"java/lang/Object\", \"{name}\", \"{desc}\", r) :-\n    INVOKEINTERFACE(fid, m, c, _, \"{name}\", \"{desc}\", r).\n"
        ));
        out.push_str(&format!(
            "\n@name({rule}_GUARD)\nREMOVED_INSTRUCTION(fid) :-\n    INVOKEINTERFACE(fid, _, _, _, \"{name}\", \"{desc}\", _).\n"
        ));
    }
    out
}

pub fn object_method_count() -> usize {
    OBJECT_METHODS.len()
}
