//! Fixture classes: rewrite pairs, a seeded random corpus and behavioural
//! mutations of it.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{acc, op, Anno, ClassBuilder, Code, Ev, Ldc, Member};

const IFLE: u8 = 0x9e;
const IDIV: u8 = 0x6c;
const IREM: u8 = 0x70;

#[derive(Debug, Clone, PartialEq)]
pub enum Insn {
    Op(u8),
    Int(i32),
    Str(String),
    Var(u8, u16),
    Iinc(u16, i16),
    Invoke(u8, String, String, String),
    Field(u8, String, String, String),
    Type(u8, String),
    Jump(u8, usize),
    /// Tableswitch from 0: default label, then case labels.
    Switch(usize, Vec<usize>),
    Mark(usize),
    Line(u16),
}

#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub access: u16,
    pub name: String,
    pub descriptor: String,
    pub labels: usize,
    pub body: Vec<Insn>,
    /// start, end, handler, catch type
    pub handlers: Vec<(usize, usize, usize, Option<String>)>,
}

impl MethodSpec {
    pub fn new(access: u16, name: &str, descriptor: &str) -> Self {
        MethodSpec {
            access,
            name: name.into(),
            descriptor: descriptor.into(),
            labels: 0,
            body: vec![],
            handlers: vec![],
        }
    }

    pub fn label(&mut self) -> usize {
        self.labels += 1;
        self.labels - 1
    }

    pub fn code(&self) -> Code {
        let mut c = Code::new();
        let labels: Vec<_> = (0..self.labels).map(|_| c.new_label()).collect();
        for i in &self.body {
            match i {
                Insn::Op(o) => c.op(*o),
                Insn::Int(v) => c.push_int(*v),
                Insn::Str(s) => c.ldc_str(s),
                Insn::Var(o, n) => c.var(*o, *n),
                Insn::Iinc(n, d) => c.iinc(*n, *d),
                Insn::Invoke(o, own, n, d) if *o == op::INVOKEINTERFACE => c.invoke_itf(*o, own, n, d),
                Insn::Invoke(o, own, n, d) => c.invoke(*o, own, n, d),
                Insn::Field(o, own, n, d) => c.field(*o, own, n, d),
                Insn::Type(o, t) => c.type_op(*o, t),
                Insn::Jump(o, l) => c.jump(*o, labels[*l]),
                Insn::Switch(d, ts) => c.tableswitch(0, labels[*d], ts.iter().map(|t| labels[*t]).collect()),
                Insn::Mark(l) => c.mark(labels[*l]),
                Insn::Line(n) => c.line(*n),
            };
        }
        for (s, e, h, t) in &self.handlers {
            c.try_catch(labels[*s], labels[*e], labels[*h], t.as_deref());
        }
        c
    }

    pub fn member(&self) -> Member {
        Member::new(self.access, &self.name, &self.descriptor).code(self.code())
    }
}

/// A class whose method bodies stay editable.
#[derive(Debug, Clone)]
pub struct ClassSpec {
    pub class: ClassBuilder,
    pub methods: Vec<MethodSpec>,
}

impl ClassSpec {
    pub fn name(&self) -> &str {
        &self.class.name
    }

    pub fn build(&self) -> Vec<u8> {
        let mut b = self.class.clone();
        for m in &self.methods {
            b = b.method(m.member());
        }
        b.build()
    }
}

fn snippet(rng: &mut impl Rng, m: &mut MethodSpec, owner: &str, kind: usize) {
    use Insn::*;
    let b = &mut m.body;
    match kind {
        0 => {
            let o = *[op::IADD, op::ISUB, op::IMUL].choose(rng).unwrap();
            b.extend([Var(op::ILOAD, 0), Int(rng.gen_range(-200..70000)), Op(o), Var(op::ISTORE, 0)]);
        }
        1 => {
            let h = format!("helper{}", rng.gen_range(0..4));
            b.extend([Var(op::ILOAD, 0), Invoke(op::INVOKESTATIC, owner.into(), h, "(I)I".into()), Var(op::ISTORE, 0)]);
        }
        2 => {
            let l = m.label();
            let j = *[op::IFEQ, op::IFNE, op::IFLT, op::IFGE].choose(rng).unwrap();
            let b = &mut m.body;
            b.extend([Var(op::ILOAD, 1), Jump(j, l), Iinc(0, rng.gen_range(1..9)), Mark(l)]);
        }
        3 => {
            let f = format!("f{}", rng.gen_range(0..3));
            b.extend([Field(op::GETSTATIC, owner.into(), f, "I".into()), Var(op::ISTORE, 1)]);
        }
        4 => {
            let s: String = (0..rng.gen_range(1..12)).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
            b.extend([
                Str(s),
                Invoke(op::INVOKEVIRTUAL, "java/lang/String".into(), "length".into(), "()I".into()),
                Var(op::ISTORE, 1),
            ]);
        }
        5 => {
            let (d, l1, l2) = (m.label(), m.label(), m.label());
            m.body.extend([
                Var(op::ILOAD, 1),
                Switch(d, vec![l1, l2]),
                Mark(l1),
                Iinc(0, 1),
                Jump(op::GOTO, d),
                Mark(l2),
                Iinc(0, 2),
                Mark(d),
            ]);
        }
        6 => {
            let (top, end) = (m.label(), m.label());
            m.body.extend([Mark(top), Var(op::ILOAD, 1), Jump(IFLE, end), Iinc(1, -1), Jump(op::GOTO, top), Mark(end)]);
        }
        _ => {
            let (s, e, h, after) = (m.label(), m.label(), m.label(), m.label());
            let o = *[IDIV, IREM].choose(rng).unwrap();
            m.body.extend([
                Mark(s),
                Var(op::ILOAD, 0),
                Var(op::ILOAD, 1),
                Op(o),
                Var(op::ISTORE, 0),
                Mark(e),
                Jump(op::GOTO, after),
                Mark(h),
                Op(op::POP),
                Mark(after),
            ]);
            m.handlers.push((s, e, h, Some("java/lang/ArithmeticException".into())));
        }
    }
}

const SNIPPETS: usize = 8;

/// A random class `gen/C<index>`. The first method begins with a call and
/// an integer constant, so every mutation kind has a target.
pub fn random_class(rng: &mut impl Rng, index: usize) -> ClassSpec {
    let name = format!("gen/C{index}");
    let mut class = ClassBuilder::new(&name).version(*[52, 55, 61].choose(rng).unwrap()).default_constructor();
    if rng.gen_bool(0.3) {
        class = class.implements("java/io/Serializable");
    }
    if rng.gen_bool(0.3) {
        class = class.annotation(Anno::new("Lgen/Marker;").with("value", Ev::Int(rng.gen_range(0..5))));
    }
    for f in 0..rng.gen_range(0..4) {
        let mut m = Member::new(acc::STATIC | *[acc::PUBLIC, acc::PRIVATE].choose(rng).unwrap(), &format!("f{f}"), "I");
        if rng.gen_bool(0.3) {
            m.access |= acc::FINAL;
            m = m.constant(Ldc::Int(rng.gen_range(-5..5)));
        }
        class = class.field(m);
    }
    if rng.gen_bool(0.3) {
        class = class.field(
            Member::new(acc::PRIVATE, "items", "Ljava/util/List;").signature("Ljava/util/List<Ljava/lang/String;>;"),
        );
    }
    let mut methods = Vec::new();
    for h in 0..4 {
        let mut m = MethodSpec::new(acc::STATIC | acc::PUBLIC, &format!("helper{h}"), "(I)I");
        m.body.extend([Insn::Var(op::ILOAD, 0), Insn::Int(h + 1), Insn::Op(op::IADD), Insn::Op(op::IRETURN)]);
        methods.push(m);
    }
    for i in 0..rng.gen_range(1..4) {
        let mut m = MethodSpec::new(acc::PUBLIC | acc::STATIC, &format!("m{i}"), "(II)I");
        if i == 0 {
            snippet(rng, &mut m, &name, 1);
            snippet(rng, &mut m, &name, 0);
        }
        for _ in 0..rng.gen_range(2..10) {
            let k = rng.gen_range(0..SNIPPETS);
            snippet(rng, &mut m, &name, k);
        }
        m.body.extend([Insn::Var(op::ILOAD, 0), Insn::Op(op::IRETURN)]);
        methods.push(m);
    }
    ClassSpec { class, methods }
}

pub fn corpus(rng: &mut impl Rng, n: usize) -> Vec<ClassSpec> {
    (0..n).map(|i| random_class(rng, i)).collect()
}

/// Adds line numbers and labels nothing jumps to. The code is unchanged.
pub fn decorate(spec: &ClassSpec, rng: &mut impl Rng) -> ClassSpec {
    let mut out = spec.clone();
    for m in &mut out.methods {
        let mut body = Vec::new();
        let mut line = rng.gen_range(1..100u16);
        for i in std::mem::take(&mut m.body) {
            if rng.gen_bool(0.3) {
                body.push(Insn::Line(line));
                line += rng.gen_range(1..4);
            }
            if rng.gen_bool(0.2) {
                m.labels += 1;
                body.push(Insn::Mark(m.labels - 1));
            }
            body.push(i);
        }
        m.body = body;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Constant,
    OpcodeSwap,
    Delete,
    Rename,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [Mutation::Constant, Mutation::OpcodeSwap, Mutation::Delete, Mutation::Rename];
}

fn swapped(o: u8) -> Option<u8> {
    Some(match o {
        op::IADD => op::ISUB,
        op::ISUB => op::IADD,
        op::IMUL => op::IADD,
        IDIV => IREM,
        IREM => IDIV,
        op::IFEQ => op::IFNE,
        op::IFNE => op::IFEQ,
        op::IFLT => op::IFGE,
        op::IFGE => op::IFLT,
        IFLE => op::IFGE,
        _ => return None,
    })
}

/// Applies one behaviour-changing edit to a random non-helper method.
pub fn mutate(spec: &ClassSpec, kind: Mutation, rng: &mut impl Rng) -> Option<ClassSpec> {
    let mut out = spec.clone();
    let mut sites = Vec::new();
    for (mi, m) in out.methods.iter().enumerate() {
        if m.name.starts_with("helper") {
            continue;
        }
        for (ii, i) in m.body.iter().enumerate() {
            let ok = match (kind, i) {
                (Mutation::Constant, Insn::Int(_) | Insn::Str(_)) => true,
                (Mutation::OpcodeSwap, Insn::Op(o) | Insn::Jump(o, _)) => swapped(*o).is_some(),
                (Mutation::Delete, Insn::Var(..) | Insn::Int(_) | Insn::Invoke(..) | Insn::Iinc(..) | Insn::Op(_)) => {
                    true
                }
                (Mutation::Rename, Insn::Invoke(..)) => true,
                _ => false,
            };
            if ok {
                sites.push((mi, ii));
            }
        }
    }
    let &(mi, ii) = sites.choose(rng)?;
    let body = &mut out.methods[mi].body;
    match kind {
        Mutation::Delete => {
            body.remove(ii);
        }
        _ => {
            let i = &mut body[ii];
            match i {
                Insn::Int(v) => *v = v.wrapping_add(1),
                Insn::Str(s) => s.push('x'),
                Insn::Op(o) | Insn::Jump(o, _) => *o = swapped(*o).unwrap(),
                Insn::Invoke(_, _, n, _) => n.push('X'),
                _ => unreachable!(),
            }
        }
    }
    Some(out)
}

/// Same class, major version 52 and 61.
pub fn version_pair() -> (Vec<u8>, Vec<u8>) {
    let c = ClassBuilder::new("p/Versioned").default_constructor();
    let mut m = MethodSpec::new(acc::PUBLIC | acc::STATIC, "id", "(I)I");
    m.body.extend([Insn::Var(op::ILOAD, 0), Insn::Op(op::IRETURN)]);
    let spec = ClassSpec { class: c, methods: vec![m] };
    let a = spec.build();
    let mut spec = spec;
    spec.class.major = 61;
    (a, spec.build())
}

fn nullcheck_class(bracketed: bool, old: bool) -> Vec<u8> {
    let c = ClassBuilder::new("p/Outer$Inner").default_constructor();
    let mut m = MethodSpec::new(acc::PUBLIC | acc::STATIC, "make", "(Lp/Outer;)Lp/Outer;");
    m.body.push(Insn::Var(op::ALOAD, 0));
    if bracketed {
        m.body.push(Insn::Op(op::DUP));
    }
    m.body.push(if old {
        Insn::Invoke(op::INVOKEVIRTUAL, "java/lang/Object".into(), "getClass".into(), "()Ljava/lang/Class;".into())
    } else {
        Insn::Invoke(
            op::INVOKESTATIC,
            "java/util/Objects".into(),
            "requireNonNull".into(),
            "(Ljava/lang/Object;)Ljava/lang/Object;".into(),
        )
    });
    m.body.push(Insn::Op(op::POP));
    if !bracketed {
        m.body.push(Insn::Var(op::ALOAD, 0));
    }
    m.body.push(Insn::Op(op::ARETURN));
    ClassSpec { class: c, methods: vec![m] }.build()
}

/// `dup; getClass; pop` against `dup; requireNonNull; pop`.
pub fn nullcheck_pair() -> (Vec<u8>, Vec<u8>) {
    (nullcheck_class(true, true), nullcheck_class(true, false))
}

/// The same calls without the surrounding `dup`/`pop`.
pub fn nullcheck_unbracketed_pair() -> (Vec<u8>, Vec<u8>) {
    (nullcheck_class(false, true), nullcheck_class(false, false))
}

fn checkcast_class(cast: bool) -> Vec<u8> {
    let c = ClassBuilder::new("p/Named").default_constructor();
    let mut name = MethodSpec::new(acc::PUBLIC, "name", "()Ljava/lang/String;");
    name.body.extend([Insn::Str("n".into()), Insn::Op(op::ARETURN)]);
    let mut m = MethodSpec::new(acc::PUBLIC, "label", "()Ljava/lang/String;");
    m.body.extend([
        Insn::Var(op::ALOAD, 0),
        Insn::Invoke(op::INVOKEVIRTUAL, "p/Named".into(), "name".into(), "()Ljava/lang/String;".into()),
    ]);
    if cast {
        m.body.push(Insn::Type(op::CHECKCAST, "java/lang/String".into()));
    }
    m.body.push(Insn::Op(op::ARETURN));
    ClassSpec { class: c, methods: vec![name, m] }.build()
}

/// Cast to the exact declared return type of the preceding call, and none.
pub fn checkcast_pair() -> (Vec<u8>, Vec<u8>) {
    (checkcast_class(true), checkcast_class(false))
}

fn object_method_class(interface: bool) -> Vec<u8> {
    let c = ClassBuilder::new("p/Hasher").default_constructor();
    let mut m = MethodSpec::new(acc::PUBLIC | acc::STATIC, "hash", "(Lp/Shape;)I");
    m.body.push(Insn::Var(op::ALOAD, 0));
    m.body.push(if interface {
        Insn::Invoke(op::INVOKEINTERFACE, "p/Shape".into(), "hashCode".into(), "()I".into())
    } else {
        Insn::Invoke(op::INVOKEVIRTUAL, "java/lang/Object".into(), "hashCode".into(), "()I".into())
    });
    m.body.push(Insn::Op(op::IRETURN));
    ClassSpec { class: c, methods: vec![m] }.build()
}

/// `Shape.hashCode` via invokeinterface against `Object.hashCode`.
pub fn object_method_pair() -> (Vec<u8>, Vec<u8>) {
    (object_method_class(true), object_method_class(false))
}

fn enum_class(helper: bool) -> Vec<u8> {
    let e = "p/Color";
    let arr = "[Lp/Color;";
    let consts = ["RED", "GREEN", "BLUE"];
    let mut class = ClassBuilder::new(e)
        .access(acc::PUBLIC | acc::FINAL | acc::SUPER | acc::ENUM)
        .extends(Some("java/lang/Enum"))
        .signature("Ljava/lang/Enum<Lp/Color;>;");
    for c in consts {
        class = class.field(Member::new(acc::PUBLIC | acc::STATIC | acc::FINAL | acc::ENUM, c, "Lp/Color;"));
    }
    class = class.field(Member::new(acc::PRIVATE | acc::STATIC | acc::FINAL | acc::SYNTHETIC, "$VALUES", arr));

    let mut init = MethodSpec::new(acc::PRIVATE, "<init>", "(Ljava/lang/String;I)V");
    init.body.extend([
        Insn::Var(op::ALOAD, 0),
        Insn::Var(op::ALOAD, 1),
        Insn::Var(op::ILOAD, 2),
        Insn::Invoke(op::INVOKESPECIAL, "java/lang/Enum".into(), "<init>".into(), "(Ljava/lang/String;I)V".into()),
        Insn::Op(op::RETURN),
    ]);
    let mut values = MethodSpec::new(acc::PUBLIC | acc::STATIC, "values", "()[Lp/Color;");
    values.body.extend([
        Insn::Field(op::GETSTATIC, e.into(), "$VALUES".into(), arr.into()),
        Insn::Invoke(op::INVOKEVIRTUAL, arr.into(), "clone".into(), "()Ljava/lang/Object;".into()),
        Insn::Type(op::CHECKCAST, arr.into()),
        Insn::Op(op::ARETURN),
    ]);

    let mut array = vec![Insn::Int(consts.len() as i32), Insn::Type(op::ANEWARRAY, e.into())];
    for (i, c) in consts.iter().enumerate() {
        array.extend([
            Insn::Op(op::DUP),
            Insn::Int(i as i32),
            Insn::Field(op::GETSTATIC, e.into(), c.to_string(), "Lp/Color;".into()),
            Insn::Op(op::AASTORE),
        ]);
    }

    let mut clinit = MethodSpec::new(acc::STATIC, "<clinit>", "()V");
    for (i, c) in consts.iter().enumerate() {
        clinit.body.extend([
            Insn::Type(op::NEW, e.into()),
            Insn::Op(op::DUP),
            Insn::Str(c.to_string()),
            Insn::Int(i as i32),
            Insn::Invoke(op::INVOKESPECIAL, e.into(), "<init>".into(), "(Ljava/lang/String;I)V".into()),
            Insn::Field(op::PUTSTATIC, e.into(), c.to_string(), "Lp/Color;".into()),
        ]);
    }
    let mut methods = vec![values, init];
    if helper {
        clinit.body.push(Insn::Invoke(op::INVOKESTATIC, e.into(), "$values".into(), "()[Lp/Color;".into()));
        let mut h = MethodSpec::new(acc::PRIVATE | acc::STATIC | acc::SYNTHETIC, "$values", "()[Lp/Color;");
        h.body = array;
        h.body.push(Insn::Op(op::ARETURN));
        methods.push(h);
    } else {
        clinit.body.extend(array);
    }
    clinit.body.extend([Insn::Field(op::PUTSTATIC, e.into(), "$VALUES".into(), arr.into()), Insn::Op(op::RETURN)]);
    methods.push(clinit);
    ClassSpec { class, methods }.build()
}

/// An enum whose `<clinit>` builds the values array inline, and the same
/// enum built through a synthetic `$values()` helper.
pub fn enum_values_pair() -> (Vec<u8>, Vec<u8>) {
    (enum_class(false), enum_class(true))
}

fn anon_class(final_flag: bool) -> Vec<u8> {
    let f = if final_flag { acc::FINAL } else { 0 };
    ClassBuilder::new("p/Outer$1")
        .access(acc::SUPER | f)
        .implements("java/lang/Runnable")
        .inner_class("p/Outer$1", None, None, f)
        .method(Member::new(0, "<init>", "()V").code({
            let mut c = Code::new();
            c.op(op::ALOAD_0).invoke(op::INVOKESPECIAL, "java/lang/Object", "<init>", "()V").op(op::RETURN);
            c
        }))
        .method(Member::new(acc::PUBLIC, "run", "()V").code({
            let mut c = Code::new();
            c.op(op::RETURN);
            c
        }))
        .build()
}

/// Anonymous class without and with `ACC_FINAL`.
pub fn anon_final_pair() -> (Vec<u8>, Vec<u8>) {
    (anon_class(false), anon_class(true))
}
