//! A small class-file assembler for building test fixtures.
//!
//! Everything is symbolic until [`ClassBuilder::build`], which lays out the
//! constant pool, encodes instructions and resolves label offsets. The
//! assembler performs no verification: it emits whatever it is told to, which
//! is what fixtures for a parser need.

use std::collections::HashMap;
use std::io::Write;

pub mod fixtures;

pub mod op {
    pub const NOP: u8 = 0x00;
    pub const ACONST_NULL: u8 = 0x01;
    pub const ICONST_M1: u8 = 0x02;
    pub const ICONST_0: u8 = 0x03;
    pub const ICONST_1: u8 = 0x04;
    pub const ICONST_2: u8 = 0x05;
    pub const ICONST_3: u8 = 0x06;
    pub const ICONST_4: u8 = 0x07;
    pub const ICONST_5: u8 = 0x08;
    pub const LCONST_0: u8 = 0x09;
    pub const ILOAD: u8 = 0x15;
    pub const LLOAD: u8 = 0x16;
    pub const ALOAD: u8 = 0x19;
    pub const ILOAD_0: u8 = 0x1a;
    pub const ILOAD_1: u8 = 0x1b;
    pub const ALOAD_0: u8 = 0x2a;
    pub const ALOAD_1: u8 = 0x2b;
    pub const ISTORE: u8 = 0x36;
    pub const ASTORE: u8 = 0x3a;
    pub const ISTORE_1: u8 = 0x3c;
    pub const ASTORE_1: u8 = 0x4c;
    pub const AASTORE: u8 = 0x53;
    pub const POP: u8 = 0x57;
    pub const DUP: u8 = 0x59;
    pub const IADD: u8 = 0x60;
    pub const ISUB: u8 = 0x64;
    pub const IMUL: u8 = 0x68;
    pub const IINC: u8 = 0x84;
    pub const IFEQ: u8 = 0x99;
    pub const IFNE: u8 = 0x9a;
    pub const IFLT: u8 = 0x9b;
    pub const IFGE: u8 = 0x9c;
    pub const IF_ICMPGE: u8 = 0xa2;
    pub const IF_ICMPLT: u8 = 0xa1;
    pub const GOTO: u8 = 0xa7;
    pub const IRETURN: u8 = 0xac;
    pub const LRETURN: u8 = 0xad;
    pub const ARETURN: u8 = 0xb0;
    pub const RETURN: u8 = 0xb1;
    pub const GETSTATIC: u8 = 0xb2;
    pub const PUTSTATIC: u8 = 0xb3;
    pub const GETFIELD: u8 = 0xb4;
    pub const PUTFIELD: u8 = 0xb5;
    pub const INVOKEVIRTUAL: u8 = 0xb6;
    pub const INVOKESPECIAL: u8 = 0xb7;
    pub const INVOKESTATIC: u8 = 0xb8;
    pub const INVOKEINTERFACE: u8 = 0xb9;
    pub const INVOKEDYNAMIC: u8 = 0xba;
    pub const NEW: u8 = 0xbb;
    pub const NEWARRAY: u8 = 0xbc;
    pub const ANEWARRAY: u8 = 0xbd;
    pub const ARRAYLENGTH: u8 = 0xbe;
    pub const ATHROW: u8 = 0xbf;
    pub const CHECKCAST: u8 = 0xc0;
    pub const INSTANCEOF: u8 = 0xc1;
    pub const WIDE: u8 = 0xc4;
    pub const MULTIANEWARRAY: u8 = 0xc5;
    pub const IFNULL: u8 = 0xc6;
    pub const IFNONNULL: u8 = 0xc7;
    pub const GOTO_W: u8 = 0xc8;
    pub const TABLESWITCH: u8 = 0xaa;
    pub const LOOKUPSWITCH: u8 = 0xab;
}

pub mod acc {
    pub const PUBLIC: u16 = 0x0001;
    pub const PRIVATE: u16 = 0x0002;
    pub const PROTECTED: u16 = 0x0004;
    pub const STATIC: u16 = 0x0008;
    pub const FINAL: u16 = 0x0010;
    pub const SUPER: u16 = 0x0020;
    pub const INTERFACE: u16 = 0x0200;
    pub const ABSTRACT: u16 = 0x0400;
    pub const SYNTHETIC: u16 = 0x1000;
    pub const ENUM: u16 = 0x4000;
}

/// Loadable constant as written in source.
#[derive(Debug, Clone, PartialEq)]
pub enum Ldc {
    Int(i32),
    Float(f32),
    Long(i64),
    Double(f64),
    Str(String),
    Class(String),
    MethodType(String),
    Handle(HandleSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandleSpec {
    pub kind: u8,
    pub owner: String,
    pub name: String,
    pub descriptor: String,
    pub interface: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bsm {
    pub handle: HandleSpec,
    pub args: Vec<Ldc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label(u32);

#[derive(Debug, Clone)]
enum Asm {
    Raw(Vec<u8>),
    Op(u8),
    Var(u8, u16),
    Iinc(u16, i16),
    Bipush(i8),
    Sipush(i16),
    Newarray(u8),
    Ldc(Ldc),
    Field(u8, String, String, String),
    Invoke(u8, String, String, String, bool),
    InvokeDynamic(String, String, Bsm),
    Type(u8, String),
    MultiANewArray(String, u8),
    Jump(u8, Label),
    JumpWide(u8, Label),
    TableSwitch(i32, Label, Vec<Label>),
    LookupSwitch(Label, Vec<(i32, Label)>),
    Mark(Label),
    Line(u16),
}

/// Symbolic method body.
#[derive(Debug, Clone, Default)]
pub struct Code {
    items: Vec<Asm>,
    next_label: u32,
    handlers: Vec<(Label, Label, Label, Option<String>)>,
    locals: Vec<(Label, Label, String, String, u16)>,
    max_stack: u16,
    max_locals: u16,
}

impl Code {
    pub fn new() -> Self {
        Code { max_stack: 8, max_locals: 8, ..Default::default() }
    }

    pub fn new_label(&mut self) -> Label {
        self.next_label += 1;
        Label(self.next_label)
    }

    pub fn mark(&mut self, l: Label) -> &mut Self {
        self.items.push(Asm::Mark(l));
        self
    }

    /// Records a line-number table entry at the current position.
    pub fn line(&mut self, line: u16) -> &mut Self {
        self.items.push(Asm::Line(line));
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.items.push(Asm::Raw(bytes.to_vec()));
        self
    }

    pub fn op(&mut self, opcode: u8) -> &mut Self {
        self.items.push(Asm::Op(opcode));
        self
    }

    /// Load/store/ret with an explicit index; uses `wide` above 255.
    pub fn var(&mut self, opcode: u8, index: u16) -> &mut Self {
        self.items.push(Asm::Var(opcode, index));
        self
    }

    pub fn iinc(&mut self, index: u16, delta: i16) -> &mut Self {
        self.items.push(Asm::Iinc(index, delta));
        self
    }

    pub fn bipush(&mut self, v: i8) -> &mut Self {
        self.items.push(Asm::Bipush(v));
        self
    }

    pub fn sipush(&mut self, v: i16) -> &mut Self {
        self.items.push(Asm::Sipush(v));
        self
    }

    pub fn newarray(&mut self, t: u8) -> &mut Self {
        self.items.push(Asm::Newarray(t));
        self
    }

    /// Pushes an int the way javac does (`iconst_n`, `bipush`, `sipush`, `ldc`).
    pub fn push_int(&mut self, v: i32) -> &mut Self {
        match v {
            -1..=5 => self.op((op::ICONST_0 as i32 + v) as u8),
            -128..=127 => self.bipush(v as i8),
            -32768..=32767 => self.sipush(v as i16),
            _ => self.ldc(Ldc::Int(v)),
        }
    }

    pub fn ldc(&mut self, c: Ldc) -> &mut Self {
        self.items.push(Asm::Ldc(c));
        self
    }

    pub fn ldc_str(&mut self, s: &str) -> &mut Self {
        self.ldc(Ldc::Str(s.to_string()))
    }

    pub fn field(&mut self, opcode: u8, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.items.push(Asm::Field(opcode, owner.into(), name.into(), desc.into()));
        self
    }

    pub fn invoke(&mut self, opcode: u8, owner: &str, name: &str, desc: &str) -> &mut Self {
        let itf = opcode == op::INVOKEINTERFACE;
        self.items.push(Asm::Invoke(opcode, owner.into(), name.into(), desc.into(), itf));
        self
    }

    /// `invokestatic` / `invokespecial` on an interface method.
    pub fn invoke_itf(&mut self, opcode: u8, owner: &str, name: &str, desc: &str) -> &mut Self {
        self.items.push(Asm::Invoke(opcode, owner.into(), name.into(), desc.into(), true));
        self
    }

    pub fn invokedynamic(&mut self, name: &str, desc: &str, bsm: Bsm) -> &mut Self {
        self.items.push(Asm::InvokeDynamic(name.into(), desc.into(), bsm));
        self
    }

    pub fn type_op(&mut self, opcode: u8, class: &str) -> &mut Self {
        self.items.push(Asm::Type(opcode, class.into()));
        self
    }

    pub fn multianewarray(&mut self, class: &str, dims: u8) -> &mut Self {
        self.items.push(Asm::MultiANewArray(class.into(), dims));
        self
    }

    pub fn jump(&mut self, opcode: u8, target: Label) -> &mut Self {
        self.items.push(Asm::Jump(opcode, target));
        self
    }

    pub fn jump_wide(&mut self, opcode: u8, target: Label) -> &mut Self {
        self.items.push(Asm::JumpWide(opcode, target));
        self
    }

    pub fn tableswitch(&mut self, low: i32, default: Label, targets: Vec<Label>) -> &mut Self {
        self.items.push(Asm::TableSwitch(low, default, targets));
        self
    }

    pub fn lookupswitch(&mut self, default: Label, pairs: Vec<(i32, Label)>) -> &mut Self {
        self.items.push(Asm::LookupSwitch(default, pairs));
        self
    }

    pub fn try_catch(&mut self, start: Label, end: Label, handler: Label, catch_type: Option<&str>) -> &mut Self {
        self.handlers.push((start, end, handler, catch_type.map(str::to_string)));
        self
    }

    /// Adds a LocalVariableTable entry spanning two labels.
    pub fn local_variable(&mut self, start: Label, end: Label, name: &str, desc: &str, index: u16) -> &mut Self {
        self.locals.push((start, end, name.into(), desc.into(), index));
        self
    }
}

/// Annotation element value.
#[derive(Debug, Clone, PartialEq)]
pub enum Ev {
    Int(i32),
    Bool(bool),
    Long(i64),
    Str(String),
    Enum(String, String),
    Class(String),
    Nested(Anno),
    Array(Vec<Ev>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anno {
    pub descriptor: String,
    pub visible: bool,
    pub elements: Vec<(String, Ev)>,
}

impl Anno {
    pub fn new(descriptor: &str) -> Self {
        Anno { descriptor: descriptor.into(), visible: true, elements: Vec::new() }
    }

    pub fn with(mut self, name: &str, value: Ev) -> Self {
        self.elements.push((name.into(), value));
        self
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub access: u16,
    pub name: String,
    pub descriptor: String,
    pub signature: Option<String>,
    pub annotations: Vec<Anno>,
    pub exceptions: Vec<String>,
    pub constant_value: Option<Ldc>,
    pub code: Option<Code>,
    pub raw_attributes: Vec<(String, Vec<u8>)>,
}

impl Member {
    pub fn new(access: u16, name: &str, descriptor: &str) -> Self {
        Member {
            access,
            name: name.into(),
            descriptor: descriptor.into(),
            signature: None,
            annotations: Vec::new(),
            exceptions: Vec::new(),
            constant_value: None,
            code: None,
            raw_attributes: Vec::new(),
        }
    }

    pub fn code(mut self, code: Code) -> Self {
        self.code = Some(code);
        self
    }

    pub fn signature(mut self, s: &str) -> Self {
        self.signature = Some(s.into());
        self
    }

    pub fn annotation(mut self, a: Anno) -> Self {
        self.annotations.push(a);
        self
    }

    pub fn throws(mut self, class: &str) -> Self {
        self.exceptions.push(class.into());
        self
    }

    pub fn constant(mut self, c: Ldc) -> Self {
        self.constant_value = Some(c);
        self
    }

    pub fn raw_attribute(mut self, name: &str, data: &[u8]) -> Self {
        self.raw_attributes.push((name.into(), data.to_vec()));
        self
    }
}

#[derive(Debug, Clone)]
pub struct InnerClass {
    pub inner: String,
    pub outer: Option<String>,
    pub name: Option<String>,
    pub access: u16,
}

#[derive(Debug, Clone)]
pub struct ClassBuilder {
    pub major: u16,
    pub minor: u16,
    pub access: u16,
    pub name: String,
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<Member>,
    pub methods: Vec<Member>,
    pub signature: Option<String>,
    pub source_file: Option<String>,
    pub annotations: Vec<Anno>,
    pub inner_classes: Vec<InnerClass>,
    pub raw_attributes: Vec<(String, Vec<u8>)>,
    /// Pool entries to add before anything else, to perturb pool layout.
    pub pool_prefix: Vec<String>,
}

impl ClassBuilder {
    /// `public class <name> extends java/lang/Object`, major version 52.
    pub fn new(name: &str) -> Self {
        ClassBuilder {
            major: 52,
            minor: 0,
            access: acc::PUBLIC | acc::SUPER,
            name: name.into(),
            super_name: Some("java/lang/Object".into()),
            interfaces: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
            signature: None,
            source_file: None,
            annotations: Vec::new(),
            inner_classes: Vec::new(),
            raw_attributes: Vec::new(),
            pool_prefix: Vec::new(),
        }
    }

    pub fn version(mut self, major: u16) -> Self {
        self.major = major;
        self
    }

    pub fn access(mut self, access: u16) -> Self {
        self.access = access;
        self
    }

    pub fn extends(mut self, super_name: Option<&str>) -> Self {
        self.super_name = super_name.map(str::to_string);
        self
    }

    pub fn implements(mut self, iface: &str) -> Self {
        self.interfaces.push(iface.into());
        self
    }

    pub fn field(mut self, f: Member) -> Self {
        self.fields.push(f);
        self
    }

    pub fn method(mut self, m: Member) -> Self {
        self.methods.push(m);
        self
    }

    pub fn signature(mut self, s: &str) -> Self {
        self.signature = Some(s.into());
        self
    }

    pub fn source_file(mut self, s: &str) -> Self {
        self.source_file = Some(s.into());
        self
    }

    pub fn annotation(mut self, a: Anno) -> Self {
        self.annotations.push(a);
        self
    }

    pub fn inner_class(mut self, inner: &str, outer: Option<&str>, name: Option<&str>, access: u16) -> Self {
        self.inner_classes.push(InnerClass {
            inner: inner.into(),
            outer: outer.map(str::to_string),
            name: name.map(str::to_string),
            access,
        });
        self
    }

    pub fn raw_attribute(mut self, name: &str, data: &[u8]) -> Self {
        self.raw_attributes.push((name.into(), data.to_vec()));
        self
    }

    /// Adds a default constructor calling `super()`.
    pub fn default_constructor(self) -> Self {
        let sup = self.super_name.clone().unwrap_or_else(|| "java/lang/Object".into());
        let mut c = Code::new();
        c.op(op::ALOAD_0).invoke(op::INVOKESPECIAL, &sup, "<init>", "()V").op(op::RETURN);
        self.method(Member::new(acc::PUBLIC, "<init>", "()V").code(c))
    }

    pub fn build(&self) -> Vec<u8> {
        let mut pool = Pool::default();
        for s in &self.pool_prefix {
            pool.utf8(s);
        }
        let this = pool.class(&self.name);
        let sup = self.super_name.as_deref().map(|s| pool.class(s)).unwrap_or(0);
        let ifaces: Vec<u16> = self.interfaces.iter().map(|i| pool.class(i)).collect();

        let fields: Vec<Vec<u8>> = self.fields.iter().map(|f| member_bytes(f, &mut pool)).collect();
        let methods: Vec<Vec<u8>> = self.methods.iter().map(|m| member_bytes(m, &mut pool)).collect();

        let mut attrs: Vec<Vec<u8>> = Vec::new();
        if let Some(s) = &self.signature {
            let v = pool.utf8(s);
            attrs.push(attribute(&mut pool, "Signature", &v.to_be_bytes()));
        }
        if let Some(s) = &self.source_file {
            let v = pool.utf8(s);
            attrs.push(attribute(&mut pool, "SourceFile", &v.to_be_bytes()));
        }
        attrs.extend(annotation_attributes(&self.annotations, &mut pool));
        if !self.inner_classes.is_empty() {
            let mut d = u16b(self.inner_classes.len() as u16);
            for ic in &self.inner_classes {
                d.extend(u16b(pool.class(&ic.inner)));
                d.extend(u16b(ic.outer.as_deref().map(|o| pool.class(o)).unwrap_or(0)));
                d.extend(u16b(ic.name.as_deref().map(|n| pool.utf8(n)).unwrap_or(0)));
                d.extend(u16b(ic.access));
            }
            attrs.push(attribute(&mut pool, "InnerClasses", &d));
        }
        for (name, data) in &self.raw_attributes {
            attrs.push(attribute(&mut pool, name, data));
        }
        if !pool.bootstraps.is_empty() {
            let bsms = std::mem::take(&mut pool.bootstraps);
            let mut d = u16b(bsms.len() as u16);
            for (h, args) in bsms {
                d.extend(u16b(h));
                d.extend(u16b(args.len() as u16));
                for a in args {
                    d.extend(u16b(a));
                }
            }
            attrs.push(attribute(&mut pool, "BootstrapMethods", &d));
        }

        let mut out = vec![0xCA, 0xFE, 0xBA, 0xBE];
        out.extend(u16b(self.minor));
        out.extend(u16b(self.major));
        out.extend(u16b(pool.count));
        out.extend(&pool.bytes);
        out.extend(u16b(self.access));
        out.extend(u16b(this));
        out.extend(u16b(sup));
        out.extend(u16b(ifaces.len() as u16));
        for i in ifaces {
            out.extend(u16b(i));
        }
        for group in [fields, methods] {
            out.extend(u16b(group.len() as u16));
            for m in group {
                out.extend(m);
            }
        }
        out.extend(u16b(attrs.len() as u16));
        for a in attrs {
            out.extend(a);
        }
        out
    }
}

fn u16b(v: u16) -> Vec<u8> {
    v.to_be_bytes().to_vec()
}

fn attribute(pool: &mut Pool, name: &str, data: &[u8]) -> Vec<u8> {
    let mut out = u16b(pool.utf8(name));
    out.extend((data.len() as u32).to_be_bytes());
    out.extend(data);
    out
}

fn annotation_attributes(annos: &[Anno], pool: &mut Pool) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for (visible, name) in [(true, "RuntimeVisibleAnnotations"), (false, "RuntimeInvisibleAnnotations")] {
        let group: Vec<&Anno> = annos.iter().filter(|a| a.visible == visible).collect();
        if group.is_empty() {
            continue;
        }
        let mut d = u16b(group.len() as u16);
        for a in group {
            d.extend(annotation_bytes(a, pool));
        }
        out.push(attribute(pool, name, &d));
    }
    out
}

fn annotation_bytes(a: &Anno, pool: &mut Pool) -> Vec<u8> {
    let mut d = u16b(pool.utf8(&a.descriptor));
    d.extend(u16b(a.elements.len() as u16));
    for (name, v) in &a.elements {
        d.extend(u16b(pool.utf8(name)));
        d.extend(element_bytes(v, pool));
    }
    d
}

fn element_bytes(v: &Ev, pool: &mut Pool) -> Vec<u8> {
    match v {
        Ev::Int(i) => [vec![b'I'], u16b(pool.int(*i))].concat(),
        Ev::Bool(b) => [vec![b'Z'], u16b(pool.int(*b as i32))].concat(),
        Ev::Long(l) => [vec![b'J'], u16b(pool.long(*l))].concat(),
        Ev::Str(s) => [vec![b's'], u16b(pool.utf8(s))].concat(),
        Ev::Enum(t, n) => [vec![b'e'], u16b(pool.utf8(t)), u16b(pool.utf8(n))].concat(),
        Ev::Class(c) => [vec![b'c'], u16b(pool.utf8(c))].concat(),
        Ev::Nested(a) => [vec![b'@'], annotation_bytes(a, pool)].concat(),
        Ev::Array(items) => {
            let mut d = vec![b'['];
            d.extend(u16b(items.len() as u16));
            for i in items {
                d.extend(element_bytes(i, pool));
            }
            d
        }
    }
}

fn member_bytes(m: &Member, pool: &mut Pool) -> Vec<u8> {
    let mut out = u16b(m.access);
    out.extend(u16b(pool.utf8(&m.name)));
    out.extend(u16b(pool.utf8(&m.descriptor)));
    let mut attrs = Vec::new();
    if let Some(code) = &m.code {
        let data = code_bytes(code, pool);
        attrs.push(attribute(pool, "Code", &data));
    }
    if let Some(s) = &m.signature {
        let v = pool.utf8(s);
        attrs.push(attribute(pool, "Signature", &v.to_be_bytes()));
    }
    if !m.exceptions.is_empty() {
        let mut d = u16b(m.exceptions.len() as u16);
        for e in &m.exceptions {
            d.extend(u16b(pool.class(e)));
        }
        attrs.push(attribute(pool, "Exceptions", &d));
    }
    if let Some(c) = &m.constant_value {
        let i = pool.ldc(c);
        attrs.push(attribute(pool, "ConstantValue", &i.to_be_bytes()));
    }
    attrs.extend(annotation_attributes(&m.annotations, pool));
    for (name, data) in &m.raw_attributes {
        attrs.push(attribute(pool, name, data));
    }
    out.extend(u16b(attrs.len() as u16));
    for a in attrs {
        out.extend(a);
    }
    out
}

fn code_bytes(code: &Code, pool: &mut Pool) -> Vec<u8> {
    let mut bytes: Vec<u8> = Vec::new();
    let mut marks: HashMap<Label, usize> = HashMap::new();
    // (patch position, instruction offset, label, wide)
    let mut fixups: Vec<(usize, usize, Label, bool)> = Vec::new();
    let mut lines: Vec<(u16, u16)> = Vec::new();

    for item in &code.items {
        let at = bytes.len();
        match item {
            Asm::Raw(b) => bytes.extend(b),
            Asm::Op(o) => bytes.push(*o),
            Asm::Var(o, i) => {
                if *i > 255 {
                    bytes.extend([op::WIDE, *o]);
                    bytes.extend(u16b(*i));
                } else {
                    bytes.extend([*o, *i as u8]);
                }
            }
            Asm::Iinc(i, d) => {
                if *i > 255 || *d < -128 || *d > 127 {
                    bytes.extend([op::WIDE, op::IINC]);
                    bytes.extend(u16b(*i));
                    bytes.extend(d.to_be_bytes());
                } else {
                    bytes.extend([op::IINC, *i as u8, *d as i8 as u8]);
                }
            }
            Asm::Bipush(v) => bytes.extend([0x10, *v as u8]),
            Asm::Sipush(v) => {
                bytes.push(0x11);
                bytes.extend(v.to_be_bytes());
            }
            Asm::Newarray(t) => bytes.extend([op::NEWARRAY, *t]),
            Asm::Ldc(c) => {
                let i = pool.ldc(c);
                match c {
                    Ldc::Long(_) | Ldc::Double(_) => {
                        bytes.push(0x14);
                        bytes.extend(u16b(i));
                    }
                    _ if i > 255 => {
                        bytes.push(0x13);
                        bytes.extend(u16b(i));
                    }
                    _ => bytes.extend([0x12, i as u8]),
                }
            }
            Asm::Field(o, owner, name, desc) => {
                bytes.push(*o);
                bytes.extend(u16b(pool.member_ref(9, owner, name, desc)));
            }
            Asm::Invoke(o, owner, name, desc, itf) => {
                bytes.push(*o);
                bytes.extend(u16b(pool.member_ref(if *itf { 11 } else { 10 }, owner, name, desc)));
                if *o == op::INVOKEINTERFACE {
                    bytes.extend([arg_slots(desc) + 1, 0]);
                }
            }
            Asm::InvokeDynamic(name, desc, bsm) => {
                let idx = pool.invoke_dynamic(name, desc, bsm);
                bytes.push(op::INVOKEDYNAMIC);
                bytes.extend(u16b(idx));
                bytes.extend([0, 0]);
            }
            Asm::Type(o, class) => {
                bytes.push(*o);
                bytes.extend(u16b(pool.class(class)));
            }
            Asm::MultiANewArray(class, dims) => {
                bytes.push(op::MULTIANEWARRAY);
                bytes.extend(u16b(pool.class(class)));
                bytes.push(*dims);
            }
            Asm::Jump(o, l) => {
                bytes.push(*o);
                fixups.push((bytes.len(), at, *l, false));
                bytes.extend([0, 0]);
            }
            Asm::JumpWide(o, l) => {
                bytes.push(*o);
                fixups.push((bytes.len(), at, *l, true));
                bytes.extend([0, 0, 0, 0]);
            }
            Asm::TableSwitch(low, default, targets) => {
                bytes.push(op::TABLESWITCH);
                while !bytes.len().is_multiple_of(4) {
                    bytes.push(0);
                }
                fixups.push((bytes.len(), at, *default, true));
                bytes.extend([0; 4]);
                bytes.extend(low.to_be_bytes());
                bytes.extend((low + targets.len() as i32 - 1).to_be_bytes());
                for t in targets {
                    fixups.push((bytes.len(), at, *t, true));
                    bytes.extend([0; 4]);
                }
            }
            Asm::LookupSwitch(default, pairs) => {
                bytes.push(op::LOOKUPSWITCH);
                while !bytes.len().is_multiple_of(4) {
                    bytes.push(0);
                }
                fixups.push((bytes.len(), at, *default, true));
                bytes.extend([0; 4]);
                bytes.extend((pairs.len() as i32).to_be_bytes());
                for (k, t) in pairs {
                    bytes.extend(k.to_be_bytes());
                    fixups.push((bytes.len(), at, *t, true));
                    bytes.extend([0; 4]);
                }
            }
            Asm::Mark(l) => {
                marks.insert(*l, at);
            }
            Asm::Line(n) => lines.push((at as u16, *n)),
        }
    }
    for (pos, insn, label, wide) in fixups {
        let target = *marks.get(&label).expect("jump to unmarked label");
        let delta = target as i64 - insn as i64;
        if wide {
            bytes[pos..pos + 4].copy_from_slice(&(delta as i32).to_be_bytes());
        } else {
            bytes[pos..pos + 2].copy_from_slice(&(delta as i16).to_be_bytes());
        }
    }

    let mut out = u16b(code.max_stack);
    out.extend(u16b(code.max_locals));
    out.extend((bytes.len() as u32).to_be_bytes());
    out.extend(&bytes);
    out.extend(u16b(code.handlers.len() as u16));
    for (s, e, h, t) in &code.handlers {
        for l in [s, e, h] {
            out.extend(u16b(marks[l] as u16));
        }
        out.extend(u16b(t.as_deref().map(|t| pool.class(t)).unwrap_or(0)));
    }
    let mut attrs = Vec::new();
    if !lines.is_empty() {
        let mut d = u16b(lines.len() as u16);
        for (pc, n) in &lines {
            d.extend(u16b(*pc));
            d.extend(u16b(*n));
        }
        attrs.push(attribute(pool, "LineNumberTable", &d));
    }
    if !code.locals.is_empty() {
        let mut d = u16b(code.locals.len() as u16);
        for (s, e, name, desc, idx) in &code.locals {
            let start = marks[s];
            d.extend(u16b(start as u16));
            d.extend(u16b((marks[e] - start) as u16));
            d.extend(u16b(pool.utf8(name)));
            d.extend(u16b(pool.utf8(desc)));
            d.extend(u16b(*idx));
        }
        attrs.push(attribute(pool, "LocalVariableTable", &d));
    }
    out.extend(u16b(attrs.len() as u16));
    for a in attrs {
        out.extend(a);
    }
    out
}

/// Argument slots of a method descriptor (longs and doubles take two).
fn arg_slots(desc: &str) -> u8 {
    let b = desc.as_bytes();
    let mut i = 1;
    let mut n = 0u8;
    while b[i] != b')' {
        let mut array = false;
        while b[i] == b'[' {
            array = true;
            i += 1;
        }
        if b[i] == b'L' {
            while b[i] != b';' {
                i += 1;
            }
        }
        n += if !array && (b[i] == b'J' || b[i] == b'D') { 2 } else { 1 };
        i += 1;
    }
    n
}

#[derive(Default)]
struct Pool {
    bytes: Vec<u8>,
    count: u16,
    index: HashMap<Vec<u8>, u16>,
    bootstraps: Vec<(u16, Vec<u16>)>,
}

impl Pool {
    fn add(&mut self, entry: Vec<u8>, slots: u16) -> u16 {
        if self.count == 0 {
            self.count = 1;
        }
        if let Some(&i) = self.index.get(&entry) {
            return i;
        }
        let i = self.count;
        self.bytes.extend(&entry);
        self.index.insert(entry, i);
        self.count += slots;
        i
    }

    fn utf8(&mut self, s: &str) -> u16 {
        let mut e = vec![1];
        let enc = modified_utf8(s);
        e.extend(u16b(enc.len() as u16));
        e.extend(enc);
        self.add(e, 1)
    }

    fn class(&mut self, name: &str) -> u16 {
        let n = self.utf8(name);
        self.add([vec![7], u16b(n)].concat(), 1)
    }

    fn int(&mut self, v: i32) -> u16 {
        self.add([vec![3], v.to_be_bytes().to_vec()].concat(), 1)
    }

    fn long(&mut self, v: i64) -> u16 {
        self.add([vec![5], v.to_be_bytes().to_vec()].concat(), 2)
    }

    fn name_and_type(&mut self, name: &str, desc: &str) -> u16 {
        let n = self.utf8(name);
        let d = self.utf8(desc);
        self.add([vec![12], u16b(n), u16b(d)].concat(), 1)
    }

    fn member_ref(&mut self, tag: u8, owner: &str, name: &str, desc: &str) -> u16 {
        let c = self.class(owner);
        let nt = self.name_and_type(name, desc);
        self.add([vec![tag], u16b(c), u16b(nt)].concat(), 1)
    }

    fn handle(&mut self, h: &HandleSpec) -> u16 {
        let tag = match (h.kind, h.interface) {
            (1..=4, _) => 9,
            (_, true) => 11,
            _ => 10,
        };
        let r = self.member_ref(tag, &h.owner, &h.name, &h.descriptor);
        self.add([vec![15, h.kind], u16b(r)].concat(), 1)
    }

    fn ldc(&mut self, c: &Ldc) -> u16 {
        match c {
            Ldc::Int(v) => self.int(*v),
            Ldc::Float(v) => self.add([vec![4], v.to_bits().to_be_bytes().to_vec()].concat(), 1),
            Ldc::Long(v) => self.long(*v),
            Ldc::Double(v) => self.add([vec![6], v.to_bits().to_be_bytes().to_vec()].concat(), 2),
            Ldc::Str(s) => {
                let u = self.utf8(s);
                self.add([vec![8], u16b(u)].concat(), 1)
            }
            Ldc::Class(n) => self.class(n),
            Ldc::MethodType(d) => {
                let u = self.utf8(d);
                self.add([vec![16], u16b(u)].concat(), 1)
            }
            Ldc::Handle(h) => self.handle(h),
        }
    }

    fn invoke_dynamic(&mut self, name: &str, desc: &str, bsm: &Bsm) -> u16 {
        let h = self.handle(&bsm.handle);
        let args: Vec<u16> = bsm.args.iter().map(|a| self.ldc(a)).collect();
        let key = (h, args);
        let b = match self.bootstraps.iter().position(|x| *x == key) {
            Some(i) => i,
            None => {
                self.bootstraps.push(key);
                self.bootstraps.len() - 1
            }
        } as u16;
        let nt = self.name_and_type(name, desc);
        self.add([vec![18], u16b(b), u16b(nt)].concat(), 1)
    }
}

fn modified_utf8(s: &str) -> Vec<u8> {
    let mut out = Vec::new();
    for unit in s.encode_utf16() {
        match unit {
            0x0001..=0x007f => out.push(unit as u8),
            0x0000 | 0x0080..=0x07ff => {
                out.push(0xc0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
            _ => {
                out.push(0xe0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3f) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
        }
    }
    out
}

/// Writes a jar (zip) with the given entries, in the given order.
pub fn write_jar(entries: &[(&str, &[u8])]) -> Vec<u8> {
    let mut buf = std::io::Cursor::new(Vec::new());
    {
        let mut zip = zip::ZipWriter::new(&mut buf);
        let opts = zip::write::SimpleFileOptions::default()
            .compression_method(zip::CompressionMethod::Deflated)
            .last_modified_time(zip::DateTime::default());
        for (name, data) in entries {
            zip.start_file(*name, opts).expect("zip entry");
            zip.write_all(data).expect("zip write");
        }
        zip.finish().expect("zip finish");
    }
    buf.into_inner()
}

/// Standard `java.lang.invoke.LambdaMetafactory.metafactory` bootstrap.
pub fn lambda_bsm(impl_owner: &str, impl_name: &str, impl_desc: &str, erased: &str) -> Bsm {
    Bsm {
        handle: HandleSpec {
            kind: 6,
            owner: "java/lang/invoke/LambdaMetafactory".into(),
            name: "metafactory".into(),
            descriptor: "(Ljava/lang/invoke/MethodHandles$Lookup;Ljava/lang/String;Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodHandle;Ljava/lang/invoke/MethodType;)Ljava/lang/invoke/CallSite;".into(),
            interface: false,
        },
        args: vec![
            Ldc::MethodType(erased.into()),
            Ldc::Handle(HandleSpec {
                kind: 6,
                owner: impl_owner.into(),
                name: impl_name.into(),
                descriptor: impl_desc.into(),
                interface: false,
            }),
            Ldc::MethodType(erased.into()),
        ],
    }
}
