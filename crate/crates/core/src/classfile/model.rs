use std::fmt;

use super::opcodes::OpInfo;

/// Decoded class file. All constant-pool references are resolved; the model
/// carries no raw pool indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub major_version: u16,
    pub minor_version: u16,
    pub access_flags: u16,
    pub this_class: String,
    /// Absent only for `java/lang/Object` (and `module-info`).
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<MemberModel>,
    pub methods: Vec<MemberModel>,
    pub attributes: Vec<ClassAttribute>,
}

impl ClassModel {
    pub fn signature(&self) -> Option<&str> {
        self.attributes.iter().find_map(|a| match a {
            ClassAttribute::Signature(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn source_file(&self) -> Option<&str> {
        self.attributes.iter().find_map(|a| match a {
            ClassAttribute::SourceFile(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn inner_classes(&self) -> &[InnerClassEntry] {
        self.attributes
            .iter()
            .find_map(|a| match a {
                ClassAttribute::InnerClasses(v) => Some(v.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }

    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.attributes.iter().flat_map(|a| match a {
            ClassAttribute::Annotations(v) => v.as_slice(),
            _ => &[],
        })
    }
}

/// Class-level attributes that survive parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassAttribute {
    Signature(String),
    /// Visible and invisible annotations, canonicalized.
    Annotations(Vec<Annotation>),
    InnerClasses(Vec<InnerClassEntry>),
    SourceFile(String),
    BootstrapMethods(Vec<BootstrapMethod>),
    EnclosingMethod {
        class: String,
        method: Option<(String, String)>,
    },
    NestHost(String),
    NestMembers(Vec<String>),
    PermittedSubclasses(Vec<String>),
    Record(Vec<RecordComponent>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerClassEntry {
    pub inner: String,
    pub outer: Option<String>,
    /// `None` for anonymous classes.
    pub inner_name: Option<String>,
    pub access_flags: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordComponent {
    pub name: String,
    pub descriptor: String,
    pub signature: Option<String>,
}

/// A field or method.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberModel {
    pub name: String,
    pub descriptor: String,
    pub access_flags: u16,
    pub signature: Option<String>,
    pub annotations: Vec<Annotation>,
    /// Per-parameter annotations (methods only), indexed by parameter.
    pub parameter_annotations: Vec<Vec<Annotation>>,
    /// Declared thrown types (methods only).
    pub exceptions: Vec<String>,
    /// Initial value of a static final field.
    pub constant_value: Option<Constant>,
    /// Default value of an annotation-interface element.
    pub annotation_default: Option<ElementValue>,
    pub code: Option<InstructionSeq>,
}

impl MemberModel {
    pub fn new(name: impl Into<String>, descriptor: impl Into<String>, access_flags: u16) -> Self {
        MemberModel {
            name: name.into(),
            descriptor: descriptor.into(),
            access_flags,
            signature: None,
            annotations: Vec::new(),
            parameter_annotations: Vec::new(),
            exceptions: Vec::new(),
            constant_value: None,
            annotation_default: None,
            code: None,
        }
    }
}

/// Opaque label token. Values carry no meaning beyond identity; the
/// extractor renames labels by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodeItem {
    Label(LabelId),
    Insn(Instruction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TryCatchBlock {
    pub start: LabelId,
    pub end: LabelId,
    pub handler: LabelId,
    /// `None` for catch-all (`finally`) handlers.
    pub catch_type: Option<String>,
}

/// Decoded body of a method: instructions interleaved with the labels they
/// target, plus the exception table in declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstructionSeq {
    pub items: Vec<CodeItem>,
    pub try_catch: Vec<TryCatchBlock>,
}

impl InstructionSeq {
    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.items.iter().filter_map(|i| match i {
            CodeItem::Insn(insn) => Some(insn),
            CodeItem::Label(_) => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: &'static OpInfo,
    pub operand: Operand,
}

impl Instruction {
    pub fn mnemonic(&self) -> &'static str {
        self.op.mnemonic
    }

    /// Label tokens this instruction may transfer control to.
    pub fn targets(&self) -> Vec<LabelId> {
        match &self.operand {
            Operand::Jump(l) => vec![*l],
            Operand::TableSwitch { default, targets, .. } => {
                std::iter::once(*default).chain(targets.iter().copied()).collect()
            }
            Operand::LookupSwitch { default, pairs } => {
                std::iter::once(*default).chain(pairs.iter().map(|(_, l)| *l)).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    None,
    Var(u16),
    Iinc {
        var: u16,
        delta: i16,
    },
    /// Immediate of `bipush` / `sipush`.
    Int(i32),
    /// Element type code of `newarray` (4 = boolean ... 11 = long).
    ArrayType(u8),
    Constant(Constant),
    Field {
        owner: String,
        name: String,
        descriptor: String,
    },
    Method {
        owner: String,
        name: String,
        descriptor: String,
        interface: bool,
    },
    InvokeDynamic {
        name: String,
        descriptor: String,
        bootstrap: BootstrapMethod,
    },
    Type(String),
    MultiANewArray {
        class: String,
        dimensions: u8,
    },
    Jump(LabelId),
    TableSwitch {
        low: i32,
        high: i32,
        default: LabelId,
        targets: Vec<LabelId>,
    },
    LookupSwitch {
        default: LabelId,
        pairs: Vec<(i32, LabelId)>,
    },
}

/// Name of a `newarray` element type code.
pub fn array_type_name(code: u8) -> Option<&'static str> {
    Some(match code {
        4 => "boolean",
        5 => "char",
        6 => "float",
        7 => "double",
        8 => "byte",
        9 => "short",
        10 => "int",
        11 => "long",
        _ => return None,
    })
}

/// Method handle as stored in a `CONSTANT_MethodHandle` entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Handle {
    pub kind: u8,
    pub owner: String,
    pub name: String,
    pub descriptor: String,
    pub interface: bool,
}

impl Handle {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            1 => "getField",
            2 => "getStatic",
            3 => "putField",
            4 => "putStatic",
            5 => "invokeVirtual",
            6 => "invokeStatic",
            7 => "invokeSpecial",
            8 => "newInvokeSpecial",
            9 => "invokeInterface",
            _ => "unknown",
        }
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}.{}:{}", self.kind_name(), self.owner, self.name, self.descriptor)?;
        if self.interface {
            f.write_str(" itf")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapMethod {
    pub handle: Handle,
    pub arguments: Vec<Constant>,
}

impl fmt::Display for BootstrapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.handle)?;
        for (i, arg) in self.arguments.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", arg.tagged())?;
        }
        f.write_str(")")
    }
}

/// A loadable constant, resolved from the pool.
#[derive(Debug, Clone, PartialEq)]
pub enum Constant {
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    String(String),
    Class(String),
    MethodType(String),
    MethodHandle(Handle),
    Dynamic { name: String, descriptor: String, bootstrap: Box<BootstrapMethod> },
}

impl Constant {
    /// Short kind tag used as a separate fact column.
    pub fn kind(&self) -> &'static str {
        match self {
            Constant::Int(_) => "int",
            Constant::Long(_) => "long",
            Constant::Float(_) => "float",
            Constant::Double(_) => "double",
            Constant::String(_) => "string",
            Constant::Class(_) => "class",
            Constant::MethodType(_) => "methodtype",
            Constant::MethodHandle(_) => "methodhandle",
            Constant::Dynamic { .. } => "dynamic",
        }
    }

    /// Canonical text without a kind prefix: integers in decimal, longs with
    /// an `L` suffix, floating point as the shortest round-trip decimal with
    /// an `F`/`D` suffix, strings verbatim.
    pub fn canonical(&self) -> String {
        match self {
            Constant::Int(v) => v.to_string(),
            Constant::Long(v) => format!("{v}L"),
            Constant::Float(v) => format!("{}F", canonical_float(*v as f64, v.is_nan(), || format!("{v:?}"))),
            Constant::Double(v) => format!("{}D", canonical_float(*v, v.is_nan(), || format!("{v:?}"))),
            Constant::String(s) | Constant::Class(s) | Constant::MethodType(s) => s.clone(),
            Constant::MethodHandle(h) => h.to_string(),
            Constant::Dynamic { name, descriptor, bootstrap } => {
                format!("{name}:{descriptor} {bootstrap}")
            }
        }
    }

    /// Canonical text prefixed with the kind, unambiguous across kinds.
    pub fn tagged(&self) -> String {
        match self {
            Constant::String(s) => quote(s),
            other => format!("{}:{}", other.kind(), other.canonical()),
        }
    }
}

fn canonical_float(v: f64, nan: bool, shortest: impl FnOnce() -> String) -> String {
    if nan {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "Infinity" } else { "-Infinity" }.to_string()
    } else {
        shortest()
    }
}

/// Double-quoted string with `"` and `\` escaped.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Annotation with element-value pairs sorted by element name.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub type_descriptor: String,
    pub elements: Vec<(String, ElementValue)>,
}

impl Annotation {
    /// Canonical text of the element-value pairs, e.g. `{a=I:1,b="x"}`.
    pub fn values_text(&self) -> String {
        let mut out = String::from("{");
        for (i, (name, value)) in self.elements.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(name);
            out.push('=');
            out.push_str(&value.to_string());
        }
        out.push('}');
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementValue {
    /// Primitive or string constant; the tag is the element-value tag byte
    /// (`B C D F I J S Z s`).
    Const {
        tag: char,
        value: Constant,
    },
    Enum {
        type_descriptor: String,
        name: String,
    },
    Class(String),
    Annotation(Annotation),
    Array(Vec<ElementValue>),
}

impl fmt::Display for ElementValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementValue::Const { tag: 's', value } => write!(f, "{}", value.tagged()),
            ElementValue::Const { tag, value } => write!(f, "{}:{}", tag, value.canonical()),
            ElementValue::Enum { type_descriptor, name } => write!(f, "{type_descriptor}.{name}"),
            ElementValue::Class(d) => write!(f, "class:{d}"),
            ElementValue::Annotation(a) => write!(f, "@{}{}", a.type_descriptor, a.values_text()),
            ElementValue::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}
