//! Class-file parsing.
//!
//! [`parse_class`] turns the raw bytes of a `.class` file into a
//! [`ClassModel`] whose constant-pool references are all resolved to
//! symbolic values. Attributes that only carry build noise (line numbers,
//! local-variable tables, stack maps) are dropped here; attributes outside
//! the known set are rejected with [`ClassFileError::Unsupported`].

mod code;
pub mod descriptor;
mod model;
pub mod opcodes;
mod pool;
mod reader;

pub use code::{decode_code, RawHandler};
pub use model::*;
pub use pool::ConstantPool;

use pool::RawBootstrap;
use reader::Cursor;

pub const MAGIC: u32 = 0xCAFE_BABE;
pub const MIN_MAJOR: u16 = 45;
pub const MAX_MAJOR: u16 = 65;

pub const ACC_PUBLIC: u16 = 0x0001;
pub const ACC_PRIVATE: u16 = 0x0002;
pub const ACC_PROTECTED: u16 = 0x0004;
pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_FINAL: u16 = 0x0010;
pub const ACC_SUPER: u16 = 0x0020;
pub const ACC_SYNCHRONIZED: u16 = 0x0020;
pub const ACC_VOLATILE: u16 = 0x0040;
pub const ACC_BRIDGE: u16 = 0x0040;
pub const ACC_TRANSIENT: u16 = 0x0080;
pub const ACC_VARARGS: u16 = 0x0080;
pub const ACC_NATIVE: u16 = 0x0100;
pub const ACC_INTERFACE: u16 = 0x0200;
pub const ACC_ABSTRACT: u16 = 0x0400;
pub const ACC_STRICT: u16 = 0x0800;
pub const ACC_SYNTHETIC: u16 = 0x1000;
pub const ACC_ANNOTATION: u16 = 0x2000;
pub const ACC_ENUM: u16 = 0x4000;
pub const ACC_MODULE: u16 = 0x8000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassFileError {
    #[error("malformed class file: {0}")]
    Malformed(String),
    #[error("malformed code at offset {offset}: {message}")]
    MalformedCode { offset: usize, message: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

/// Attributes that are recognized and deliberately discarded.
const DROPPED_ATTRIBUTES: &[&str] = &[
    "StackMapTable",
    "LineNumberTable",
    "LocalVariableTable",
    "LocalVariableTypeTable",
    "Deprecated",
    "MethodParameters",
    "Synthetic",
    "SourceDebugExtension",
    "RuntimeVisibleTypeAnnotations",
    "RuntimeInvisibleTypeAnnotations",
    "Module",
    "ModulePackages",
    "ModuleMainClass",
];

struct RawAttribute<'a> {
    name: &'a str,
    data: &'a [u8],
}

struct RawMember<'a> {
    access_flags: u16,
    name: &'a str,
    descriptor: &'a str,
    attributes: Vec<RawAttribute<'a>>,
}

fn read_attributes<'a>(cur: &mut Cursor<'a>, pool: &'a ConstantPool) -> Result<Vec<RawAttribute<'a>>, ClassFileError> {
    let count = cur.u16()?;
    (0..count)
        .map(|_| {
            let name = pool.utf8(cur.u16()?)?;
            let len = cur.u32()? as usize;
            Ok(RawAttribute { name, data: cur.bytes(len)? })
        })
        .collect()
}

fn read_members<'a>(cur: &mut Cursor<'a>, pool: &'a ConstantPool) -> Result<Vec<RawMember<'a>>, ClassFileError> {
    let count = cur.u16()?;
    (0..count)
        .map(|_| {
            let access_flags = cur.u16()?;
            let name = pool.utf8(cur.u16()?)?;
            let descriptor = pool.utf8(cur.u16()?)?;
            let attributes = read_attributes(cur, pool)?;
            Ok(RawMember { access_flags, name, descriptor, attributes })
        })
        .collect()
}

/// Parses a complete class file.
pub fn parse_class(bytes: &[u8]) -> Result<ClassModel, ClassFileError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.u32()?;
    if magic != MAGIC {
        return Err(ClassFileError::Malformed(format!("bad magic 0x{magic:08X}, expected 0xCAFEBABE")));
    }
    let minor_version = cur.u16()?;
    let major_version = cur.u16()?;
    if !(MIN_MAJOR..=MAX_MAJOR).contains(&major_version) {
        return Err(ClassFileError::Unsupported(format!(
            "class file major version {major_version} (supported: {MIN_MAJOR}-{MAX_MAJOR})"
        )));
    }

    let mut pool = ConstantPool::read(&mut cur)?;
    let access_flags = cur.u16()?;
    let this_index = cur.u16()?;
    let super_index = cur.u16()?;
    let interface_indices: Vec<u16> = (0..cur.u16()?).map(|_| cur.u16()).collect::<Result<_, _>>()?;

    // Members and attributes are read raw first: decoding `invokedynamic`
    // needs the class-level BootstrapMethods table, which comes last.
    let (raw_fields, raw_methods, raw_class_attrs, bootstraps) = {
        let pool_ref = &pool;
        let fields = read_members(&mut cur, pool_ref)?;
        let methods = read_members(&mut cur, pool_ref)?;
        let class_attrs = read_attributes(&mut cur, pool_ref)?;
        cur.finish("class file")?;
        let bootstraps = match class_attrs.iter().find(|a| a.name == "BootstrapMethods") {
            Some(a) => read_bootstrap_table(a.data)?,
            None => Vec::new(),
        };
        let own = |m: &RawMember<'_>| OwnedMember {
            access_flags: m.access_flags,
            name: m.name.to_string(),
            descriptor: m.descriptor.to_string(),
            attributes: m.attributes.iter().map(|a| (a.name.to_string(), a.data.to_vec())).collect(),
        };
        (
            fields.iter().map(own).collect::<Vec<_>>(),
            methods.iter().map(own).collect::<Vec<_>>(),
            class_attrs.iter().map(|a| (a.name.to_string(), a.data.to_vec())).collect::<Vec<_>>(),
            bootstraps,
        )
    };
    pool.set_bootstraps(bootstraps);

    let this_class = pool.class_name(this_index)?.to_string();
    if this_class.is_empty() {
        return Err(ClassFileError::Malformed("empty this_class name".into()));
    }
    let super_class = match super_index {
        0 => None,
        i => Some(pool.class_name(i)?.to_string()),
    };
    if super_class.is_none() && this_class != "java/lang/Object" && access_flags & ACC_MODULE == 0 {
        return Err(ClassFileError::Malformed(format!("{this_class} has no superclass")));
    }
    let interfaces =
        interface_indices.into_iter().map(|i| pool.class_name(i).map(str::to_string)).collect::<Result<_, _>>()?;

    let fields = raw_fields.iter().map(|m| parse_member(m, &pool, MemberKind::Field)).collect::<Result<_, _>>()?;
    let methods = raw_methods.iter().map(|m| parse_member(m, &pool, MemberKind::Method)).collect::<Result<_, _>>()?;

    let mut attributes = Vec::new();
    let mut annotations = Vec::new();
    for (name, data) in &raw_class_attrs {
        let mut c = Cursor::new(data);
        match name.as_str() {
            "Signature" => attributes.push(ClassAttribute::Signature(pool.utf8(c.u16()?)?.to_string())),
            "SourceFile" => attributes.push(ClassAttribute::SourceFile(pool.utf8(c.u16()?)?.to_string())),
            "RuntimeVisibleAnnotations" | "RuntimeInvisibleAnnotations" => {
                annotations.extend(read_annotations(&mut c, &pool)?)
            }
            "InnerClasses" => {
                let n = c.u16()?;
                let mut entries = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let inner = pool.class_name(c.u16()?)?.to_string();
                    let outer = match c.u16()? {
                        0 => None,
                        i => Some(pool.class_name(i)?.to_string()),
                    };
                    let inner_name = match c.u16()? {
                        0 => None,
                        i => Some(pool.utf8(i)?.to_string()),
                    };
                    entries.push(InnerClassEntry { inner, outer, inner_name, access_flags: c.u16()? });
                }
                attributes.push(ClassAttribute::InnerClasses(entries));
            }
            "BootstrapMethods" => {
                let n = read_bootstrap_table(data)?.len();
                let resolved = (0..n as u16).map(|i| pool.bootstrap(i)).collect::<Result<_, _>>()?;
                attributes.push(ClassAttribute::BootstrapMethods(resolved));
                continue;
            }
            "EnclosingMethod" => {
                let class = pool.class_name(c.u16()?)?.to_string();
                let method = match c.u16()? {
                    0 => None,
                    i => {
                        let (n, d) = pool.name_and_type(i)?;
                        Some((n.to_string(), d.to_string()))
                    }
                };
                attributes.push(ClassAttribute::EnclosingMethod { class, method });
            }
            "NestHost" => attributes.push(ClassAttribute::NestHost(pool.class_name(c.u16()?)?.to_string())),
            "NestMembers" => attributes.push(ClassAttribute::NestMembers(read_class_list(&mut c, &pool)?)),
            "PermittedSubclasses" => {
                attributes.push(ClassAttribute::PermittedSubclasses(read_class_list(&mut c, &pool)?))
            }
            "Record" => {
                let n = c.u16()?;
                let mut components = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let name = pool.utf8(c.u16()?)?.to_string();
                    let descriptor = pool.utf8(c.u16()?)?.to_string();
                    let mut signature = None;
                    for a in read_attributes(&mut c, &pool)? {
                        match a.name {
                            "Signature" => signature = Some(pool.utf8(Cursor::new(a.data).u16()?)?.to_string()),
                            "RuntimeVisibleAnnotations" | "RuntimeInvisibleAnnotations" => {}
                            other => check_dropped(other, "record component")?,
                        }
                    }
                    components.push(RecordComponent { name, descriptor, signature });
                }
                attributes.push(ClassAttribute::Record(components));
            }
            other => {
                check_dropped(other, "class")?;
                continue;
            }
        }
        c.finish(name)?;
    }
    if !annotations.is_empty() {
        attributes.push(ClassAttribute::Annotations(annotations));
    }

    Ok(ClassModel {
        major_version,
        minor_version,
        access_flags,
        this_class,
        super_class,
        interfaces,
        fields,
        methods,
        attributes,
    })
}

struct OwnedMember {
    access_flags: u16,
    name: String,
    descriptor: String,
    attributes: Vec<(String, Vec<u8>)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MemberKind {
    Field,
    Method,
}

fn check_dropped(name: &str, context: &str) -> Result<(), ClassFileError> {
    if DROPPED_ATTRIBUTES.contains(&name) {
        Ok(())
    } else {
        Err(ClassFileError::Unsupported(format!("{context} attribute {name}")))
    }
}

fn read_class_list(c: &mut Cursor<'_>, pool: &ConstantPool) -> Result<Vec<String>, ClassFileError> {
    (0..c.u16()?).map(|_| Ok(pool.class_name(c.u16()?)?.to_string())).collect()
}

fn read_bootstrap_table(data: &[u8]) -> Result<Vec<RawBootstrap>, ClassFileError> {
    let mut c = Cursor::new(data);
    let n = c.u16()?;
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let handle = c.u16()?;
        let arguments = (0..c.u16()?).map(|_| c.u16()).collect::<Result<_, _>>()?;
        out.push(RawBootstrap { handle, arguments });
    }
    c.finish("BootstrapMethods")?;
    Ok(out)
}

fn parse_member(raw: &OwnedMember, pool: &ConstantPool, kind: MemberKind) -> Result<MemberModel, ClassFileError> {
    let well_formed = match kind {
        MemberKind::Field => descriptor::is_field_descriptor(&raw.descriptor),
        MemberKind::Method => descriptor::is_method_descriptor(&raw.descriptor),
    };
    if !well_formed {
        return Err(ClassFileError::Malformed(format!(
            "member {} has malformed descriptor {:?}",
            raw.name, raw.descriptor
        )));
    }
    let context = match kind {
        MemberKind::Field => "field",
        MemberKind::Method => "method",
    };
    let mut member = MemberModel::new(raw.name.clone(), raw.descriptor.clone(), raw.access_flags);
    for (name, data) in &raw.attributes {
        let mut c = Cursor::new(data);
        match (kind, name.as_str()) {
            (_, "Signature") => member.signature = Some(pool.utf8(c.u16()?)?.to_string()),
            (_, "RuntimeVisibleAnnotations" | "RuntimeInvisibleAnnotations") => {
                member.annotations.extend(read_annotations(&mut c, pool)?)
            }
            (MemberKind::Method, "RuntimeVisibleParameterAnnotations" | "RuntimeInvisibleParameterAnnotations") => {
                let n = c.u8()? as usize;
                if member.parameter_annotations.len() < n {
                    member.parameter_annotations.resize(n, Vec::new());
                }
                for i in 0..n {
                    let anns = read_annotations(&mut c, pool)?;
                    member.parameter_annotations[i].extend(anns);
                    member.parameter_annotations[i].sort_by(|a, b| a.type_descriptor.cmp(&b.type_descriptor));
                }
            }
            (MemberKind::Method, "Exceptions") => member.exceptions = read_class_list(&mut c, pool)?,
            (MemberKind::Method, "AnnotationDefault") => {
                member.annotation_default = Some(read_element_value(&mut c, pool, 0)?)
            }
            (MemberKind::Field, "ConstantValue") => member.constant_value = Some(pool.constant(c.u16()?)?),
            (MemberKind::Method, "Code") => {
                member.code = Some(parse_code_attribute(&mut c, pool)?);
            }
            (_, other) => {
                check_dropped(other, context)?;
                continue;
            }
        }
        c.finish(name)?;
    }
    member.annotations.sort_by(|a, b| a.type_descriptor.cmp(&b.type_descriptor));
    Ok(member)
}

fn parse_code_attribute(c: &mut Cursor<'_>, pool: &ConstantPool) -> Result<InstructionSeq, ClassFileError> {
    let _max_stack = c.u16()?;
    let _max_locals = c.u16()?;
    let len = c.u32()? as usize;
    let code = c.bytes(len)?;
    let handlers = (0..c.u16()?)
        .map(|_| Ok(RawHandler { start_pc: c.u16()?, end_pc: c.u16()?, handler_pc: c.u16()?, catch_type: c.u16()? }))
        .collect::<Result<Vec<_>, ClassFileError>>()?;
    let n = c.u16()?;
    for _ in 0..n {
        let name = pool.utf8(c.u16()?)?;
        let len = c.u32()? as usize;
        c.skip(len)?;
        check_dropped(name, "code")?;
    }
    decode_code(code, &handlers, pool)
}

const MAX_ANNOTATION_DEPTH: usize = 64;

fn read_annotations(c: &mut Cursor<'_>, pool: &ConstantPool) -> Result<Vec<Annotation>, ClassFileError> {
    (0..c.u16()?).map(|_| read_annotation(c, pool, 0)).collect()
}

fn read_annotation(c: &mut Cursor<'_>, pool: &ConstantPool, depth: usize) -> Result<Annotation, ClassFileError> {
    let type_descriptor = pool.utf8(c.u16()?)?.to_string();
    let mut elements = (0..c.u16()?)
        .map(|_| {
            let name = pool.utf8(c.u16()?)?.to_string();
            Ok((name, read_element_value(c, pool, depth + 1)?))
        })
        .collect::<Result<Vec<_>, ClassFileError>>()?;
    elements.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Annotation { type_descriptor, elements })
}

fn read_element_value(c: &mut Cursor<'_>, pool: &ConstantPool, depth: usize) -> Result<ElementValue, ClassFileError> {
    if depth > MAX_ANNOTATION_DEPTH {
        return Err(ClassFileError::Malformed("annotation nesting too deep".into()));
    }
    let tag = c.u8()? as char;
    Ok(match tag {
        'B' | 'C' | 'I' | 'S' | 'Z' | 'D' | 'F' | 'J' => {
            let value = pool.constant(c.u16()?)?;
            let expected = match tag {
                'D' => "double",
                'F' => "float",
                'J' => "long",
                _ => "int",
            };
            if value.kind() != expected {
                return Err(ClassFileError::Malformed(format!(
                    "element value tag {tag} with {} constant",
                    value.kind()
                )));
            }
            ElementValue::Const { tag, value }
        }
        's' => ElementValue::Const { tag, value: Constant::String(pool.utf8(c.u16()?)?.to_string()) },
        'e' => ElementValue::Enum {
            type_descriptor: pool.utf8(c.u16()?)?.to_string(),
            name: pool.utf8(c.u16()?)?.to_string(),
        },
        'c' => ElementValue::Class(pool.utf8(c.u16()?)?.to_string()),
        '@' => ElementValue::Annotation(read_annotation(c, pool, depth + 1)?),
        '[' => ElementValue::Array(
            (0..c.u16()?).map(|_| read_element_value(c, pool, depth + 1)).collect::<Result<_, _>>()?,
        ),
        other => return Err(ClassFileError::Malformed(format!("invalid element value tag {other:?}"))),
    })
}
