//! Constant pool decoding and symbolic resolution.

use super::model::{BootstrapMethod, Constant, Handle};
use super::reader::Cursor;
use super::ClassFileError;

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    /// Slot 0 and the upper half of long/double entries.
    Unusable,
    Utf8(String),
    Integer(i32),
    Float(f32),
    Long(i64),
    Double(f64),
    Class(u16),
    String(u16),
    FieldRef(u16, u16),
    MethodRef(u16, u16),
    InterfaceMethodRef(u16, u16),
    NameAndType(u16, u16),
    MethodHandle(u8, u16),
    MethodType(u16),
    Dynamic(u16, u16),
    InvokeDynamic(u16, u16),
    Module(u16),
    Package(u16),
}

/// Bootstrap method as stored in the `BootstrapMethods` attribute, before
/// resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawBootstrap {
    pub handle: u16,
    pub arguments: Vec<u16>,
}

/// Decoded constant pool. Resolution methods turn indices into symbolic
/// values and reject out-of-range indices or entries of the wrong kind.
#[derive(Debug, Clone, Default)]
pub struct ConstantPool {
    entries: Vec<Entry>,
    bootstraps: Vec<RawBootstrap>,
}

/// Resolution of dynamically-computed constants may nest; cycles are illegal
/// but have to be rejected rather than followed.
const MAX_DYNAMIC_DEPTH: usize = 32;

impl ConstantPool {
    /// A pool with no entries, for decoding code that references none.
    pub fn empty() -> Self {
        ConstantPool { entries: vec![Entry::Unusable], bootstraps: Vec::new() }
    }

    pub(crate) fn read(cur: &mut Cursor<'_>) -> Result<Self, ClassFileError> {
        let count = cur.u16()? as usize;
        if count == 0 {
            return Err(ClassFileError::Malformed("constant pool count is zero".into()));
        }
        let mut entries = Vec::with_capacity(count);
        entries.push(Entry::Unusable);
        while entries.len() < count {
            let at = entries.len();
            let tag = cur.u8()?;
            let entry = match tag {
                1 => {
                    let len = cur.u16()? as usize;
                    Entry::Utf8(decode_modified_utf8(cur.bytes(len)?))
                }
                3 => Entry::Integer(cur.i32()?),
                4 => Entry::Float(f32::from_bits(cur.u32()?)),
                5 => Entry::Long(cur.i64()?),
                6 => Entry::Double(f64::from_bits(cur.u64()?)),
                7 => Entry::Class(cur.u16()?),
                8 => Entry::String(cur.u16()?),
                9 => Entry::FieldRef(cur.u16()?, cur.u16()?),
                10 => Entry::MethodRef(cur.u16()?, cur.u16()?),
                11 => Entry::InterfaceMethodRef(cur.u16()?, cur.u16()?),
                12 => Entry::NameAndType(cur.u16()?, cur.u16()?),
                15 => Entry::MethodHandle(cur.u8()?, cur.u16()?),
                16 => Entry::MethodType(cur.u16()?),
                17 => Entry::Dynamic(cur.u16()?, cur.u16()?),
                18 => Entry::InvokeDynamic(cur.u16()?, cur.u16()?),
                19 => Entry::Module(cur.u16()?),
                20 => Entry::Package(cur.u16()?),
                other => {
                    return Err(ClassFileError::Malformed(format!("invalid constant pool tag {other} at index {at}")))
                }
            };
            let wide = matches!(entry, Entry::Long(_) | Entry::Double(_));
            entries.push(entry);
            if wide {
                if entries.len() >= count {
                    return Err(ClassFileError::Malformed(format!("8-byte constant at index {at} overruns the pool")));
                }
                entries.push(Entry::Unusable);
            }
        }
        Ok(ConstantPool { entries, bootstraps: Vec::new() })
    }

    pub(crate) fn set_bootstraps(&mut self, bootstraps: Vec<RawBootstrap>) {
        self.bootstraps = bootstraps;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.len() <= 1
    }

    fn entry(&self, index: u16) -> Result<&Entry, ClassFileError> {
        match self.entries.get(index as usize) {
            Some(Entry::Unusable) | None => Err(bad_index(index, "valid entry")),
            Some(e) => Ok(e),
        }
    }

    pub fn utf8(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.entry(index)? {
            Entry::Utf8(s) => Ok(s),
            _ => Err(bad_index(index, "Utf8")),
        }
    }

    pub fn class_name(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.entry(index)? {
            Entry::Class(name) => self.utf8(*name),
            _ => Err(bad_index(index, "Class")),
        }
    }

    pub fn name_and_type(&self, index: u16) -> Result<(&str, &str), ClassFileError> {
        match self.entry(index)? {
            Entry::NameAndType(n, d) => Ok((self.utf8(*n)?, self.utf8(*d)?)),
            _ => Err(bad_index(index, "NameAndType")),
        }
    }

    pub fn module_or_package(&self, index: u16) -> Result<&str, ClassFileError> {
        match self.entry(index)? {
            Entry::Module(n) | Entry::Package(n) => self.utf8(*n),
            _ => Err(bad_index(index, "Module or Package")),
        }
    }

    /// Resolves a `Fieldref` into (owner, name, descriptor).
    pub fn field_ref(&self, index: u16) -> Result<(String, String, String), ClassFileError> {
        match self.entry(index)? {
            Entry::FieldRef(c, nt) => {
                let (name, desc) = self.name_and_type(*nt)?;
                Ok((self.class_name(*c)?.to_string(), name.to_string(), desc.to_string()))
            }
            _ => Err(bad_index(index, "Fieldref")),
        }
    }

    /// Resolves a `Methodref` or `InterfaceMethodref` into
    /// (owner, name, descriptor, is-interface).
    pub fn method_ref(&self, index: u16) -> Result<(String, String, String, bool), ClassFileError> {
        let (c, nt, itf) = match self.entry(index)? {
            Entry::MethodRef(c, nt) => (*c, *nt, false),
            Entry::InterfaceMethodRef(c, nt) => (*c, *nt, true),
            _ => return Err(bad_index(index, "Methodref")),
        };
        let (name, desc) = self.name_and_type(nt)?;
        Ok((self.class_name(c)?.to_string(), name.to_string(), desc.to_string(), itf))
    }

    pub fn method_handle(&self, index: u16) -> Result<Handle, ClassFileError> {
        match self.entry(index)? {
            Entry::MethodHandle(kind, reference) => {
                let (owner, name, descriptor, interface) = match kind {
                    1..=4 => {
                        let (o, n, d) = self.field_ref(*reference)?;
                        (o, n, d, false)
                    }
                    5..=9 => self.method_ref(*reference)?,
                    other => {
                        return Err(ClassFileError::Malformed(format!(
                            "invalid method handle kind {other} at index {index}"
                        )))
                    }
                };
                Ok(Handle { kind: *kind, owner, name, descriptor, interface })
            }
            _ => Err(bad_index(index, "MethodHandle")),
        }
    }

    /// Resolves any loadable constant (`ldc` operand, bootstrap argument,
    /// `ConstantValue`).
    pub fn constant(&self, index: u16) -> Result<Constant, ClassFileError> {
        self.constant_at_depth(index, 0)
    }

    fn constant_at_depth(&self, index: u16, depth: usize) -> Result<Constant, ClassFileError> {
        Ok(match self.entry(index)? {
            Entry::Integer(v) => Constant::Int(*v),
            Entry::Float(v) => Constant::Float(*v),
            Entry::Long(v) => Constant::Long(*v),
            Entry::Double(v) => Constant::Double(*v),
            Entry::String(s) => Constant::String(self.utf8(*s)?.to_string()),
            Entry::Class(n) => Constant::Class(self.utf8(*n)?.to_string()),
            Entry::MethodType(d) => Constant::MethodType(self.utf8(*d)?.to_string()),
            Entry::MethodHandle(..) => Constant::MethodHandle(self.method_handle(index)?),
            Entry::Dynamic(bsm, nt) => {
                if depth >= MAX_DYNAMIC_DEPTH {
                    return Err(ClassFileError::Malformed(format!(
                        "dynamic constant nesting too deep at index {index}"
                    )));
                }
                let (name, descriptor) = self.name_and_type(*nt)?;
                Constant::Dynamic {
                    name: name.to_string(),
                    descriptor: descriptor.to_string(),
                    bootstrap: Box::new(self.bootstrap_at_depth(*bsm, depth + 1)?),
                }
            }
            _ => return Err(bad_index(index, "loadable constant")),
        })
    }

    /// Resolves an `InvokeDynamic` entry into (name, descriptor, bootstrap).
    pub fn invoke_dynamic(&self, index: u16) -> Result<(String, String, BootstrapMethod), ClassFileError> {
        match self.entry(index)? {
            Entry::InvokeDynamic(bsm, nt) => {
                let (name, desc) = self.name_and_type(*nt)?;
                Ok((name.to_string(), desc.to_string(), self.bootstrap_at_depth(*bsm, 0)?))
            }
            _ => Err(bad_index(index, "InvokeDynamic")),
        }
    }

    pub fn bootstrap(&self, index: u16) -> Result<BootstrapMethod, ClassFileError> {
        self.bootstrap_at_depth(index, 0)
    }

    fn bootstrap_at_depth(&self, index: u16, depth: usize) -> Result<BootstrapMethod, ClassFileError> {
        let raw = self
            .bootstraps
            .get(index as usize)
            .ok_or_else(|| ClassFileError::Malformed(format!("bootstrap method index {index} out of range")))?;
        let handle = self.method_handle(raw.handle)?;
        let arguments = raw.arguments.iter().map(|&a| self.constant_at_depth(a, depth)).collect::<Result<_, _>>()?;
        Ok(BootstrapMethod { handle, arguments })
    }
}

fn bad_index(index: u16, expected: &str) -> ClassFileError {
    ClassFileError::Malformed(format!("constant pool index {index} is not a {expected}"))
}

/// Decodes the JVM's modified UTF-8. Unpaired surrogates, which Java strings
/// may legally contain, are rendered as `\uXXXX` escapes.
pub(crate) fn decode_modified_utf8(bytes: &[u8]) -> String {
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            units.push(b as u16);
            i += 1;
        } else if b & 0xe0 == 0xc0 && i + 1 < bytes.len() {
            units.push((((b & 0x1f) as u16) << 6) | (bytes[i + 1] & 0x3f) as u16);
            i += 2;
        } else if b & 0xf0 == 0xe0 && i + 2 < bytes.len() {
            units.push(
                (((b & 0x0f) as u16) << 12) | (((bytes[i + 1] & 0x3f) as u16) << 6) | (bytes[i + 2] & 0x3f) as u16,
            );
            i += 3;
        } else {
            // not valid modified UTF-8; keep the byte value visible
            units.push(0xfffd);
            i += 1;
        }
    }
    let mut out = String::with_capacity(units.len());
    for r in char::decode_utf16(units.iter().copied()) {
        match r {
            Ok(c) => out.push(c),
            Err(e) => out.push_str(&format!("\\u{:04X}", e.unpaired_surrogate())),
        }
    }
    out
}
