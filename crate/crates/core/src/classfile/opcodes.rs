//! Static opcode table for the JVM instruction set.
//!
//! Each raw opcode byte maps to an [`OpInfo`] naming its *logical* mnemonic
//! and operand family. Short forms (`iload_0`, `ldc_w`, `goto_w`, ...) share
//! the logical mnemonic of their long form, so the decoder folds them into a
//! single instruction kind.

/// Operand layout of an opcode, grouped the way the decoder consumes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// No operand bytes.
    Simple,
    /// u8 local-variable index (u16 under `wide`).
    Var,
    /// Local-variable index encoded in the opcode itself.
    VarImplicit(u8),
    Iinc,
    Bipush,
    Sipush,
    Newarray,
    /// `ldc` with a u8 pool index.
    Ldc,
    /// `ldc_w` / `ldc2_w` with a u16 pool index.
    LdcWide,
    Field,
    Method,
    InvokeInterface,
    InvokeDynamic,
    Type,
    MultiANewArray,
    /// i16 branch offset.
    Jump,
    /// i32 branch offset (`goto_w`, `jsr_w`).
    JumpWide,
    TableSwitch,
    LookupSwitch,
    Ret,
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpInfo {
    pub code: u8,
    /// Mnemonic as listed in the instruction set reference.
    pub raw: &'static str,
    /// Mnemonic after folding short and wide forms.
    pub mnemonic: &'static str,
    pub family: Family,
}

macro_rules! opcode_table {
    ($( $code:literal => $raw:literal / $logical:literal : $family:expr ),* $(,)?) => {
        const ENTRIES: &[OpInfo] = &[
            $( OpInfo { code: $code, raw: $raw, mnemonic: $logical, family: $family } ),*
        ];
    };
}

use Family::*;

opcode_table! {
    0x00 => "nop" / "nop": Simple,
    0x01 => "aconst_null" / "aconst_null": Simple,
    0x02 => "iconst_m1" / "iconst_m1": Simple,
    0x03 => "iconst_0" / "iconst_0": Simple,
    0x04 => "iconst_1" / "iconst_1": Simple,
    0x05 => "iconst_2" / "iconst_2": Simple,
    0x06 => "iconst_3" / "iconst_3": Simple,
    0x07 => "iconst_4" / "iconst_4": Simple,
    0x08 => "iconst_5" / "iconst_5": Simple,
    0x09 => "lconst_0" / "lconst_0": Simple,
    0x0a => "lconst_1" / "lconst_1": Simple,
    0x0b => "fconst_0" / "fconst_0": Simple,
    0x0c => "fconst_1" / "fconst_1": Simple,
    0x0d => "fconst_2" / "fconst_2": Simple,
    0x0e => "dconst_0" / "dconst_0": Simple,
    0x0f => "dconst_1" / "dconst_1": Simple,
    0x10 => "bipush" / "bipush": Bipush,
    0x11 => "sipush" / "sipush": Sipush,
    0x12 => "ldc" / "ldc": Ldc,
    0x13 => "ldc_w" / "ldc": LdcWide,
    0x14 => "ldc2_w" / "ldc": LdcWide,
    0x15 => "iload" / "iload": Var,
    0x16 => "lload" / "lload": Var,
    0x17 => "fload" / "fload": Var,
    0x18 => "dload" / "dload": Var,
    0x19 => "aload" / "aload": Var,
    0x1a => "iload_0" / "iload": VarImplicit(0),
    0x1b => "iload_1" / "iload": VarImplicit(1),
    0x1c => "iload_2" / "iload": VarImplicit(2),
    0x1d => "iload_3" / "iload": VarImplicit(3),
    0x1e => "lload_0" / "lload": VarImplicit(0),
    0x1f => "lload_1" / "lload": VarImplicit(1),
    0x20 => "lload_2" / "lload": VarImplicit(2),
    0x21 => "lload_3" / "lload": VarImplicit(3),
    0x22 => "fload_0" / "fload": VarImplicit(0),
    0x23 => "fload_1" / "fload": VarImplicit(1),
    0x24 => "fload_2" / "fload": VarImplicit(2),
    0x25 => "fload_3" / "fload": VarImplicit(3),
    0x26 => "dload_0" / "dload": VarImplicit(0),
    0x27 => "dload_1" / "dload": VarImplicit(1),
    0x28 => "dload_2" / "dload": VarImplicit(2),
    0x29 => "dload_3" / "dload": VarImplicit(3),
    0x2a => "aload_0" / "aload": VarImplicit(0),
    0x2b => "aload_1" / "aload": VarImplicit(1),
    0x2c => "aload_2" / "aload": VarImplicit(2),
    0x2d => "aload_3" / "aload": VarImplicit(3),
    0x2e => "iaload" / "iaload": Simple,
    0x2f => "laload" / "laload": Simple,
    0x30 => "faload" / "faload": Simple,
    0x31 => "daload" / "daload": Simple,
    0x32 => "aaload" / "aaload": Simple,
    0x33 => "baload" / "baload": Simple,
    0x34 => "caload" / "caload": Simple,
    0x35 => "saload" / "saload": Simple,
    0x36 => "istore" / "istore": Var,
    0x37 => "lstore" / "lstore": Var,
    0x38 => "fstore" / "fstore": Var,
    0x39 => "dstore" / "dstore": Var,
    0x3a => "astore" / "astore": Var,
    0x3b => "istore_0" / "istore": VarImplicit(0),
    0x3c => "istore_1" / "istore": VarImplicit(1),
    0x3d => "istore_2" / "istore": VarImplicit(2),
    0x3e => "istore_3" / "istore": VarImplicit(3),
    0x3f => "lstore_0" / "lstore": VarImplicit(0),
    0x40 => "lstore_1" / "lstore": VarImplicit(1),
    0x41 => "lstore_2" / "lstore": VarImplicit(2),
    0x42 => "lstore_3" / "lstore": VarImplicit(3),
    0x43 => "fstore_0" / "fstore": VarImplicit(0),
    0x44 => "fstore_1" / "fstore": VarImplicit(1),
    0x45 => "fstore_2" / "fstore": VarImplicit(2),
    0x46 => "fstore_3" / "fstore": VarImplicit(3),
    0x47 => "dstore_0" / "dstore": VarImplicit(0),
    0x48 => "dstore_1" / "dstore": VarImplicit(1),
    0x49 => "dstore_2" / "dstore": VarImplicit(2),
    0x4a => "dstore_3" / "dstore": VarImplicit(3),
    0x4b => "astore_0" / "astore": VarImplicit(0),
    0x4c => "astore_1" / "astore": VarImplicit(1),
    0x4d => "astore_2" / "astore": VarImplicit(2),
    0x4e => "astore_3" / "astore": VarImplicit(3),
    0x4f => "iastore" / "iastore": Simple,
    0x50 => "lastore" / "lastore": Simple,
    0x51 => "fastore" / "fastore": Simple,
    0x52 => "dastore" / "dastore": Simple,
    0x53 => "aastore" / "aastore": Simple,
    0x54 => "bastore" / "bastore": Simple,
    0x55 => "castore" / "castore": Simple,
    0x56 => "sastore" / "sastore": Simple,
    0x57 => "pop" / "pop": Simple,
    0x58 => "pop2" / "pop2": Simple,
    0x59 => "dup" / "dup": Simple,
    0x5a => "dup_x1" / "dup_x1": Simple,
    0x5b => "dup_x2" / "dup_x2": Simple,
    0x5c => "dup2" / "dup2": Simple,
    0x5d => "dup2_x1" / "dup2_x1": Simple,
    0x5e => "dup2_x2" / "dup2_x2": Simple,
    0x5f => "swap" / "swap": Simple,
    0x60 => "iadd" / "iadd": Simple,
    0x61 => "ladd" / "ladd": Simple,
    0x62 => "fadd" / "fadd": Simple,
    0x63 => "dadd" / "dadd": Simple,
    0x64 => "isub" / "isub": Simple,
    0x65 => "lsub" / "lsub": Simple,
    0x66 => "fsub" / "fsub": Simple,
    0x67 => "dsub" / "dsub": Simple,
    0x68 => "imul" / "imul": Simple,
    0x69 => "lmul" / "lmul": Simple,
    0x6a => "fmul" / "fmul": Simple,
    0x6b => "dmul" / "dmul": Simple,
    0x6c => "idiv" / "idiv": Simple,
    0x6d => "ldiv" / "ldiv": Simple,
    0x6e => "fdiv" / "fdiv": Simple,
    0x6f => "ddiv" / "ddiv": Simple,
    0x70 => "irem" / "irem": Simple,
    0x71 => "lrem" / "lrem": Simple,
    0x72 => "frem" / "frem": Simple,
    0x73 => "drem" / "drem": Simple,
    0x74 => "ineg" / "ineg": Simple,
    0x75 => "lneg" / "lneg": Simple,
    0x76 => "fneg" / "fneg": Simple,
    0x77 => "dneg" / "dneg": Simple,
    0x78 => "ishl" / "ishl": Simple,
    0x79 => "lshl" / "lshl": Simple,
    0x7a => "ishr" / "ishr": Simple,
    0x7b => "lshr" / "lshr": Simple,
    0x7c => "iushr" / "iushr": Simple,
    0x7d => "lushr" / "lushr": Simple,
    0x7e => "iand" / "iand": Simple,
    0x7f => "land" / "land": Simple,
    0x80 => "ior" / "ior": Simple,
    0x81 => "lor" / "lor": Simple,
    0x82 => "ixor" / "ixor": Simple,
    0x83 => "lxor" / "lxor": Simple,
    0x84 => "iinc" / "iinc": Iinc,
    0x85 => "i2l" / "i2l": Simple,
    0x86 => "i2f" / "i2f": Simple,
    0x87 => "i2d" / "i2d": Simple,
    0x88 => "l2i" / "l2i": Simple,
    0x89 => "l2f" / "l2f": Simple,
    0x8a => "l2d" / "l2d": Simple,
    0x8b => "f2i" / "f2i": Simple,
    0x8c => "f2l" / "f2l": Simple,
    0x8d => "f2d" / "f2d": Simple,
    0x8e => "d2i" / "d2i": Simple,
    0x8f => "d2l" / "d2l": Simple,
    0x90 => "d2f" / "d2f": Simple,
    0x91 => "i2b" / "i2b": Simple,
    0x92 => "i2c" / "i2c": Simple,
    0x93 => "i2s" / "i2s": Simple,
    0x94 => "lcmp" / "lcmp": Simple,
    0x95 => "fcmpl" / "fcmpl": Simple,
    0x96 => "fcmpg" / "fcmpg": Simple,
    0x97 => "dcmpl" / "dcmpl": Simple,
    0x98 => "dcmpg" / "dcmpg": Simple,
    0x99 => "ifeq" / "ifeq": Jump,
    0x9a => "ifne" / "ifne": Jump,
    0x9b => "iflt" / "iflt": Jump,
    0x9c => "ifge" / "ifge": Jump,
    0x9d => "ifgt" / "ifgt": Jump,
    0x9e => "ifle" / "ifle": Jump,
    0x9f => "if_icmpeq" / "if_icmpeq": Jump,
    0xa0 => "if_icmpne" / "if_icmpne": Jump,
    0xa1 => "if_icmplt" / "if_icmplt": Jump,
    0xa2 => "if_icmpge" / "if_icmpge": Jump,
    0xa3 => "if_icmpgt" / "if_icmpgt": Jump,
    0xa4 => "if_icmple" / "if_icmple": Jump,
    0xa5 => "if_acmpeq" / "if_acmpeq": Jump,
    0xa6 => "if_acmpne" / "if_acmpne": Jump,
    0xa7 => "goto" / "goto": Jump,
    0xa8 => "jsr" / "jsr": Jump,
    0xa9 => "ret" / "ret": Ret,
    0xaa => "tableswitch" / "tableswitch": TableSwitch,
    0xab => "lookupswitch" / "lookupswitch": LookupSwitch,
    0xac => "ireturn" / "ireturn": Simple,
    0xad => "lreturn" / "lreturn": Simple,
    0xae => "freturn" / "freturn": Simple,
    0xaf => "dreturn" / "dreturn": Simple,
    0xb0 => "areturn" / "areturn": Simple,
    0xb1 => "return" / "return": Simple,
    0xb2 => "getstatic" / "getstatic": Field,
    0xb3 => "putstatic" / "putstatic": Field,
    0xb4 => "getfield" / "getfield": Field,
    0xb5 => "putfield" / "putfield": Field,
    0xb6 => "invokevirtual" / "invokevirtual": Method,
    0xb7 => "invokespecial" / "invokespecial": Method,
    0xb8 => "invokestatic" / "invokestatic": Method,
    0xb9 => "invokeinterface" / "invokeinterface": InvokeInterface,
    0xba => "invokedynamic" / "invokedynamic": InvokeDynamic,
    0xbb => "new" / "new": Type,
    0xbc => "newarray" / "newarray": Newarray,
    0xbd => "anewarray" / "anewarray": Type,
    0xbe => "arraylength" / "arraylength": Simple,
    0xbf => "athrow" / "athrow": Simple,
    0xc0 => "checkcast" / "checkcast": Type,
    0xc1 => "instanceof" / "instanceof": Type,
    0xc2 => "monitorenter" / "monitorenter": Simple,
    0xc3 => "monitorexit" / "monitorexit": Simple,
    0xc4 => "wide" / "wide": Wide,
    0xc5 => "multianewarray" / "multianewarray": MultiANewArray,
    0xc6 => "ifnull" / "ifnull": Jump,
    0xc7 => "ifnonnull" / "ifnonnull": Jump,
    0xc8 => "goto_w" / "goto": JumpWide,
    0xc9 => "jsr_w" / "jsr": JumpWide,
}

/// Highest opcode byte that may appear in a class file. `breakpoint` (0xca)
/// and the `impdep` opcodes are reserved for debuggers and JVM internals.
pub const MAX_OPCODE: u8 = 0xc9;

/// Looks up the table entry for an opcode byte.
pub fn lookup(code: u8) -> Option<&'static OpInfo> {
    ENTRIES.get(code as usize).filter(|info| info.code == code)
}

/// All opcode entries in byte order.
pub fn all() -> &'static [OpInfo] {
    ENTRIES
}

/// Distinct logical mnemonics, one representative entry each, in byte order
/// of the first opcode carrying the mnemonic. `wide` is excluded since it
/// never survives decoding.
pub fn logical() -> impl Iterator<Item = &'static OpInfo> {
    ENTRIES.iter().filter(|info| info.family != Family::Wide && info.raw == info.mnemonic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_dense_and_ordered() {
        assert_eq!(ENTRIES.len(), MAX_OPCODE as usize + 1);
        for (i, e) in ENTRIES.iter().enumerate() {
            assert_eq!(e.code as usize, i, "entry {} out of place", e.raw);
        }
    }

    #[test]
    fn reserved_opcodes_are_absent() {
        assert!(lookup(0xca).is_none());
        assert!(lookup(0xfe).is_none());
        assert!(lookup(0xff).is_none());
    }

    #[test]
    fn short_forms_fold_to_long_forms() {
        assert_eq!(lookup(0x1a).unwrap().mnemonic, "iload");
        assert_eq!(lookup(0x13).unwrap().mnemonic, "ldc");
        assert_eq!(lookup(0x14).unwrap().mnemonic, "ldc");
        assert_eq!(lookup(0xc8).unwrap().mnemonic, "goto");
        assert_eq!(lookup(0xc9).unwrap().mnemonic, "jsr");
    }

    #[test]
    fn every_logical_mnemonic_has_a_representative() {
        let logical: std::collections::BTreeSet<_> = logical().map(|e| e.mnemonic).collect();
        let folded: std::collections::BTreeSet<_> =
            ENTRIES.iter().filter(|e| e.family != Family::Wide).map(|e| e.mnemonic).collect();
        assert_eq!(logical, folded);
        // 202 opcodes minus 40 implicit-index forms, ldc_w, ldc2_w, goto_w, jsr_w and wide
        assert_eq!(logical.len(), 157);
    }
}
