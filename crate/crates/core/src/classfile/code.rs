//! Decoding of `Code` attribute byte arrays into instruction sequences.

use std::collections::{BTreeMap, BTreeSet};

use super::model::{CodeItem, Instruction, InstructionSeq, LabelId, Operand, TryCatchBlock};
use super::opcodes::{self, Family};
use super::pool::ConstantPool;
use super::reader::Cursor;
use super::ClassFileError;

/// One exception-table entry with raw offsets and pool index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawHandler {
    pub start_pc: u16,
    pub end_pc: u16,
    pub handler_pc: u16,
    /// Pool index of the caught class, 0 for catch-all.
    pub catch_type: u16,
}

fn code_err(offset: usize, message: impl Into<String>) -> ClassFileError {
    ClassFileError::MalformedCode { offset, message: message.into() }
}

/// Decodes a code array. Short and wide forms fold into their logical
/// instruction, switch padding is consumed, and a label is synthesized for
/// every branch, switch and exception-table target. Line numbers never reach
/// this point.
pub fn decode_code(
    code: &[u8],
    handlers: &[RawHandler],
    pool: &ConstantPool,
) -> Result<InstructionSeq, ClassFileError> {
    // jump operands carry absolute byte offsets in LabelId until remapped below
    let mut decoded: Vec<(usize, Instruction)> = Vec::new();
    let mut cur = Cursor::new(code);
    while cur.remaining() > 0 {
        let offset = cur.pos();
        let insn = decode_one(&mut cur, offset, pool).map_err(|e| match e {
            ClassFileError::Malformed(m) if m.starts_with("truncated") => {
                code_err(offset, "instruction runs past the end of the code array")
            }
            other => other,
        })?;
        decoded.push((offset, insn));
    }

    let boundaries: BTreeSet<usize> = decoded.iter().map(|(o, _)| *o).collect();
    let mut targets: BTreeSet<usize> = BTreeSet::new();
    for (offset, insn) in &decoded {
        for t in insn.targets() {
            let t = t.0 as usize;
            if !boundaries.contains(&t) {
                return Err(code_err(*offset, format!("branch target {t} is not an instruction boundary")));
            }
            targets.insert(t);
        }
    }
    for h in handlers {
        let (s, e, p) = (h.start_pc as usize, h.end_pc as usize, h.handler_pc as usize);
        if !boundaries.contains(&s) || !boundaries.contains(&p) {
            return Err(code_err(s, "exception handler range does not start on an instruction boundary"));
        }
        if e <= s || !(boundaries.contains(&e) || e == code.len()) {
            return Err(code_err(e, "exception handler range end is invalid"));
        }
        targets.extend([s, e, p]);
    }

    let labels: BTreeMap<usize, LabelId> =
        targets.iter().enumerate().map(|(i, &off)| (off, LabelId(i as u32))).collect();
    let relabel = |l: LabelId| labels[&(l.0 as usize)];

    let mut items = Vec::with_capacity(decoded.len() + labels.len());
    for (offset, mut insn) in decoded {
        if let Some(l) = labels.get(&offset) {
            items.push(CodeItem::Label(*l));
        }
        match &mut insn.operand {
            Operand::Jump(l) => *l = relabel(*l),
            Operand::TableSwitch { default, targets, .. } => {
                *default = relabel(*default);
                targets.iter_mut().for_each(|t| *t = relabel(*t));
            }
            Operand::LookupSwitch { default, pairs } => {
                *default = relabel(*default);
                pairs.iter_mut().for_each(|(_, t)| *t = relabel(*t));
            }
            _ => {}
        }
        items.push(CodeItem::Insn(insn));
    }
    if let Some(l) = labels.get(&code.len()) {
        items.push(CodeItem::Label(*l));
    }

    let try_catch = handlers
        .iter()
        .map(|h| {
            Ok(TryCatchBlock {
                start: labels[&(h.start_pc as usize)],
                end: labels[&(h.end_pc as usize)],
                handler: labels[&(h.handler_pc as usize)],
                catch_type: match h.catch_type {
                    0 => None,
                    i => Some(pool.class_name(i)?.to_string()),
                },
            })
        })
        .collect::<Result<_, ClassFileError>>()?;

    Ok(InstructionSeq { items, try_catch })
}

fn branch(offset: usize, delta: i64, code_offset_limit: usize) -> Result<LabelId, ClassFileError> {
    let target = offset as i64 + delta;
    if target < 0 || target as usize >= code_offset_limit {
        return Err(code_err(offset, format!("branch target {target} outside the code array")));
    }
    Ok(LabelId(target as u32))
}

fn decode_one(cur: &mut Cursor<'_>, offset: usize, pool: &ConstantPool) -> Result<Instruction, ClassFileError> {
    let limit = offset + cur.remaining();
    let byte = cur.u8()?;
    let op = opcodes::lookup(byte)
        .ok_or_else(|| ClassFileError::Unsupported(format!("opcode 0x{byte:02x} at offset {offset}")))?;
    let operand = match op.family {
        Family::Simple => Operand::None,
        Family::Var | Family::Ret => Operand::Var(cur.u8()? as u16),
        Family::VarImplicit(n) => Operand::Var(n as u16),
        Family::Iinc => Operand::Iinc { var: cur.u8()? as u16, delta: cur.i8()? as i16 },
        Family::Bipush => Operand::Int(cur.i8()? as i32),
        Family::Sipush => Operand::Int(cur.i16()? as i32),
        Family::Newarray => {
            let t = cur.u8()?;
            if super::model::array_type_name(t).is_none() {
                return Err(code_err(offset, format!("invalid newarray type {t}")));
            }
            Operand::ArrayType(t)
        }
        Family::Ldc => Operand::Constant(pool.constant(cur.u8()? as u16)?),
        Family::LdcWide => Operand::Constant(pool.constant(cur.u16()?)?),
        Family::Field => {
            let (owner, name, descriptor) = pool.field_ref(cur.u16()?)?;
            Operand::Field { owner, name, descriptor }
        }
        Family::Method => {
            let (owner, name, descriptor, interface) = pool.method_ref(cur.u16()?)?;
            Operand::Method { owner, name, descriptor, interface }
        }
        Family::InvokeInterface => {
            let (owner, name, descriptor, _) = pool.method_ref(cur.u16()?)?;
            let _count = cur.u8()?;
            let _zero = cur.u8()?;
            Operand::Method { owner, name, descriptor, interface: true }
        }
        Family::InvokeDynamic => {
            let (name, descriptor, bootstrap) = pool.invoke_dynamic(cur.u16()?)?;
            let _zero = cur.u16()?;
            Operand::InvokeDynamic { name, descriptor, bootstrap }
        }
        Family::Type => Operand::Type(pool.class_name(cur.u16()?)?.to_string()),
        Family::MultiANewArray => {
            let class = pool.class_name(cur.u16()?)?.to_string();
            Operand::MultiANewArray { class, dimensions: cur.u8()? }
        }
        Family::Jump => Operand::Jump(branch(offset, cur.i16()? as i64, limit)?),
        Family::JumpWide => Operand::Jump(branch(offset, cur.i32()? as i64, limit)?),
        Family::TableSwitch => {
            cur.skip((4 - (offset + 1) % 4) % 4)?;
            let default = branch(offset, cur.i32()? as i64, limit)?;
            let low = cur.i32()?;
            let high = cur.i32()?;
            if high < low {
                return Err(code_err(offset, "tableswitch high < low"));
            }
            let n = (high as i64 - low as i64 + 1) as usize;
            if n > cur.remaining() / 4 {
                return Err(code_err(offset, "tableswitch runs past the end of the code array"));
            }
            let targets = (0..n).map(|_| branch(offset, cur.i32()? as i64, limit)).collect::<Result<_, _>>()?;
            Operand::TableSwitch { low, high, default, targets }
        }
        Family::LookupSwitch => {
            cur.skip((4 - (offset + 1) % 4) % 4)?;
            let default = branch(offset, cur.i32()? as i64, limit)?;
            let npairs = cur.i32()?;
            if npairs < 0 || npairs as usize > cur.remaining() / 8 {
                return Err(code_err(offset, "lookupswitch pair count invalid"));
            }
            let pairs = (0..npairs)
                .map(|_| Ok((cur.i32()?, branch(offset, cur.i32()? as i64, limit)?)))
                .collect::<Result<_, ClassFileError>>()?;
            Operand::LookupSwitch { default, pairs }
        }
        Family::Wide => {
            let inner = cur.u8()?;
            let inner_op = opcodes::lookup(inner)
                .ok_or_else(|| code_err(offset, format!("invalid opcode 0x{inner:02x} after wide")))?;
            let operand = match inner_op.family {
                Family::Var | Family::Ret => Operand::Var(cur.u16()?),
                Family::Iinc => Operand::Iinc { var: cur.u16()?, delta: cur.i16()? },
                _ => return Err(code_err(offset, format!("{} cannot be widened", inner_op.raw))),
            };
            return Ok(Instruction { op: inner_op, operand });
        }
    };
    Ok(Instruction { op, operand })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(code: &[u8]) -> Result<InstructionSeq, ClassFileError> {
        decode_code(code, &[], &ConstantPool::empty())
    }

    fn render(seq: &InstructionSeq) -> Vec<String> {
        seq.items
            .iter()
            .map(|i| match i {
                CodeItem::Label(l) => format!("label {l}"),
                CodeItem::Insn(insn) => match &insn.operand {
                    Operand::None => insn.mnemonic().to_string(),
                    Operand::Var(v) => format!("{} var={v}", insn.mnemonic()),
                    Operand::Jump(l) => format!("{} {l}", insn.mnemonic()),
                    other => format!("{} {other:?}", insn.mnemonic()),
                },
            })
            .collect()
    }

    #[test]
    fn iload_ireturn() {
        let seq = decode(&[0x1a, 0xac]).unwrap();
        assert_eq!(render(&seq), ["iload var=0", "ireturn"]);
    }

    #[test]
    fn empty_code() {
        assert!(decode(&[]).unwrap().is_empty());
    }

    #[test]
    fn goto_self() {
        let seq = decode(&[0xa7, 0x00, 0x00]).unwrap();
        assert_eq!(render(&seq), ["label L0", "goto L0"]);
    }

    #[test]
    fn wide_forms_fold() {
        // wide iload 300; wide iinc 300 -2; goto_w -10 (back to start)
        let code = [0xc4, 0x15, 0x01, 0x2c, 0xc4, 0x84, 0x01, 0x2c, 0xff, 0xfe, 0xc8, 0xff, 0xff, 0xff, 0xf6];
        let seq = decode(&code).unwrap();
        let insns: Vec<_> = seq.instructions().collect();
        assert_eq!(insns[0].mnemonic(), "iload");
        assert_eq!(insns[0].operand, Operand::Var(300));
        assert_eq!(insns[1].operand, Operand::Iinc { var: 300, delta: -2 });
        assert_eq!(insns[2].mnemonic(), "goto");
        assert_eq!(render(&seq)[0], "label L0");
    }

    #[test]
    fn tableswitch_padding() {
        // offset 0: iconst_0; offset 1: tableswitch, pad 2 bytes to offset 4
        let mut code = vec![0x03, 0xaa, 0, 0];
        code.extend_from_slice(&19i32.to_be_bytes()); // default -> 20
        code.extend_from_slice(&0i32.to_be_bytes());
        code.extend_from_slice(&0i32.to_be_bytes());
        code.extend_from_slice(&19i32.to_be_bytes()); // case 0 -> 20
        code.push(0xb1); // offset 20: return
        let seq = decode(&code).unwrap();
        assert_eq!(seq.instructions().count(), 3);
        assert_eq!(render(&seq)[2], "label L0");
    }

    #[test]
    fn lookupswitch_padding() {
        // offset 0..2: nops; offset 3: lookupswitch, no padding
        let mut code = vec![0x00, 0x00, 0x00, 0xab];
        code.extend_from_slice(&17i32.to_be_bytes()); // default -> 20
        code.extend_from_slice(&1i32.to_be_bytes());
        code.extend_from_slice(&7i32.to_be_bytes());
        code.extend_from_slice(&17i32.to_be_bytes());
        code.push(0xb1);
        let seq = decode(&code).unwrap();
        let insns: Vec<_> = seq.instructions().collect();
        match &insns[3].operand {
            Operand::LookupSwitch { pairs, .. } => assert_eq!(pairs[0].0, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_operand() {
        assert!(matches!(decode(&[0x10]), Err(ClassFileError::MalformedCode { .. })));
        assert!(matches!(decode(&[0xa7, 0x00]), Err(ClassFileError::MalformedCode { .. })));
    }

    #[test]
    fn branch_into_operand() {
        // goto +1 lands inside its own operand bytes
        let err = decode(&[0xa7, 0x00, 0x01]).unwrap_err();
        assert!(matches!(err, ClassFileError::MalformedCode { .. }), "{err}");
    }

    #[test]
    fn reserved_opcode_is_unsupported() {
        assert!(matches!(decode(&[0xca]), Err(ClassFileError::Unsupported(_))));
        assert!(matches!(decode(&[0xfe]), Err(ClassFileError::Unsupported(_))));
    }

    #[test]
    fn every_opcode_byte_decodes_or_errors() {
        let pool = ConstantPool::empty();
        for b in 0u8..=255 {
            let mut code = vec![b];
            code.extend_from_slice(&[0; 16]);
            // any outcome but a panic is acceptable; reserved bytes must be Unsupported
            let r = decode_code(&code, &[], &pool);
            if b > opcodes::MAX_OPCODE {
                assert!(matches!(r, Err(ClassFileError::Unsupported(_))), "0x{b:02x}");
            }
        }
    }

    #[test]
    fn exception_handlers_get_labels() {
        // 0: nop, 1: nop, 2: athrow(handler)
        let handlers = [RawHandler { start_pc: 0, end_pc: 2, handler_pc: 2, catch_type: 0 }];
        let seq = decode_code(&[0x00, 0x00, 0xbf], &handlers, &ConstantPool::empty()).unwrap();
        assert_eq!(seq.try_catch.len(), 1);
        let tc = &seq.try_catch[0];
        assert_eq!(tc.end, tc.handler);
        assert!(tc.catch_type.is_none());
        let labels = seq.items.iter().filter(|i| matches!(i, CodeItem::Label(_))).count();
        assert_eq!(labels, 2);
    }
}
