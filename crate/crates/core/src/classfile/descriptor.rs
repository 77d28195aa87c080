//! Field and method descriptor grammar.

/// Returns the length of the field type at the start of `s`, if well formed.
fn field_type_len(s: &[u8]) -> Option<usize> {
    let mut i = 0;
    while s.get(i) == Some(&b'[') {
        i += 1;
    }
    if i > 255 {
        return None;
    }
    match s.get(i)? {
        b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z' => Some(i + 1),
        b'L' => {
            let end = s[i + 1..].iter().position(|&c| c == b';')?;
            let name = &s[i + 1..i + 1 + end];
            if name.is_empty() || name.iter().any(|&c| matches!(c, b'.' | b'[')) {
                return None;
            }
            Some(i + end + 2)
        }
        _ => None,
    }
}

pub fn is_field_descriptor(d: &str) -> bool {
    field_type_len(d.as_bytes()) == Some(d.len())
}

pub fn is_method_descriptor(d: &str) -> bool {
    let s = d.as_bytes();
    if s.first() != Some(&b'(') {
        return false;
    }
    let mut i = 1;
    while s.get(i) != Some(&b')') {
        match field_type_len(&s[i..]) {
            Some(n) => i += n,
            None => return false,
        }
    }
    i += 1;
    if &s[i..] == b"V" {
        return true;
    }
    field_type_len(&s[i..]) == Some(s.len() - i)
}

/// Return-type part of a method descriptor (`V` for void).
pub fn return_type(method_descriptor: &str) -> &str {
    match method_descriptor.rfind(')') {
        Some(p) => &method_descriptor[p + 1..],
        None => method_descriptor,
    }
}

/// Converts a field type to the form used as a `checkcast` operand:
/// internal name for class types, the descriptor itself for array types.
/// Primitive and void types have no such form.
pub fn as_reference_operand(field_type: &str) -> Option<&str> {
    if field_type.starts_with('[') {
        Some(field_type)
    } else if field_type.starts_with('L') && field_type.ends_with(';') {
        Some(&field_type[1..field_type.len() - 1])
    } else {
        None
    }
}
