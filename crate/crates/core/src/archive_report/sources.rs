/// Outcome of comparing two source files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceComparison {
    Equal,
    /// Same tokens once comments and whitespace are ignored.
    Equivalent,
    /// Unified diff of the two texts.
    Different(String),
}

/// Splits Java-like source into tokens, dropping comments and whitespace.
/// Unterminated literals and comments run to the end of input; bytes that
/// are not valid UTF-8 become one opaque token each.
pub fn tokenize(src: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut i = 0;
    let n = src.len();
    let ident = |c: u8| c.is_ascii_alphanumeric() || c == b'_' || c == b'$' || c >= 0x80;
    while i < n {
        let c = src[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with(b"//") {
            while i < n && src[i] != b'\n' {
                i += 1;
            }
        } else if src[i..].starts_with(b"/*") {
            i += 2;
            while i < n && !src[i..].starts_with(b"*/") {
                i += 1;
            }
            i = (i + 2).min(n);
        } else if c == b'"' || c == b'\'' {
            let start = i;
            i += 1;
            while i < n && src[i] != c {
                if src[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(n);
            out.push(src[start..i].to_vec());
        } else if ident(c) {
            let start = i;
            while i < n && (ident(src[i]) || (src[i] == b'.' && src[start].is_ascii_digit())) {
                i += 1;
            }
            out.push(src[start..i].to_vec());
        } else {
            out.push(vec![c]);
            i += 1;
        }
    }
    out
}

pub fn compare_sources(a: &[u8], b: &[u8]) -> SourceComparison {
    if a == b {
        return SourceComparison::Equal;
    }
    if tokenize(a) == tokenize(b) {
        return SourceComparison::Equivalent;
    }
    let (x, y) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
    SourceComparison::Different(
        similar::TextDiff::from_lines(x.as_ref(), y.as_ref())
            .unified_diff()
            .context_radius(3)
            .header("a", "b")
            .to_string(),
    )
}
