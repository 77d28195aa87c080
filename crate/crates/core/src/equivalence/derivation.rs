use std::fmt;

/// Parsed provenance ID.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DerivationTree {
    Leaf(String),
    Node(String, Vec<DerivationTree>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid derivation at position {position}: {message}")]
pub struct DerivationParseError {
    pub position: usize,
    pub message: String,
}

impl DerivationTree {
    pub fn is_leaf(&self) -> bool {
        matches!(self, DerivationTree::Leaf(_))
    }

    pub fn rule(&self) -> Option<&str> {
        match self {
            DerivationTree::Node(r, _) => Some(r),
            DerivationTree::Leaf(_) => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DerivationTree::Leaf(_) => 1,
            DerivationTree::Node(_, kids) => 1 + kids.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    /// Fact IDs at the leaves, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            DerivationTree::Leaf(id) => vec![id],
            DerivationTree::Node(_, kids) => kids.iter().flat_map(Self::leaves).collect(),
        }
    }

    /// Rule names used, pre-order.
    pub fn rules(&self) -> Vec<&str> {
        match self {
            DerivationTree::Leaf(_) => vec![],
            DerivationTree::Node(r, kids) => {
                let mut out = vec![r.as_str()];
                out.extend(kids.iter().flat_map(Self::rules));
                out
            }
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationTree::Leaf(id) => f.write_str(id),
            DerivationTree::Node(r, kids) => {
                write!(f, "{r}[")?;
                for (i, k) in kids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str("]")
            }
        }
    }
}

pub fn is_fact_id(s: &str) -> bool {
    s.len() > 1 && s.starts_with('F') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

struct P<'a> {
    s: &'a [u8],
    pos: usize,
}

impl P<'_> {
    fn err<T>(&self, message: &str) -> Result<T, DerivationParseError> {
        Err(DerivationParseError { position: self.pos, message: message.to_string() })
    }

    fn derivation(&mut self, depth: usize) -> Result<DerivationTree, DerivationParseError> {
        if depth > 512 {
            return self.err("nesting too deep");
        }
        let start = self.pos;
        match self.s.get(self.pos) {
            Some(b'A'..=b'Z') => {}
            _ => return self.err("expected a fact or rule ID"),
        }
        while matches!(self.s.get(self.pos), Some(c) if c.is_ascii_uppercase() || c.is_ascii_digit() || *c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        if self.s.get(self.pos) != Some(&b'[') {
            if is_fact_id(name) {
                return Ok(DerivationTree::Leaf(name.to_string()));
            }
            return self.err("expected '[' after rule ID, or a fact ID of the form F<digits>");
        }
        self.pos += 1;
        let mut kids = vec![self.derivation(depth + 1)?];
        loop {
            match self.s.get(self.pos) {
                Some(b',') => {
                    self.pos += 1;
                    kids.push(self.derivation(depth + 1)?);
                }
                Some(b']') => {
                    self.pos += 1;
                    return Ok(DerivationTree::Node(name.to_string(), kids));
                }
                _ => return self.err("expected ',' or ']'"),
            }
        }
    }
}

/// Parses `derivation ::= FACTID | RULEID "[" derivation ("," derivation)* "]"`.
pub fn parse_derivation(id: &str) -> Result<DerivationTree, DerivationParseError> {
    let mut p = P { s: id.as_bytes(), pos: 0 };
    let t = p.derivation(0)?;
    if p.pos != id.len() {
        return p.err("trailing input");
    }
    Ok(t)
}
