use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Cat,
    Band,
    Add,
    Sub,
}

impl Builtin {
    pub fn from_name(s: &str) -> Option<Builtin> {
        match s {
            "cat" => Some(Builtin::Cat),
            "band" => Some(Builtin::Band),
            "add" => Some(Builtin::Add),
            "sub" => Some(Builtin::Sub),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Cat => "cat",
            Builtin::Band => "band",
            Builtin::Add => "add",
            Builtin::Sub => "sub",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Sym(String),
    Num(i64),
    Wildcard,
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    /// Collects variable names (wildcards excluded).
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.vars(out)),
            _ => {}
        }
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Expr::Wildcard => true,
            Expr::Call(_, args) => args.iter().any(Expr::has_wildcard),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Expr>,
}

impl Atom {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.vars(&mut out));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp(Expr, CmpOp, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn positive_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Pos(a) => Some(a),
            _ => None,
        })
    }

    pub fn negated_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            Literal::Neg(a) => Some(a),
            _ => None,
        })
    }

    /// Variables bound by positive atoms, extended by assignments
    /// `x = expr` whose right side is already bound.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut bound = BTreeSet::new();
        for a in self.positive_atoms() {
            bound.extend(a.vars());
        }
        loop {
            let mut changed = false;
            for l in &self.body {
                if let Literal::Cmp(lhs, CmpOp::Eq, rhs) = l {
                    for (x, e) in [(lhs, rhs), (rhs, lhs)] {
                        if let Expr::Var(v) = x {
                            let mut ev = BTreeSet::new();
                            e.vars(&mut ev);
                            if !bound.contains(v) && ev.is_subset(&bound) {
                                bound.insert(v.clone());
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return bound;
            }
        }
    }
}

/// Identifier syntax for rule names.
pub fn is_rule_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('A'..='Z')) && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

pub fn quote_sym(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => f.write_str(v),
            Expr::Sym(s) => f.write_str(&quote_sym(s)),
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Wildcard => f.write_str("_"),
            Expr::Call(b, args) => {
                write!(f, "{}(", b.name())?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        write_list(f, &self.args)?;
        f.write_str(")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "!{a}"),
            Literal::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "@name({})", self.name)?;
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :-\n    ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(",\n    ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}
