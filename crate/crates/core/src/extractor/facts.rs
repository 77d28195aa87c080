use std::collections::BTreeMap;
use std::fmt;

/// A scalar fact term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Sym(String),
    Num(i64),
}

impl Term {
    pub fn sym(s: impl Into<String>) -> Term {
        Term::Sym(s.into())
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Term::Sym(s) => Some(s),
            Term::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<i64> {
        match self {
            Term::Num(n) => Some(*n),
            Term::Sym(_) => None,
        }
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            Term::Sym(_) => ColumnType::Symbol,
            Term::Num(_) => ColumnType::Number,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(s) => f.write_str(s),
            Term::Num(n) => write!(f, "{n}"),
        }
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Term {
        Term::Sym(s.to_string())
    }
}

impl From<String> for Term {
    fn from(s: String) -> Term {
        Term::Sym(s)
    }
}

impl From<i64> for Term {
    fn from(n: i64) -> Term {
        Term::Num(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Symbol,
    Number,
}

impl ColumnType {
    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Symbol => "symbol",
            ColumnType::Number => "number",
        }
    }

    pub fn parse(s: &str) -> Option<ColumnType> {
        match s {
            "symbol" => Some(ColumnType::Symbol),
            "number" => Some(ColumnType::Number),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

impl Column {
    pub fn new(name: &str, ty: ColumnType) -> Column {
        Column { name: name.to_string(), ty }
    }
}

/// Predicate declarations: name to ordered columns. The first column of
/// every predicate is the fact ID.
pub type Schema = BTreeMap<String, Vec<Column>>;

/// Renders one declaration as `.decl NAME(col:type, ...)`.
pub fn render_decl(name: &str, columns: &[Column]) -> String {
    let cols: Vec<String> = columns.iter().map(|c| format!("{}:{}", c.name, c.ty.name())).collect();
    format!(".decl {}({})", name, cols.join(", "))
}

/// True for predicates laid out as `(id, method:symbol, counter, ...)`.
pub fn is_instruction_predicate(columns: &[Column]) -> bool {
    columns.len() >= 3
        && columns[1].name == "method"
        && columns[1].ty == ColumnType::Symbol
        && columns[2].name == "counter"
}

/// One relational tuple. `terms` excludes the ID.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fact {
    pub predicate: String,
    pub id: String,
    pub terms: Vec<Term>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, id: impl Into<String>, terms: Vec<Term>) -> Fact {
        Fact { predicate: predicate.into(), id: id.into(), terms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatabaseKind {
    Edb,
    Idb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactDatabase {
    pub kind: DatabaseKind,
    pub schema: Schema,
    pub facts: BTreeMap<String, Vec<Fact>>,
}

impl FactDatabase {
    pub fn new(kind: DatabaseKind, schema: Schema) -> FactDatabase {
        FactDatabase { kind, schema, facts: BTreeMap::new() }
    }

    /// Appends a fact. Panics if the predicate is undeclared or the arity is
    /// wrong, which indicates a bug in the caller.
    pub fn push(&mut self, fact: Fact) {
        let cols =
            self.schema.get(&fact.predicate).unwrap_or_else(|| panic!("undeclared predicate {}", fact.predicate));
        assert_eq!(cols.len(), fact.terms.len() + 1, "arity of {}", fact.predicate);
        self.facts.entry(fact.predicate.clone()).or_default().push(fact);
    }

    pub fn get(&self, predicate: &str) -> &[Fact] {
        self.facts.get(predicate).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.facts.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
