//! On-disk fact format: one `<PREDICATE>.facts` TSV file per non-empty
//! predicate plus a `schema.decl` listing all declarations.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::facts::*;

pub const SCHEMA_FILE: &str = "schema.decl";

#[derive(Debug, thiserror::Error)]
pub enum TsvError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    SchemaMismatch { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> TsvError + '_ {
    move |source| TsvError::Io { path: path.to_path_buf(), source }
}

/// Escapes backslash, tab, newline and carriage return.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]. Unknown escapes are kept verbatim.
pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(o) => {
                out.push('\\');
                out.push(o);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn render_schema(schema: &Schema) -> String {
    let mut out = String::new();
    for (name, cols) in schema {
        out.push_str(&render_decl(name, cols));
        out.push('\n');
    }
    out
}

/// Renders one fact as a TSV line without the trailing newline.
pub fn fact_line(fact: &Fact) -> String {
    let mut line = escape(&fact.id);
    for t in &fact.terms {
        line.push('\t');
        match t {
            Term::Sym(s) => line.push_str(&escape(s)),
            Term::Num(n) => line.push_str(&n.to_string()),
        }
    }
    line
}

pub fn serialize_database(db: &FactDatabase, dir: &Path) -> Result<Vec<PathBuf>, TsvError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let schema_path = dir.join(SCHEMA_FILE);
    fs::write(&schema_path, render_schema(&db.schema)).map_err(io_err(&schema_path))?;
    written.push(schema_path);
    for (pred, facts) in &db.facts {
        if facts.is_empty() {
            continue;
        }
        let mut text = String::new();
        for f in facts {
            text.push_str(&fact_line(f));
            text.push('\n');
        }
        let path = dir.join(format!("{pred}.facts"));
        fs::write(&path, text).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Parses `.decl` lines. Blank lines and `//` comments are skipped.
pub fn parse_schema(text: &str, path: &Path) -> Result<Schema, TsvError> {
    let mut schema = Schema::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let bad = |message: String| TsvError::SchemaMismatch { path: path.to_path_buf(), line: i + 1, message };
        let rest = line.strip_prefix(".decl").ok_or_else(|| bad("expected .decl".into()))?.trim();
        let open = rest.find('(').ok_or_else(|| bad("missing '('".into()))?;
        let name = rest[..open].trim();
        let body = rest[open + 1..].strip_suffix(')').ok_or_else(|| bad("missing ')'".into()))?;
        let mut cols = Vec::new();
        for col in body.split(',') {
            let (n, t) = col.split_once(':').ok_or_else(|| bad(format!("bad column '{}'", col.trim())))?;
            let ty = ColumnType::parse(t.trim()).ok_or_else(|| bad(format!("unknown type '{}'", t.trim())))?;
            cols.push(Column::new(n.trim(), ty));
        }
        schema.insert(name.to_string(), cols);
    }
    Ok(schema)
}

/// Reads every declared predicate's `.facts` file from `dir`. Missing files
/// are empty relations.
pub fn parse_database(dir: &Path, schema: &Schema, kind: DatabaseKind) -> Result<FactDatabase, TsvError> {
    let mut db = FactDatabase::new(kind, schema.clone());
    for (pred, cols) in schema {
        let path = dir.join(format!("{pred}.facts"));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
            Err(e) => return Err(TsvError::Io { path, source: e }),
        };
        for (i, line) in text.lines().enumerate() {
            let bad = |message: String| TsvError::SchemaMismatch { path: path.clone(), line: i + 1, message };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != cols.len() {
                return Err(bad(format!("{pred} expects {} columns, found {}", cols.len(), fields.len())));
            }
            let mut terms = Vec::with_capacity(cols.len() - 1);
            for (col, field) in cols.iter().zip(&fields).skip(1) {
                terms.push(match col.ty {
                    ColumnType::Symbol => Term::Sym(unescape(field)),
                    ColumnType::Number => Term::Num(
                        field
                            .parse()
                            .map_err(|_| bad(format!("column {} expects a number, found '{field}'", col.name)))?,
                    ),
                });
            }
            db.push(Fact::new(pred.clone(), unescape(fields[0]), terms));
        }
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        let mut s = Schema::new();
        s.insert(
            "P".into(),
            vec![
                Column::new("id", ColumnType::Symbol),
                Column::new("s", ColumnType::Symbol),
                Column::new("n", ColumnType::Number),
            ],
        );
        s
    }

    #[test]
    fn escape_round_trip() {
        for s in ["plain", "a\tb", "line\nbreak", "back\\slash", "\\t literal", "", "\r"] {
            assert_eq!(unescape(&escape(s)), s);
            assert!(!escape(s).contains('\t'));
        }
    }

    #[test]
    fn empty_database_writes_only_schema() {
        let dir = tempfile::tempdir().unwrap();
        let db = FactDatabase::new(DatabaseKind::Edb, schema());
        let files = serialize_database(&db, dir.path()).unwrap();
        assert_eq!(files, vec![dir.path().join(SCHEMA_FILE)]);
    }

    #[test]
    fn round_trip_with_tabs() {
        let dir = tempfile::tempdir().unwrap();
        let mut db = FactDatabase::new(DatabaseKind::Edb, schema());
        db.push(Fact::new("P", "F1", vec![Term::sym("a\tb"), Term::Num(-3)]));
        db.push(Fact::new("P", "F2", vec![Term::sym(""), Term::Num(7)]));
        serialize_database(&db, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(SCHEMA_FILE)).unwrap();
        let parsed_schema = parse_schema(&text, Path::new(SCHEMA_FILE)).unwrap();
        assert_eq!(parsed_schema, db.schema);
        let back = parse_database(dir.path(), &parsed_schema, DatabaseKind::Edb).unwrap();
        assert_eq!(back, db);
    }

    #[test]
    fn wrong_arity_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("P.facts"), "F1\tx\t1\nF2\tx\n").unwrap();
        match parse_database(dir.path(), &schema(), DatabaseKind::Edb) {
            Err(TsvError::SchemaMismatch { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_number_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("P.facts"), "F1\tx\tone\n").unwrap();
        assert!(matches!(
            parse_database(dir.path(), &schema(), DatabaseKind::Edb),
            Err(TsvError::SchemaMismatch { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_empty_relation() {
        let dir = tempfile::tempdir().unwrap();
        let db = parse_database(dir.path(), &schema(), DatabaseKind::Edb).unwrap();
        assert!(db.is_empty());
    }
}
