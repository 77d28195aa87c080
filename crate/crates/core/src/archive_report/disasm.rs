use crate::classfile::parse_class;
use crate::extractor::{escape, extract_edb, is_instruction_predicate, ExtractionConfig, Fact, FactDatabase, Term};

fn id_number(f: &Fact) -> u64 {
    f.id.strip_prefix('F').and_then(|n| n.parse().ok()).unwrap_or(u64::MAX)
}

/// Facts in extraction order, one per line, IDs and order keys left out.
pub fn listing(edb: &FactDatabase) -> String {
    let mut facts: Vec<&Fact> = edb.iter().collect();
    facts.sort_by_key(|f| id_number(f));
    let mut out = String::new();
    for f in facts {
        let skip = usize::from(edb.schema.get(&f.predicate).is_some_and(|c| is_instruction_predicate(c)));
        out.push_str(&f.predicate);
        for (i, t) in f.terms.iter().enumerate() {
            if skip == 1 && i == 1 {
                continue;
            }
            out.push(' ');
            match t {
                Term::Sym(s) => out.push_str(&escape(s)),
                Term::Num(n) => out.push_str(&n.to_string()),
            }
        }
        out.push('\n');
    }
    out
}

/// Textual disassembly of a class file.
pub fn disassemble(bytes: &[u8]) -> Result<String, String> {
    let model = parse_class(bytes).map_err(|e| e.to_string())?;
    let edb = extract_edb(&model, &ExtractionConfig::default()).map_err(|e| e.to_string())?;
    Ok(listing(&edb))
}
