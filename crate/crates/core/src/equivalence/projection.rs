use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::extractor::{escape, is_instruction_predicate, FactDatabase, Term};
use crate::rulelang::{GUARD_PREFIX, INSTRUCTION_INDEX};

/// Predicates left out of projections.
pub fn is_bookkeeping(predicate: &str) -> bool {
    predicate.starts_with(GUARD_PREFIX) || predicate == INSTRUCTION_INDEX
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Sym(s) => escape(s),
        Term::Num(n) => n.to_string(),
    }
}

/// Compares order keys such as `12` and `12.3` component-wise, numerically
/// where both components are integers.
pub fn compare_order_keys(a: &str, b: &str) -> Ordering {
    let mut xs = a.split('.');
    let mut ys = b.split('.');
    loop {
        match (xs.next(), ys.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let o = match (x.parse::<i64>(), y.parse::<i64>()) {
                    (Ok(p), Ok(q)) => p.cmp(&q),
                    _ => x.cmp(y),
                };
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
    }
}

/// Canonical text of an IDB: IDs dropped everywhere, order keys dropped
/// from instruction facts after sorting by them. Global facts come first,
/// grouped by predicate name with rows sorted; then one instruction stream
/// per method, methods sorted by reference.
pub fn project(idb: &FactDatabase) -> String {
    let mut globals: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    let mut streams: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for (pred, facts) in &idb.facts {
        if is_bookkeeping(pred) {
            continue;
        }
        let instruction = idb.schema.get(pred).is_some_and(|c| is_instruction_predicate(c));
        for f in facts {
            if instruction && f.terms.len() >= 2 {
                let method = term_text(&f.terms[0]);
                let key = f.terms[1].to_string();
                let mut line = format!("{pred}\t{method}");
                for t in &f.terms[2..] {
                    line.push('\t');
                    line.push_str(&term_text(t));
                }
                streams.entry(method).or_default().push((key, line));
            } else {
                let mut line = pred.to_string();
                for t in &f.terms {
                    line.push('\t');
                    line.push_str(&term_text(t));
                }
                globals.entry(pred).or_default().insert(line);
            }
        }
    }
    let mut out = String::new();
    for lines in globals.values() {
        for l in lines {
            out.push_str(l);
            out.push('\n');
        }
    }
    for (_, mut items) in streams {
        items.sort_by(|a, b| compare_order_keys(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
        items.dedup();
        for (_, l) in items {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}
