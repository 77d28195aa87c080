use std::collections::{BTreeMap, BTreeSet};

use super::EngineError;
use crate::rulelang::{Literal, RuleSet};

/// Rules grouped into evaluation strata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strata {
    /// Rule indices per stratum, in evaluation order.
    pub strata: Vec<Vec<usize>>,
    /// Dependency edges `(head, body predicate, negated)`.
    pub edges: BTreeSet<(String, String, bool)>,
    /// Stratum number of every predicate mentioned by the rules.
    pub levels: BTreeMap<String, usize>,
}

/// Strongly connected components (Tarjan), deterministic over sorted input.
fn components(nodes: &[&str], succ: &BTreeMap<&str, Vec<&str>>) -> Vec<Vec<String>> {
    struct St<'a> {
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        on: BTreeSet<&'a str>,
        stack: Vec<&'a str>,
        out: Vec<Vec<String>>,
        next: usize,
    }
    fn visit<'a>(v: &'a str, succ: &BTreeMap<&'a str, Vec<&'a str>>, st: &mut St<'a>) {
        st.index.insert(v, st.next);
        st.low.insert(v, st.next);
        st.next += 1;
        st.stack.push(v);
        st.on.insert(v);
        for &w in succ.get(v).map(Vec::as_slice).unwrap_or(&[]) {
            if !st.index.contains_key(w) {
                visit(w, succ, st);
                let lw = st.low[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(lw);
            } else if st.on.contains(w) {
                let iw = st.index[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on.remove(w);
                comp.push(w.to_string());
                if w == v {
                    break;
                }
            }
            comp.sort();
            st.out.push(comp);
        }
    }
    let mut st = St {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        on: BTreeSet::new(),
        stack: Vec::new(),
        out: Vec::new(),
        next: 0,
    };
    for &n in nodes {
        if !st.index.contains_key(n) {
            visit(n, succ, &mut st);
        }
    }
    st.out
}

pub fn stratify(rules: &RuleSet) -> Result<Strata, EngineError> {
    let mut edges = BTreeSet::new();
    let mut nodes = BTreeSet::new();
    for r in &rules.rules {
        nodes.insert(r.head.predicate.as_str());
        for l in &r.body {
            let (a, neg) = match l {
                Literal::Pos(a) => (a, false),
                Literal::Neg(a) => (a, true),
                Literal::Cmp(..) => continue,
            };
            nodes.insert(a.predicate.as_str());
            edges.insert((r.head.predicate.clone(), a.predicate.clone(), neg));
        }
    }
    let nodes: Vec<&str> = nodes.into_iter().collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (h, b, _) in &edges {
        succ.entry(h.as_str()).or_default().push(b.as_str());
    }
    let comps = components(&nodes, &succ);
    let mut comp_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        for p in c {
            comp_of.insert(nodes[nodes.binary_search(&p.as_str()).unwrap()], i);
        }
    }
    for (h, b, neg) in &edges {
        if *neg && comp_of[h.as_str()] == comp_of[b.as_str()] {
            return Err(EngineError::UnstratifiableProgram { cycle: comps[comp_of[h.as_str()]].clone() });
        }
    }
    // Tarjan emits components in reverse topological order (dependencies
    // first), so one pass assigns levels.
    let mut comp_level = vec![0usize; comps.len()];
    for (i, c) in comps.iter().enumerate() {
        let mut level = 0;
        for p in c {
            for (h, b, neg) in edges.range((p.clone(), String::new(), false)..) {
                if h != p {
                    break;
                }
                let j = comp_of[b.as_str()];
                if j != i {
                    level = level.max(comp_level[j] + *neg as usize);
                }
            }
        }
        comp_level[i] = level;
    }
    let levels: BTreeMap<String, usize> = nodes.iter().map(|n| (n.to_string(), comp_level[comp_of[n]])).collect();
    let max = rules.rules.iter().map(|r| levels[&r.head.predicate]).max();
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); max.map_or(0, |m| m + 1)];
    for (i, r) in rules.rules.iter().enumerate() {
        strata[levels[&r.head.predicate]].push(i);
    }
    for s in &mut strata {
        s.sort_by(|&a, &b| rules.rules[a].head.predicate.cmp(&rules.rules[b].head.predicate).then(a.cmp(&b)));
    }
    strata.retain(|s| !s.is_empty());
    Ok(Strata { strata, edges, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulelang::parse_rule_source;

    #[test]
    fn guard_before_copy() {
        let set = parse_rule_source(
            "@name(R_G) REMOVED_VERSION(fid) :- VERSION(fid, v).\n\
             @name(COPY_VERSION) IDB_VERSION(fid, v) :- VERSION(fid, v), !REMOVED_VERSION(fid).",
        )
        .unwrap();
        let s = stratify(&set).unwrap();
        assert_eq!(s.strata, vec![vec![0], vec![1]]);
    }

    #[test]
    fn positive_program_is_one_stratum() {
        let set =
            parse_rule_source("@name(R_A) P(x) :- E(x).\n@name(R_B) Q(x) :- P(x).\n@name(R_C) P(x) :- Q(x).").unwrap();
        assert_eq!(stratify(&set).unwrap().strata.len(), 1);
    }

    #[test]
    fn negative_self_loop() {
        let set = parse_rule_source("@name(R_A) P(x) :- E(x), !P(x).").unwrap();
        assert_eq!(stratify(&set), Err(EngineError::UnstratifiableProgram { cycle: vec!["P".into()] }));
    }

    #[test]
    fn negative_cycle_through_two() {
        let set = parse_rule_source("@name(R_A) P(x) :- E(x), !Q(x).\n@name(R_B) Q(x) :- P(x).").unwrap();
        assert!(matches!(stratify(&set), Err(EngineError::UnstratifiableProgram { .. })));
    }

    #[test]
    fn empty_program() {
        assert!(stratify(&RuleSet::default()).unwrap().strata.is_empty());
    }
}
