use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Recurring causes of non-equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Checkcast,
    Constant,
    Sbinit,
    Signtr,
    Synmet,
    Synfld,
    Anno,
    Access,
}

impl Pattern {
    pub const ALL: [Pattern; 8] = [
        Pattern::Checkcast,
        Pattern::Constant,
        Pattern::Sbinit,
        Pattern::Signtr,
        Pattern::Synmet,
        Pattern::Synfld,
        Pattern::Anno,
        Pattern::Access,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Checkcast => "CHECKCAST",
            Pattern::Constant => "CONSTANT",
            Pattern::Sbinit => "SBINIT",
            Pattern::Signtr => "SIGNTR",
            Pattern::Synmet => "SYNMET",
            Pattern::Synfld => "SYNFLD",
            Pattern::Anno => "ANNO",
            Pattern::Access => "ACCESS",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PatternSet {
    pub patterns: BTreeSet<Pattern>,
}

impl PatternSet {
    pub fn contains(&self, p: Pattern) -> bool {
        self.patterns.contains(&p)
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn multiple(&self) -> bool {
        self.patterns.len() > 1
    }
}

impl fmt::Display for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<&str> = self.patterns.iter().map(|p| p.name()).collect();
        if self.multiple() {
            names.push("MULTIPLE");
        }
        f.write_str(&names.join(","))
    }
}

#[derive(Default)]
struct Sides<'a> {
    added: Vec<Vec<&'a str>>,
    removed: Vec<Vec<&'a str>>,
}

impl<'a> Sides<'a> {
    fn set<T: Ord>(rows: &[Vec<&'a str>], f: impl Fn(&[&'a str]) -> Option<T>) -> BTreeSet<T> {
        rows.iter().filter_map(|r| f(r)).collect()
    }

    fn differ<T: Ord>(&self, f: impl Fn(&[&'a str]) -> Option<T> + Copy) -> bool {
        Self::set(&self.added, f) != Self::set(&self.removed, f)
    }

    fn present(&self) -> bool {
        !self.added.is_empty() || !self.removed.is_empty()
    }
}

fn changed_lines(diff: &str) -> BTreeMap<&str, Sides<'_>> {
    let mut by_pred: BTreeMap<&str, Sides> = BTreeMap::new();
    for line in diff.lines() {
        if line.starts_with("+++") || line.starts_with("---") {
            continue;
        }
        let (added, body) = match line.as_bytes().first() {
            Some(b'+') => (true, &line[1..]),
            Some(b'-') => (false, &line[1..]),
            _ => continue,
        };
        let fields: Vec<&str> = body.split('\t').collect();
        let sides = by_pred.entry(fields[0]).or_default();
        let row = fields[1..].to_vec();
        if added {
            sides.added.push(row);
        } else {
            sides.removed.push(row);
        }
    }
    by_pred
}

/// Classifies a unified diff of two projections by scanning its added and
/// removed lines.
pub fn classify_diff(diff: &str) -> PatternSet {
    let lines = changed_lines(diff);
    let empty = Sides::default();
    let get = |p: &str| lines.get(p).unwrap_or(&empty);
    let mut out = BTreeSet::new();

    let ldc = get("IDB_LDC");
    if ldc.differ(|r| r.last().copied()) {
        out.insert(Pattern::Constant);
    }

    let cc = get("IDB_CHECKCAST");
    if cc.present() && cc.differ(|r| Some(r.get(1..).unwrap_or(&[]).to_vec())) {
        out.insert(Pattern::Checkcast);
    }

    let sb = get("IDB_INVOKESPECIAL");
    let sb_desc = |r: &[&str]| match r {
        [_, "java/lang/StringBuilder", "<init>", d, ..] => Some(d.to_string()),
        _ => None,
    };
    let plus = Sides::set(&sb.added, sb_desc);
    let minus = Sides::set(&sb.removed, sb_desc);
    let has = |s: &BTreeSet<String>, d: &str| s.contains(d);
    if (has(&plus, "()V") && has(&minus, "(I)V")) || (has(&plus, "(I)V") && has(&minus, "()V")) {
        out.insert(Pattern::Sbinit);
    }

    let sig = get("IDB_SIGNATURE");
    let elem = |r: &[&str]| r.first().map(|s| s.to_string());
    let plus = Sides::set(&sig.added, elem);
    let minus = Sides::set(&sig.removed, elem);
    if plus.symmetric_difference(&minus).next().is_some() {
        out.insert(Pattern::Signtr);
    }

    let syn = get("ACC_SYNTHETIC");
    if syn.differ(|r| r.first().filter(|e| e.contains('(')).copied()) {
        out.insert(Pattern::Synmet);
    }
    if syn.differ(|r| r.first().filter(|e| !e.contains('(') && e.contains(':')).copied()) {
        out.insert(Pattern::Synfld);
    }

    if get("IDB_ANNOTATION").differ(|r| Some(r.to_vec())) {
        out.insert(Pattern::Anno);
    }

    let acc = get("IDB_ACCESS");
    let flags = |rows: &[Vec<&str>]| -> BTreeMap<String, BTreeSet<String>> {
        let mut m: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in rows {
            if let [e, rest @ ..] = r.as_slice() {
                m.entry(e.to_string()).or_default().insert(rest.join("\t"));
            }
        }
        m
    };
    let plus = flags(&acc.added);
    let minus = flags(&acc.removed);
    if plus.iter().any(|(e, f)| minus.get(e).is_some_and(|g| g != f)) {
        out.insert(Pattern::Access);
    }

    PatternSet { patterns: out }
}
