//! Equivalence by comparing projected IDBs.

mod derivation;
mod patterns;
mod projection;

use std::time::{Duration, Instant};

pub use derivation::{is_fact_id, parse_derivation, DerivationParseError, DerivationTree};
pub use patterns::{classify_diff, Pattern, PatternSet};
pub use projection::{compare_order_keys, is_bookkeeping, project};

use crate::classfile::parse_class;
use crate::extractor::{extract_edb, ExtractionConfig, Fact, FactDatabase};
use crate::rulelang::RuleError;
use crate::rules_library::{Normalizer, NormalizerOptions, SoundnessMode};

/// Name of the projection file for each side.
pub const PROJECTION_FILE: &str = "idb-projected.txt";
pub const DIFF_FILE: &str = "daleq-diff.txt";
pub const TIMING_FILE: &str = "computation-time-in-ms.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Equivalent,
    NotEquivalent,
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Equivalent => "EQUIVALENT",
            Status::NotEquivalent => "NOT_EQUIVALENT",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::A => "a",
            Side::B => "b",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimes {
    pub parse: Duration,
    pub extract: Duration,
    pub normalize: Duration,
    pub project: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.parse + self.extract + self.normalize + self.project
    }
}

/// A derived fact together with its decoded derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub side: Side,
    pub fact: Fact,
    pub tree: DerivationTree,
}

/// Intermediate results for one class.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub edb: FactDatabase,
    pub idb: FactDatabase,
    pub projection: String,
    pub times: StageTimes,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    /// Non-trivial derivations of both sides; only for equivalent pairs.
    pub derivations: Vec<Derivation>,
    /// Unified diff of the projections; only for non-equivalent pairs.
    pub diff: Option<String>,
    pub error: Option<String>,
    pub times: [StageTimes; 2],
    /// Absent when the inputs were bitwise identical or a side failed.
    pub analyses: Option<Box<[Analysis; 2]>>,
}

impl Verdict {
    fn error(message: String) -> Verdict {
        Verdict {
            status: Status::Error,
            derivations: Vec::new(),
            diff: None,
            error: Some(message),
            times: Default::default(),
            analyses: None,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        self.status == Status::Equivalent
    }
}

/// Unified diff with three lines of context.
pub fn unified_diff(a: &str, b: &str) -> String {
    similar::TextDiff::from_lines(a, b)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{PROJECTION_FILE}"), &format!("b/{PROJECTION_FILE}"))
        .to_string()
}

/// Facts whose ID shows a rule beyond a copy rule. Access-flag decodings
/// are left out; every element has them.
pub fn derivations(side: Side, idb: &FactDatabase) -> Vec<Derivation> {
    let mut out = Vec::new();
    for fact in idb.iter() {
        let pred = fact.predicate.as_str();
        if is_bookkeeping(pred) || pred.starts_with("ACC_") {
            continue;
        }
        if let Ok(tree @ DerivationTree::Node(..)) = parse_derivation(&fact.id) {
            out.push(Derivation { side, fact: fact.clone(), tree });
        }
    }
    out
}

/// Reusable checker; the rule program is assembled once.
#[derive(Debug, Clone)]
pub struct Checker {
    normalizer: Normalizer,
    config: ExtractionConfig,
}

impl Checker {
    pub fn new(mode: SoundnessMode, config: ExtractionConfig) -> Result<Checker, RuleError> {
        Self::with_options(&NormalizerOptions { mode, ..Default::default() }, config)
    }

    /// The rules' `$STRIDE` follows the extraction config.
    pub fn with_options(options: &NormalizerOptions, config: ExtractionConfig) -> Result<Checker, RuleError> {
        let options = NormalizerOptions { stride: config.counter_stride, ..options.clone() };
        Ok(Checker { normalizer: Normalizer::new(&options)?, config })
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn config(&self) -> &ExtractionConfig {
        &self.config
    }

    pub fn analyze(&self, bytes: &[u8]) -> Result<Analysis, String> {
        let mut times = StageTimes::default();
        let t = Instant::now();
        let model = parse_class(bytes).map_err(|e| e.to_string())?;
        times.parse = t.elapsed();
        let t = Instant::now();
        let edb = extract_edb(&model, &self.config).map_err(|e| e.to_string())?;
        times.extract = t.elapsed();
        let t = Instant::now();
        let idb = self.normalizer.normalize(&edb).map_err(|e| e.to_string())?;
        times.normalize = t.elapsed();
        let t = Instant::now();
        let projection = project(&idb);
        times.project = t.elapsed();
        Ok(Analysis { edb, idb, projection, times })
    }

    pub fn check(&self, a: &[u8], b: &[u8]) -> Verdict {
        if a == b {
            return Verdict {
                status: Status::Equivalent,
                derivations: Vec::new(),
                diff: None,
                error: None,
                times: Default::default(),
                analyses: None,
            };
        }
        let (ra, rb) = (self.analyze(a), self.analyze(b));
        let (x, y) = match (ra, rb) {
            (Ok(x), Ok(y)) => (x, y),
            (ra, rb) => {
                let mut msgs = Vec::new();
                if let Err(e) = ra {
                    msgs.push(format!("side a: {e}"));
                }
                if let Err(e) = rb {
                    msgs.push(format!("side b: {e}"));
                }
                return Verdict::error(msgs.join("\n"));
            }
        };
        let times = [x.times, y.times];
        let (derivs, diff, status) = if x.projection == y.projection {
            let mut d = derivations(Side::A, &x.idb);
            d.extend(derivations(Side::B, &y.idb));
            (d, None, Status::Equivalent)
        } else {
            (Vec::new(), Some(unified_diff(&x.projection, &y.projection)), Status::NotEquivalent)
        };
        Verdict { status, derivations: derivs, diff, error: None, times, analyses: Some(Box::new([x, y])) }
    }
}

pub fn check_equivalence(a: &[u8], b: &[u8], mode: SoundnessMode, config: &ExtractionConfig) -> Verdict {
    match Checker::new(mode, config.clone()) {
        Ok(c) => c.check(a, b),
        Err(e) => Verdict::error(format!("rules: {e}")),
    }
}
