//! Bottom-up stratified datalog evaluation.
//!
//! Rules are grouped into strata so that every negated predicate is complete
//! before it is consulted. Within a stratum, evaluation is semi-naive: after
//! a first full pass, each round only joins against the tuples that are new
//! since the previous round.

mod eval;
mod strata;

pub use eval::{evaluate, evaluate_with, replay, EngineOptions};
pub use strata::{stratify, Strata};

use crate::extractor::Term;
use crate::rulelang::{Builtin, CmpOp, RuleError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("program is not stratifiable: negation inside the cycle {}", cycle.join(" -> "))]
    UnstratifiableProgram { cycle: Vec<String> },
    #[error("stratum {stratum} did not reach a fixpoint within {cap} rounds")]
    IterationCapExceeded { stratum: usize, cap: usize },
    #[error("rule {rule}: {message}")]
    BuiltinTypeError { rule: String, message: String },
    #[error("rule {rule}: column {column} of {predicate} expects a {expected}")]
    TypeMismatch { rule: String, predicate: String, column: String, expected: &'static str },
    #[error(transparent)]
    InvalidRules(#[from] RuleError),
}

/// Evaluates a builtin. `cat` renders numbers in decimal; `band`, `add`
/// and `sub` need numbers.
pub fn eval_builtin(b: Builtin, args: &[Term]) -> Result<Term, String> {
    match b {
        Builtin::Cat => {
            if args.len() < 2 {
                return Err("cat needs at least two arguments".into());
            }
            let mut s = String::new();
            for a in args {
                match a {
                    Term::Sym(x) => s.push_str(x),
                    Term::Num(n) => s.push_str(&n.to_string()),
                }
            }
            Ok(Term::Sym(s))
        }
        Builtin::Band | Builtin::Add | Builtin::Sub => {
            let (x, y) = match args {
                [Term::Num(x), Term::Num(y)] => (*x, *y),
                [_, _] => return Err(format!("{} applied to a symbol: {:?}", b.name(), args)),
                _ => return Err(format!("{} takes two arguments", b.name())),
            };
            let r = match b {
                Builtin::Band => Some(x & y),
                Builtin::Add => x.checked_add(y),
                _ => x.checked_sub(y),
            };
            r.map(Term::Num).ok_or_else(|| format!("integer overflow in {}", b.name()))
        }
    }
}

/// Evaluates a comparison. Equality works across types; ordering needs two
/// numbers or two symbols.
pub fn compare(op: CmpOp, x: &Term, y: &Term) -> Result<bool, String> {
    use std::cmp::Ordering;
    let ord = match (x, y) {
        (Term::Num(a), Term::Num(b)) => Some(a.cmp(b)),
        (Term::Sym(a), Term::Sym(b)) => Some(a.cmp(b)),
        _ => None,
    };
    match op {
        CmpOp::Eq => Ok(x == y),
        CmpOp::Ne => Ok(x != y),
        _ => {
            let o = ord.ok_or_else(|| format!("cannot order {x} and {y}"))?;
            Ok(match op {
                CmpOp::Lt => o == Ordering::Less,
                CmpOp::Le => o != Ordering::Greater,
                CmpOp::Gt => o == Ordering::Greater,
                _ => o != Ordering::Less,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_builds_ids() {
        let args: Vec<Term> = ["R_X", "[", "F1", "]"].iter().map(|s| Term::sym(*s)).collect();
        assert_eq!(eval_builtin(Builtin::Cat, &args), Ok(Term::sym("R_X[F1]")));
        assert_eq!(eval_builtin(Builtin::Cat, &[Term::Num(5), Term::sym(".2")]), Ok(Term::sym("5.2")));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval_builtin(Builtin::Band, &[Term::Num(0x1010), Term::Num(0x0010)]), Ok(Term::Num(16)));
        assert_eq!(eval_builtin(Builtin::Add, &[Term::Num(5), Term::Num(1)]), Ok(Term::Num(6)));
        assert_eq!(eval_builtin(Builtin::Sub, &[Term::Num(5), Term::Num(1)]), Ok(Term::Num(4)));
        assert!(eval_builtin(Builtin::Band, &[Term::sym("x"), Term::Num(1)]).is_err());
        assert!(eval_builtin(Builtin::Add, &[Term::Num(i64::MAX), Term::Num(1)]).is_err());
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare(CmpOp::Eq, &Term::Num(1), &Term::sym("1")), Ok(false));
        assert_eq!(compare(CmpOp::Lt, &Term::Num(1), &Term::Num(2)), Ok(true));
        assert_eq!(compare(CmpOp::Ge, &Term::sym("b"), &Term::sym("a")), Ok(true));
        assert!(compare(CmpOp::Lt, &Term::Num(1), &Term::sym("a")).is_err());
    }
}
