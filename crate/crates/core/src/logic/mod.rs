//! Real-valued modal logics over PNTS models: abstract syntax, logic kinds
//! with their constructor restrictions, parsing, evaluation (including
//! fixed points), a deterministic formula enumeration, the semantic kernel,
//! exact formula synthesis, and the modal Riesz axiom checker.
//!
//! The common diamond modality reads `<a>phi` as the upper expectation of
//! `phi` over the distributions accessible under label `a`; states with no
//! `a`-transitions evaluate to 0.

mod axioms;
mod eval;
mod family;
mod kernel;
mod parse;
mod synth;

pub use axioms::{check_modal_riesz_axioms, AxiomCheck, AxiomReport, AxiomViolation, ClaimedType};
pub use eval::{
    diamond_valuation, evaluate, evaluate_exact, evaluate_float, Environment, EvalError,
    Evaluated, FixpointMode,
};
pub use family::{r_family, stern_brocot, unit_family};
pub use kernel::semantic_kernel;
pub use parse::parse_formula;
pub use synth::{synthesize_formula, SynthError};

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::rational::{format_rat, Rat};

/// Formula syntax shared by all the logic kinds. Which constructors are
/// admissible is a property of the [`LogicKind`], enforced at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    /// Constant 1.
    One,
    /// Constant 0 (derived: 1 + (-1)*1).
    Zero,
    /// Scalar multiple `q*phi`.
    Scale(Rat, Box<Formula>),
    /// Pointwise sum.
    Plus(Box<Formula>, Box<Formula>),
    /// Pointwise maximum.
    Join(Box<Formula>, Box<Formula>),
    /// Pointwise minimum (derived from join by negation).
    Meet(Box<Formula>, Box<Formula>),
    /// `<label>phi`; `None` stands for the sole label of the model.
    Diamond(Option<String>, Box<Formula>),
    /// `~phi`, the involution 1 - phi of the unit-interval logics.
    Neg(Box<Formula>),
    /// `phi . psi`, pointwise product.
    Prod(Box<Formula>, Box<Formula>),
    /// `phi (-) q`, truncated subtraction max(0, phi - q).
    MinusConst(Box<Formula>, Rat),
    /// `phi (+) psi`, truncated addition min(1, phi + psi).
    OPlus(Box<Formula>, Box<Formula>),
    /// Atomic proposition `prop(name)`.
    Prop(String),
    Var(String),
    /// Least fixed point `mu v. phi`.
    Mu(String, Box<Formula>),
    /// Greatest fixed point `nu v. phi`.
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn scale(q: Rat, phi: Formula) -> Formula {
        if q.is_one() {
            phi
        } else {
            Formula::Scale(q, Box::new(phi))
        }
    }

    pub fn plus(a: Formula, b: Formula) -> Formula {
        Formula::Plus(Box::new(a), Box::new(b))
    }

    pub fn join(a: Formula, b: Formula) -> Formula {
        Formula::Join(Box::new(a), Box::new(b))
    }

    pub fn meet(a: Formula, b: Formula) -> Formula {
        Formula::Meet(Box::new(a), Box::new(b))
    }

    pub fn diamond(label: impl Into<String>, phi: Formula) -> Formula {
        Formula::Diamond(Some(label.into()), Box::new(phi))
    }

    pub fn neg(phi: Formula) -> Formula {
        Formula::Neg(Box::new(phi))
    }

    pub fn oplus(a: Formula, b: Formula) -> Formula {
        Formula::OPlus(Box::new(a), Box::new(b))
    }

    pub fn prod(a: Formula, b: Formula) -> Formula {
        Formula::Prod(Box::new(a), Box::new(b))
    }

    /// Linear combination `sum of coeff * phi`, dropping zero terms.
    pub fn linear_combination(terms: impl IntoIterator<Item = (Rat, Formula)>) -> Formula {
        let mut acc: Option<Formula> = None;
        for (q, phi) in terms {
            if q.is_zero() {
                continue;
            }
            let term = Formula::scale(q, phi);
            acc = Some(match acc {
                None => term,
                Some(prev) => Formula::plus(prev, term),
            });
        }
        acc.unwrap_or(Formula::Zero)
    }

    /// Clamp to the unit interval: `(phi \/ 0) /\ 1`.
    pub fn clamp_unit(phi: Formula) -> Formula {
        Formula::meet(Formula::join(phi, Formula::Zero), Formula::One)
    }

    pub fn has_fixpoints(&self) -> bool {
        match self {
            Formula::One | Formula::Zero | Formula::Prop(_) | Formula::Var(_) => false,
            Formula::Mu(_, _) | Formula::Nu(_, _) => true,
            Formula::Scale(_, a) | Formula::Diamond(_, a) | Formula::Neg(a) => a.has_fixpoints(),
            Formula::MinusConst(a, _) => a.has_fixpoints(),
            Formula::Plus(a, b)
            | Formula::Join(a, b)
            | Formula::Meet(a, b)
            | Formula::Prod(a, b)
            | Formula::OPlus(a, b) => a.has_fixpoints() || b.has_fixpoints(),
        }
    }

    /// Variables not bound by an enclosing mu/nu.
    pub fn free_variables(&self) -> Vec<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Var(v) => {
                    if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                        out.push(v.clone());
                    }
                }
                Formula::Mu(v, body) | Formula::Nu(v, body) => {
                    bound.push(v.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
                Formula::One | Formula::Zero | Formula::Prop(_) => {}
                Formula::Scale(_, a) | Formula::Diamond(_, a) | Formula::Neg(a) => {
                    walk(a, bound, out)
                }
                Formula::MinusConst(a, _) => walk(a, bound, out),
                Formula::Plus(a, b)
                | Formula::Join(a, b)
                | Formula::Meet(a, b)
                | Formula::Prod(a, b)
                | Formula::OPlus(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Every bound variable must occur under an even number of negations, so
/// that fixpoint bodies are monotone.
pub fn check_positivity(formula: &Formula) -> bool {
    fn walk(f: &Formula, negations: &mut Vec<(String, bool)>) -> bool {
        match f {
            Formula::Var(v) => negations
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .is_none_or(|(_, even)| *even),
            Formula::Neg(a) => {
                for entry in negations.iter_mut() {
                    entry.1 = !entry.1;
                }
                let ok = walk(a, negations);
                for entry in negations.iter_mut() {
                    entry.1 = !entry.1;
                }
                ok
            }
            Formula::Mu(v, body) | Formula::Nu(v, body) => {
                negations.push((v.clone(), true));
                let ok = walk(body, negations);
                negations.pop();
                ok
            }
            Formula::One | Formula::Zero | Formula::Prop(_) => true,
            Formula::Scale(_, a) | Formula::Diamond(_, a) => walk(a, negations),
            Formula::MinusConst(a, _) => walk(a, negations),
            Formula::Plus(a, b)
            | Formula::Join(a, b)
            | Formula::Meet(a, b)
            | Formula::Prod(a, b)
            | Formula::OPlus(a, b) => walk(a, negations) && walk(b, negations),
        }
    }
    walk(formula, &mut Vec::new())
}

/// The connective inventory of a logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicBase {
    /// Riesz-space logic: 1, +, rational scaling, join, diamond.
    R,
    /// Unit-interval base: 1, join, scaling by q in [0,1], negation, diamond.
    Ql,
    /// Ql plus truncated subtraction of constants.
    QlMinus,
    /// Ql plus pointwise product.
    QlProd,
    /// Ql plus truncated addition (the Lukasiewicz connectives).
    Luk,
    /// All unit-interval connectives together.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicKind {
    pub base: LogicBase,
    pub fixpoints: bool,
}

impl LogicKind {
    pub const R: LogicKind = LogicKind { base: LogicBase::R, fixpoints: false };
    pub const QL: LogicKind = LogicKind { base: LogicBase::Ql, fixpoints: false };
    pub const QL_MINUS: LogicKind = LogicKind { base: LogicBase::QlMinus, fixpoints: false };
    pub const QL_PROD: LogicKind = LogicKind { base: LogicBase::QlProd, fixpoints: false };
    pub const LUK: LogicKind = LogicKind { base: LogicBase::Luk, fixpoints: false };
    /// The full unit-interval fixed-point calculus, CLI name `mu`.
    pub const MU: LogicKind = LogicKind { base: LogicBase::Full, fixpoints: true };
    pub const QL_MU: LogicKind = LogicKind { base: LogicBase::Ql, fixpoints: true };
    pub const QL_MINUS_MU: LogicKind = LogicKind { base: LogicBase::QlMinus, fixpoints: true };
    pub const QL_PROD_MU: LogicKind = LogicKind { base: LogicBase::QlProd, fixpoints: true };
    pub const LUK_MU: LogicKind = LogicKind { base: LogicBase::Luk, fixpoints: true };

    pub fn name(self) -> &'static str {
        match (self.base, self.fixpoints) {
            (LogicBase::R, _) => "r",
            (LogicBase::Ql, false) => "ql",
            (LogicBase::QlMinus, false) => "ql-minus",
            (LogicBase::QlProd, false) => "ql-prod",
            (LogicBase::Luk, false) => "luk",
            (LogicBase::Full, _) => "mu",
            (LogicBase::Ql, true) => "ql-mu",
            (LogicBase::QlMinus, true) => "ql-minus-mu",
            (LogicBase::QlProd, true) => "ql-prod-mu",
            (LogicBase::Luk, true) => "luk-mu",
        }
    }

    fn unit_scalars(self) -> bool {
        self.base != LogicBase::R
    }
}

impl std::str::FromStr for LogicKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r" => Ok(LogicKind::R),
            "ql" => Ok(LogicKind::QL),
            "ql-minus" => Ok(LogicKind::QL_MINUS),
            "ql-prod" => Ok(LogicKind::QL_PROD),
            "luk" => Ok(LogicKind::LUK),
            "mu" => Ok(LogicKind::MU),
            other => Err(format!(
                "unknown logic `{other}` (expected r, ql, ql-minus, ql-prod, luk or mu)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("`{construct}` is not part of logic {kind}")]
    IllegalForKind { construct: String, kind: String },
    #[error("scalar {value} outside [0,1] is not allowed in logic {kind}")]
    ScalarOutOfRange { value: String, kind: String },
    #[error("bound variable `{0}` occurs under an odd number of negations")]
    NegativeVariable(String),
}

/// Verify that the formula uses only constructors (and scalar ranges) of
/// the given kind, and that fixpoint bodies are positive.
pub fn check_kind(formula: &Formula, kind: LogicKind) -> Result<(), LogicError> {
    fn illegal(construct: &str, kind: LogicKind) -> LogicError {
        LogicError::IllegalForKind {
            construct: construct.to_string(),
            kind: kind.name().to_string(),
        }
    }
    fn scalar_ok(q: &Rat, kind: LogicKind) -> Result<(), LogicError> {
        if kind.unit_scalars() && (q.is_negative() || q > &Rat::one()) {
            return Err(LogicError::ScalarOutOfRange {
                value: format_rat(q),
                kind: kind.name().to_string(),
            });
        }
        Ok(())
    }
    fn walk(f: &Formula, kind: LogicKind) -> Result<(), LogicError> {
        match f {
            Formula::One | Formula::Zero | Formula::Prop(_) => Ok(()),
            Formula::Scale(q, a) => {
                scalar_ok(q, kind)?;
                walk(a, kind)
            }
            Formula::Plus(a, b) => {
                if kind.base != LogicBase::R {
                    return Err(illegal("+", kind));
                }
                walk(a, kind)?;
                walk(b, kind)
            }
            Formula::Join(a, b) | Formula::Meet(a, b) => {
                walk(a, kind)?;
                walk(b, kind)
            }
            Formula::Diamond(_, a) => walk(a, kind),
            Formula::Neg(a) => {
                if kind.base == LogicBase::R {
                    return Err(illegal("~", kind));
                }
                walk(a, kind)
            }
            Formula::Prod(a, b) => {
                if !matches!(kind.base, LogicBase::QlProd | LogicBase::Full) {
                    return Err(illegal(".", kind));
                }
                walk(a, kind)?;
                walk(b, kind)
            }
            Formula::MinusConst(a, q) => {
                if !matches!(kind.base, LogicBase::QlMinus | LogicBase::Full) {
                    return Err(illegal("(-)", kind));
                }
                scalar_ok(q, kind)?;
                walk(a, kind)
            }
            Formula::OPlus(a, b) => {
                if !matches!(kind.base, LogicBase::Luk | LogicBase::Full) {
                    return Err(illegal("(+)", kind));
                }
                walk(a, kind)?;
                walk(b, kind)
            }
            Formula::Var(_) => {
                if !kind.fixpoints {
                    return Err(illegal("variable", kind));
                }
                Ok(())
            }
            Formula::Mu(v, body) | Formula::Nu(v, body) => {
                if !kind.fixpoints {
                    return Err(illegal("fixpoint", kind));
                }
                if !check_positivity(f) {
                    return Err(LogicError::NegativeVariable(v.clone()));
                }
                walk(body, kind)
            }
        }
    }
    walk(formula, kind)
}

// Pretty-printing with minimal parentheses; `parse_formula` inverts it.
// Precedence levels: mu/nu 0, \/ 1, /\ 2, + (+) (-) 3, . 4, prefix 5.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Mu(_, _) | Formula::Nu(_, _) => 0,
        Formula::Join(_, _) => 1,
        Formula::Meet(_, _) => 2,
        Formula::Plus(_, _) | Formula::OPlus(_, _) | Formula::MinusConst(_, _) => 3,
        Formula::Prod(_, _) => 4,
        Formula::Scale(_, _) | Formula::Neg(_) | Formula::Diamond(_, _) => 5,
        Formula::One | Formula::Zero | Formula::Prop(_) | Formula::Var(_) => 6,
    }
}

fn scalar_text(q: &Rat) -> String {
    if q.is_negative() {
        format!("({})", format_rat(q))
    } else {
        format_rat(q)
    }
}

fn write_prec(phi: &Formula, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(phi);
    if p < min {
        write!(f, "(")?;
        write_prec(phi, 0, f)?;
        return write!(f, ")");
    }
    match phi {
        Formula::One => write!(f, "1"),
        Formula::Zero => write!(f, "0"),
        Formula::Prop(name) => write!(f, "prop({name})"),
        Formula::Var(v) => write!(f, "{v}"),
        Formula::Mu(v, body) => {
            write!(f, "mu {v}. ")?;
            write_prec(body, 0, f)
        }
        Formula::Nu(v, body) => {
            write!(f, "nu {v}. ")?;
            write_prec(body, 0, f)
        }
        Formula::Join(a, b) => {
            write_prec(a, 1, f)?;
            write!(f, " \\/ ")?;
            write_prec(b, 2, f)
        }
        Formula::Meet(a, b) => {
            write_prec(a, 2, f)?;
            write!(f, " /\\ ")?;
            write_prec(b, 3, f)
        }
        Formula::Plus(a, b) => {
            write_prec(a, 3, f)?;
            write!(f, " + ")?;
            write_prec(b, 4, f)
        }
        Formula::OPlus(a, b) => {
            write_prec(a, 3, f)?;
            write!(f, " (+) ")?;
            write_prec(b, 4, f)
        }
        Formula::MinusConst(a, q) => {
            write_prec(a, 3, f)?;
            write!(f, " (-) {}", scalar_text(q))
        }
        Formula::Prod(a, b) => {
            write_prec(a, 4, f)?;
            write!(f, " . ")?;
            write_prec(b, 5, f)
        }
        Formula::Scale(q, a) => {
            write!(f, "{}*", scalar_text(q))?;
            write_prec(a, 5, f)
        }
        Formula::Neg(a) => {
            write!(f, "~")?;
            write_prec(a, 5, f)
        }
        Formula::Diamond(label, a) => {
            match label {
                Some(l) => write!(f, "<{l}>")?,
                None => write!(f, "<>")?,
            }
            write_prec(a, 5, f)
        }
    }
}
