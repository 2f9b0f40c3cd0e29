//! Formula evaluation over a model: exact rational semantics, and a float
//! mode for fixed points that converge only in the limit.
//!
//! Fixed points are computed by Knaster-Tarski iteration on the unit
//! lattice, from the all-zero valuation for `mu` and the all-one valuation
//! for `nu`. Exact mode stops when an iterate repeats exactly; float mode
//! stops when successive iterates are within `eps` in sup norm. Either way
//! a cap bounds the iteration count and non-stabilization is reported with
//! the residual reached.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::Pnts;
use crate::rational::{rat_to_f64, Rat};

use super::Formula;

/// Variable interpretation: each variable is a `[0,1]`-valued valuation.
pub type Environment = BTreeMap<String, Vec<Rat>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixpointMode {
    /// Iterate exactly; succeeds when the chain stabilizes in finitely many
    /// steps.
    Exact { max_iters: usize },
    /// Iterate in doubles until the sup-norm residual drops below `eps`.
    Float { eps: f64, max_iters: usize },
}

impl Default for FixpointMode {
    fn default() -> Self {
        FixpointMode::Float {
            eps: 1e-9,
            max_iters: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluated {
    Exact(Vec<Rat>),
    Float(Vec<f64>),
}

impl Evaluated {
    pub fn len(&self) -> usize {
        match self {
            Evaluated::Exact(v) => v.len(),
            Evaluated::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_floats(&self) -> Vec<f64> {
        match self {
            Evaluated::Exact(v) => v.iter().map(rat_to_f64).collect(),
            Evaluated::Float(v) => v.clone(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("`<>` needs a model with exactly one label, this one has {0}")]
    AmbiguousDiamond(usize),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("`{construct}` applied to values outside [0,1]")]
    RangeViolation { construct: &'static str },
    #[error("environment valuation for `{name}` has {got} entries, expected {expected}")]
    BadEnvironment {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("fixpoint did not stabilize within {iterations} iterations (residual {residual:e})")]
    NonStabilizing { iterations: usize, residual: f64 },
}

/// Scalar abstraction so the one evaluator body serves both exact and
/// float semantics.
trait Num: Clone + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn abs_f64(&self) -> f64;
}

impl Num for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn abs_f64(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Num for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
}

fn vmax<T: Num>(a: T, b: &T) -> T {
    if *b > a {
        b.clone()
    } else {
        a
    }
}

fn vmin<T: Num>(a: T, b: &T) -> T {
    if *b < a {
        b.clone()
    } else {
        a
    }
}

fn in_unit<T: Num>(values: &[T]) -> bool {
    values
        .iter()
        .all(|v| *v >= T::zero() && *v <= T::one())
}

/// Convergence policy for fixpoint chains: `eps == None` demands exact
/// repetition.
#[derive(Clone, Copy)]
struct Policy {
    max_iters: usize,
    eps: Option<f64>,
}

/// Model data pre-converted to the scalar type.
struct Ctx<'m, T> {
    model: &'m Pnts,
    /// generators[state][label][gen] as dense vectors
    generators: Vec<Vec<Vec<Vec<T>>>>,
    props: BTreeMap<&'m str, Vec<T>>,
    policy: Policy,
}

impl<'m, T: Num> Ctx<'m, T> {
    fn new(model: &'m Pnts, policy: Policy) -> Self {
        let generators = (0..model.state_count())
            .map(|s| {
                (0..model.label_count())
                    .map(|l| {
                        model
                            .successors(s, l)
                            .iter()
                            .map(|d| d.probs().iter().map(T::from_rat).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let props = model
            .props()
            .iter()
            .map(|(name, v)| (name.as_str(), v.iter().map(T::from_rat).collect()))
            .collect();
        Ctx {
            model,
            generators,
            props,
            policy,
        }
    }

    fn resolve_label(&self, label: &Option<String>) -> Result<usize, EvalError> {
        match label {
            Some(name) => self
                .model
                .label_index(name)
                .map_err(|_| EvalError::UnknownLabel(name.clone())),
            None => {
                if self.model.label_count() == 1 {
                    Ok(0)
                } else {
                    Err(EvalError::AmbiguousDiamond(self.model.label_count()))
                }
            }
        }
    }

    fn diamond(&self, label: usize, f: &[T]) -> Vec<T> {
        (0..self.model.state_count())
            .map(|s| {
                let mut best: Option<T> = None;
                for gen in &self.generators[s][label] {
                    let mut acc = T::zero();
                    for (p, v) in gen.iter().zip(f) {
                        acc = acc.add(&p.mul(v));
                    }
                    best = Some(match best {
                        None => acc,
                        Some(b) => vmax(b, &acc),
                    });
                }
                best.unwrap_or_else(T::zero)
            })
            .collect()
    }
}

fn eval<T: Num>(
    ctx: &Ctx<'_, T>,
    formula: &Formula,
    scope: &mut Vec<(String, Vec<T>)>,
) -> Result<Vec<T>, EvalError> {
    let n = ctx.model.state_count();
    match formula {
        Formula::One => Ok(vec![T::one(); n]),
        Formula::Zero => Ok(vec![T::zero(); n]),
        Formula::Prop(name) => ctx
            .props
            .get(name.as_str())
            .cloned()
            .ok_or_else(|| EvalError::UnknownProp(name.clone())),
        Formula::Var(v) => scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, val)| val.clone())
            .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Formula::Scale(q, a) => {
            let inner = eval(ctx, a, scope)?;
            let q = T::from_rat(q);
            Ok(inner.iter().map(|v| q.mul(v)).collect())
        }
        Formula::Plus(a, b) => {
            let va = eval(ctx, a, scope)?;
            let vb = eval(ctx, b, scope)?;
            Ok(va.iter().zip(&vb).map(|(x, y)| x.add(y)).collect())
        }
        Formula::Join(a, b) => {
            let va = eval(ctx, a, scope)?;
            let vb = eval(ctx, b, scope)?;
            Ok(va.into_iter().zip(&vb).map(|(x, y)| vmax(x, y)).collect())
        }
        Formula::Meet(a, b) => {
            let va = eval(ctx, a, scope)?;
            let vb = eval(ctx, b, scope)?;
            Ok(va.into_iter().zip(&vb).map(|(x, y)| vmin(x, y)).collect())
        }
        Formula::Diamond(label, a) => {
            let inner = eval(ctx, a, scope)?;
            let l = ctx.resolve_label(label)?;
            Ok(ctx.diamond(l, &inner))
        }
        Formula::Neg(a) => {
            let inner = eval(ctx, a, scope)?;
            if !in_unit(&inner) {
                return Err(EvalError::RangeViolation { construct: "~" });
            }
            Ok(inner.iter().map(|v| T::one().sub(v)).collect())
        }
        Formula::Prod(a, b) => {
            let va = eval(ctx, a, scope)?;
            let vb = eval(ctx, b, scope)?;
            if !in_unit(&va) || !in_unit(&vb) {
                return Err(EvalError::RangeViolation { construct: "." });
            }
            Ok(va.iter().zip(&vb).map(|(x, y)| x.mul(y)).collect())
        }
        Formula::MinusConst(a, q) => {
            let va = eval(ctx, a, scope)?;
            let q = T::from_rat(q);
            if !in_unit(&va) || q < T::zero() || q > T::one() {
                return Err(EvalError::RangeViolation { construct: "(-)" });
            }
            Ok(va
                .iter()
                .map(|v| vmax(v.sub(&q), &T::zero()))
                .collect())
        }
        Formula::OPlus(a, b) => {
            let va = eval(ctx, a, scope)?;
            let vb = eval(ctx, b, scope)?;
            if !in_unit(&va) || !in_unit(&vb) {
                return Err(EvalError::RangeViolation { construct: "(+)" });
            }
            Ok(va
                .iter()
                .zip(&vb)
                .map(|(x, y)| vmin(x.add(y), &T::one()))
                .collect())
        }
        Formula::Mu(v, body) => fixpoint(ctx, v, body, scope, vec![T::zero(); n]),
        Formula::Nu(v, body) => fixpoint(ctx, v, body, scope, vec![T::one(); n]),
    }
}

fn fixpoint<T: Num>(
    ctx: &Ctx<'_, T>,
    var: &str,
    body: &Formula,
    scope: &mut Vec<(String, Vec<T>)>,
    start: Vec<T>,
) -> Result<Vec<T>, EvalError> {
    let mut current = start;
    let mut residual = f64::INFINITY;
    for iteration in 0..ctx.policy.max_iters {
        scope.push((var.to_string(), current.clone()));
        let next = eval(ctx, body, scope);
        scope.pop();
        let next = next?;
        if !in_unit(&next) {
            return Err(EvalError::RangeViolation {
                construct: "fixpoint",
            });
        }
        residual = current
            .iter()
            .zip(&next)
            .map(|(a, b)| a.sub(b).abs_f64())
            .fold(0.0, f64::max);
        let converged = match ctx.policy.eps {
            None => current == next,
            Some(eps) => residual < eps,
        };
        if converged {
            return Ok(next);
        }
        let _ = iteration;
        current = next;
    }
    Err(EvalError::NonStabilizing {
        iterations: ctx.policy.max_iters,
        residual,
    })
}

fn check_env(model: &Pnts, env: &Environment) -> Result<(), EvalError> {
    for (name, values) in env {
        if values.len() != model.state_count() {
            return Err(EvalError::BadEnvironment {
                name: name.clone(),
                got: values.len(),
                expected: model.state_count(),
            });
        }
        if !values
            .iter()
            .all(|v| !v.is_negative() && v <= &Rat::one())
        {
            return Err(EvalError::RangeViolation {
                construct: "environment",
            });
        }
    }
    Ok(())
}

/// Exact evaluation; fixpoints must stabilize in finitely many iterations.
pub fn evaluate_exact(
    model: &Pnts,
    formula: &Formula,
    env: &Environment,
    max_iters: usize,
) -> Result<Vec<Rat>, EvalError> {
    check_env(model, env)?;
    let ctx = Ctx::<Rat>::new(
        model,
        Policy {
            max_iters,
            eps: None,
        },
    );
    let mut scope: Vec<(String, Vec<Rat>)> =
        env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    eval(&ctx, formula, &mut scope)
}

/// Double-precision evaluation with sup-norm convergence for fixpoints.
pub fn evaluate_float(
    model: &Pnts,
    formula: &Formula,
    env: &Environment,
    eps: f64,
    max_iters: usize,
) -> Result<Vec<f64>, EvalError> {
    check_env(model, env)?;
    let ctx = Ctx::<f64>::new(
        model,
        Policy {
            max_iters,
            eps: Some(eps),
        },
    );
    let mut scope: Vec<(String, Vec<f64>)> = env
        .iter()
        .map(|(k, v)| (k.clone(), v.iter().map(rat_to_f64).collect()))
        .collect();
    eval(&ctx, formula, &mut scope)
}

/// Evaluate with the semantics the formula affords: fixpoint-free formulas
/// are always exact; formulas with fixpoints follow the requested mode.
pub fn evaluate(
    model: &Pnts,
    formula: &Formula,
    env: &Environment,
    mode: FixpointMode,
) -> Result<Evaluated, EvalError> {
    if !formula.has_fixpoints() {
        return evaluate_exact(model, formula, env, 1).map(Evaluated::Exact);
    }
    match mode {
        FixpointMode::Exact { max_iters } => {
            evaluate_exact(model, formula, env, max_iters).map(Evaluated::Exact)
        }
        FixpointMode::Float { eps, max_iters } => {
            evaluate_float(model, formula, env, eps, max_iters).map(Evaluated::Float)
        }
    }
}

/// The diamond function transformer on exact valuations: at each state, the
/// upper expectation of `f` over the distributions accessible under `label`.
pub fn diamond_valuation(model: &Pnts, label: usize, f: &[Rat]) -> Vec<Rat> {
    let ctx = Ctx::<Rat>::new(
        model,
        Policy {
            max_iters: 1,
            eps: None,
        },
    );
    ctx.diamond(label, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::logic::LogicKind;
    use crate::rational::{rat, rat_int};
    use crate::testgen::{ue_merge_model, up_merge_model};

    fn eval_r(model: &Pnts, text: &str) -> Vec<Rat> {
        let f = parse_formula(text, LogicKind::R).unwrap();
        evaluate_exact(model, &f, &Environment::new(), 1).unwrap()
    }

    #[test]
    fn constant_one_everywhere() {
        let m = ue_merge_model();
        assert_eq!(eval_r(&m, "1"), vec![rat_int(1); 4]);
    }

    #[test]
    fn worked_experiment_values() {
        // the encoded experiment evaluates to (60, 0, 50) on the leaves and
        // its diamond to 38 at x, 39 at y
        let m = up_merge_model();
        let text = "60*<a>1 + 50*(1 + (-1)*<a>1 + (-1)*<b>1)";
        let inner = eval_r(&m, text);
        let idx = |n: &str| m.state_index(n).unwrap();
        assert_eq!(inner[idx("x1")], rat_int(60));
        assert_eq!(inner[idx("x2")], rat_int(0));
        assert_eq!(inner[idx("x3")], rat_int(50));
        let outer = eval_r(&m, &format!("<a>({text})"));
        assert_eq!(outer[idx("x")], rat_int(38));
        assert_eq!(outer[idx("y")], rat_int(39));
    }

    #[test]
    fn diamond_of_empty_transitions_is_zero() {
        let m = ue_merge_model();
        let x2 = m.state_index("x2").unwrap();
        assert_eq!(eval_r(&m, "<a>1")[x2], rat_int(0));
    }

    #[test]
    fn greatest_fixpoint_stabilizes_exactly() {
        // frozen by hand iteration from the all-one valuation: three rounds
        let m = ue_merge_model();
        let f = parse_formula("nu v. <a>v", LogicKind::MU).unwrap();
        let vals = evaluate_exact(&m, &f, &Environment::new(), 100).unwrap();
        let idx = |n: &str| m.state_index(n).unwrap();
        assert_eq!(vals[idx("x")], rat(4, 5));
        assert_eq!(vals[idx("y")], rat(4, 5));
        assert_eq!(vals[idx("x1")], rat_int(1));
        assert_eq!(vals[idx("x2")], rat_int(0));
    }

    #[test]
    fn least_fixpoint_from_bottom() {
        // mu v. <a>v has no seed above zero, so it is identically zero
        let m = ue_merge_model();
        let f = parse_formula("mu v. <a>v", LogicKind::MU).unwrap();
        let vals = evaluate_exact(&m, &f, &Environment::new(), 100).unwrap();
        assert_eq!(vals, vec![rat_int(0); 4]);
    }

    #[test]
    fn float_mode_agrees_with_exact_on_stabilizing_fixpoints() {
        let m = ue_merge_model();
        let f = parse_formula("nu v. <a>v", LogicKind::MU).unwrap();
        let exact = evaluate_exact(&m, &f, &Environment::new(), 100).unwrap();
        let float = evaluate_float(&m, &f, &Environment::new(), 1e-9, 1_000_000).unwrap();
        for (e, fl) in exact.iter().zip(&float) {
            assert!((rat_to_f64(e) - fl).abs() <= 2e-9);
        }
    }

    #[test]
    fn fixpoint_iterates_are_monotone() {
        // drive the iteration by hand through the environment
        let m = ue_merge_model();
        let body = parse_formula("<a>v", LogicKind::QL_MU).unwrap();
        let mut env = Environment::new();
        let mut current = vec![rat_int(1); 4];
        for _ in 0..6 {
            env.insert("v".into(), current.clone());
            let next = evaluate_exact(&m, &body, &env, 1).unwrap();
            assert!(next.iter().zip(&current).all(|(n, c)| n <= c));
            current = next;
        }
    }

    #[test]
    fn unbound_variable_and_unknown_label_error() {
        let m = ue_merge_model();
        let f = parse_formula("<a>v", LogicKind::QL_MU).unwrap();
        assert!(matches!(
            evaluate_exact(&m, &f, &Environment::new(), 1),
            Err(EvalError::UnboundVariable(_))
        ));
        let g = parse_formula("<c>1", LogicKind::R).unwrap();
        assert!(matches!(
            evaluate_exact(&m, &g, &Environment::new(), 1),
            Err(EvalError::UnknownLabel(_))
        ));
    }

    #[test]
    fn bare_diamond_needs_single_label() {
        let one_label = ue_merge_model();
        let f = parse_formula("<>1", LogicKind::R).unwrap();
        assert!(evaluate_exact(&one_label, &f, &Environment::new(), 1).is_ok());
        let two_labels = up_merge_model();
        assert!(matches!(
            evaluate_exact(&two_labels, &f, &Environment::new(), 1),
            Err(EvalError::AmbiguousDiamond(2))
        ));
    }

    #[test]
    fn unit_operators_reject_out_of_range_operands() {
        let m = ue_merge_model();
        let f = Formula::neg(Formula::scale(rat_int(2), Formula::One));
        assert!(matches!(
            evaluate_exact(&m, &f, &Environment::new(), 1),
            Err(EvalError::RangeViolation { .. })
        ));
    }

    #[test]
    fn nonstabilizing_exact_fixpoint_reports_residual() {
        // x . x halves toward its fixed point without ever reaching it
        // from the top start when seeded by a product with itself
        let m = ue_merge_model();
        let f = parse_formula("nu v. 1/2*v", LogicKind::MU).unwrap();
        match evaluate_exact(&m, &f, &Environment::new(), 10) {
            Err(EvalError::NonStabilizing { iterations, residual }) => {
                assert_eq!(iterations, 10);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-stabilization, got {other:?}"),
        }
        // float mode converges to zero within tolerance
        let vals = evaluate_float(&m, &f, &Environment::new(), 1e-9, 1_000_000).unwrap();
        assert!(vals.iter().all(|v| *v < 1e-8));
    }

    #[test]
    fn props_enter_as_leaf_valuations() {
        let mut m = ue_merge_model();
        m.set_prop("goal".into(), vec![rat_int(0), rat_int(1), rat(1, 2), rat_int(0)])
            .unwrap();
        let vals = eval_r(&m, "prop(goal)");
        assert_eq!(vals[1], rat_int(1));
        assert_eq!(vals[2], rat(1, 2));
        let missing = parse_formula("prop(other)", LogicKind::R).unwrap();
        assert!(matches!(
            evaluate_exact(&m, &missing, &Environment::new(), 1),
            Err(EvalError::UnknownProp(_))
        ));
    }
}
