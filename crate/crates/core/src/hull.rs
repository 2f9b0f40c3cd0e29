//! Convex-geometry predicates over finite generator sets of distributions:
//! hull membership with separating witnesses, hull equality, upper
//! expectations, L1 distance to a hull, and the Hausdorff distance between
//! hulls.
//!
//! A finite generator set stands for its closed convex hull; finite hulls
//! are closed, so the topological closure operator is a no-op here and
//! membership/equality over generators is sound and complete for the hulls.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{solve_lp, LpInstance, LpOutcome, Rel, Sense};
use crate::model::Distribution;
use crate::rational::Rat;

/// A duplicate-free, lexicographically sorted list of equal-dimension
/// distributions, representing the closed convex hull of its members.
/// The dimension is carried explicitly so that empty sets stay typed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    dim: usize,
    gens: Vec<Distribution>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("distance to an empty generator set is not defined")]
    EmptyGeneratorSet,
}

/// Result of a hull membership query: either convex weights over the
/// generators reproducing the point exactly, or a separating valuation
/// with `E_point(f) > ue_set(f)`, scaled to sup-norm one, and the exact gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Inside { weights: Vec<Rat> },
    Outside { witness: Vec<Rat>, gap: Rat },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

impl GeneratorSet {
    pub fn new(dim: usize, gens: Vec<Distribution>) -> Result<GeneratorSet, HullError> {
        for g in &gens {
            if g.len() != dim {
                return Err(HullError::DimensionMismatch {
                    left: g.len(),
                    right: dim,
                });
            }
        }
        let mut gens = gens;
        gens.sort();
        gens.dedup();
        Ok(GeneratorSet { dim, gens })
    }

    pub fn from_slice(dim: usize, gens: &[Distribution]) -> Result<GeneratorSet, HullError> {
        GeneratorSet::new(dim, gens.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Distribution] {
        &self.gens
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }
}

/// Upper expectation of `f` over the hull: the maximum of the generators'
/// expected values, which a linear objective attains at a generator. The
/// empty set maps every experiment to 0.
pub fn upper_expectation(set: &GeneratorSet, f: &[Rat]) -> Result<Rat, HullError> {
    if f.len() != set.dim {
        return Err(HullError::DimensionMismatch {
            left: f.len(),
            right: set.dim,
        });
    }
    let mut best: Option<Rat> = None;
    for g in &set.gens {
        let v = g.expected_value(f).expect("dimensions checked");
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    Ok(best.unwrap_or_else(Rat::zero))
}

/// Decide whether `point` lies in the hull of `set`. Inside yields exact
/// convex weights (in generator order); outside yields a separating
/// valuation from the dual of the membership system.
pub fn hull_membership(point: &Distribution, set: &GeneratorSet) -> Result<Membership, HullError> {
    if point.len() != set.dim {
        return Err(HullError::DimensionMismatch {
            left: point.len(),
            right: set.dim,
        });
    }
    if set.is_empty() {
        // Nothing to mix: any constant experiment separates, normalized to
        // sup-norm one. E_point(1) = 1 while the empty hull yields 0.
        return Ok(Membership::Outside {
            witness: vec![Rat::one(); set.dim],
            gap: Rat::one(),
        });
    }
    let k = set.len();
    // Feasibility: weights >= 0, sum to 1, mix exactly to the point.
    let mut lp = LpInstance::nonnegative(Sense::Min, vec![Rat::zero(); k]);
    for x in 0..set.dim {
        let coeffs = set.gens.iter().map(|g| g.prob(x).clone()).collect();
        lp.push(coeffs, Rel::Eq, point.prob(x).clone());
    }
    lp.push(vec![Rat::one(); k], Rel::Eq, Rat::one());
    match solve_lp(&lp).expect("well-formed membership instance") {
        LpOutcome::Optimal { witness, .. } => Ok(Membership::Inside { weights: witness }),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        LpOutcome::Infeasible => {
            let (witness, gap) = separating_witness(point, set);
            Ok(Membership::Outside { witness, gap })
        }
    }
}

/// Dual of the membership system, restricted to the sup-norm unit ball:
/// maximize E_point(f) - t subject to E_g(f) <= t for every generator and
/// -1 <= f <= 1. The optimum is positive exactly when the point is outside,
/// and scaling pushes the optimal f to sup-norm one.
fn separating_witness(point: &Distribution, set: &GeneratorSet) -> (Vec<Rat>, Rat) {
    let n = set.dim;
    // variables: f_0..f_{n-1}, t
    let mut objective: Vec<Rat> = point.probs().to_vec();
    objective.push(-Rat::one());
    let mut bounds: Vec<(Option<Rat>, Option<Rat>)> =
        vec![(Some(-Rat::one()), Some(Rat::one())); n];
    bounds.push((None, None));
    let mut lp = LpInstance {
        sense: Sense::Max,
        objective,
        constraints: Vec::new(),
        bounds,
    };
    for g in &set.gens {
        let mut coeffs: Vec<Rat> = g.probs().to_vec();
        coeffs.push(-Rat::one());
        lp.push(coeffs, Rel::Le, Rat::zero());
    }
    match solve_lp(&lp).expect("well-formed dual instance") {
        LpOutcome::Optimal { value, mut witness } => {
            debug_assert!(value.is_positive(), "dual gap must be positive outside the hull");
            witness.pop(); // drop t
            let norm = witness
                .iter()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(Rat::zero);
            let mut gap = value;
            if !norm.is_zero() && !norm.is_one() {
                for v in witness.iter_mut() {
                    *v = &*v / &norm;
                }
                gap /= &norm;
            }
            (witness, gap)
        }
        other => unreachable!("dual instance is bounded and feasible: {other:?}"),
    }
}

/// Hull equality: every generator of each side lies in the other's hull.
/// Sound and complete for finite generator sets.
pub fn hull_equal(a: &GeneratorSet, b: &GeneratorSet) -> Result<bool, HullError> {
    if a.dim != b.dim {
        return Err(HullError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    if a.gens == b.gens {
        return Ok(true);
    }
    if a.is_empty() != b.is_empty() {
        return Ok(false);
    }
    for g in &a.gens {
        if !hull_membership(g, b)?.is_inside() {
            return Ok(false);
        }
    }
    for g in &b.gens {
        if !hull_membership(g, a)?.is_inside() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A valuation on which two hulls take different upper expectations, or
/// `None` when the hulls coincide. Some generator of one side lies outside
/// the other hull, and its dual membership witness separates; when exactly
/// one side is empty the constant-one experiment does (the empty hull maps
/// everything to 0).
pub fn hull_difference_witness(
    a: &GeneratorSet,
    b: &GeneratorSet,
) -> Result<Option<Vec<Rat>>, HullError> {
    if a.dim != b.dim {
        return Err(HullError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    if a.is_empty() != b.is_empty() {
        return Ok(Some(vec![Rat::one(); a.dim]));
    }
    for (own, other) in [(a, b), (b, a)] {
        for g in own.generators() {
            if let Membership::Outside { witness, .. } = hull_membership(g, other)? {
                return Ok(Some(witness));
            }
        }
    }
    Ok(None)
}

/// Minimum L1 distance from `point` to the hull of `set`, as an exact
/// rational. Errors on an empty set; callers handle that case by their own
/// conventions.
pub fn l1_distance_to_hull(point: &Distribution, set: &GeneratorSet) -> Result<Rat, HullError> {
    if point.len() != set.dim {
        return Err(HullError::DimensionMismatch {
            left: point.len(),
            right: set.dim,
        });
    }
    if set.is_empty() {
        return Err(HullError::EmptyGeneratorSet);
    }
    let k = set.len();
    let n = set.dim;
    // variables: weights (k), then slack pairs s_plus, s_minus per state
    let mut objective = vec![Rat::zero(); k];
    objective.extend(vec![Rat::one(); 2 * n]);
    let mut lp = LpInstance::nonnegative(Sense::Min, objective);
    for x in 0..n {
        let mut coeffs: Vec<Rat> = set.gens.iter().map(|g| g.prob(x).clone()).collect();
        coeffs.extend(vec![Rat::zero(); 2 * n]);
        coeffs[k + 2 * x] = Rat::one();
        coeffs[k + 2 * x + 1] = -Rat::one();
        lp.push(coeffs, Rel::Eq, point.prob(x).clone());
    }
    let mut sum_row = vec![Rat::one(); k];
    sum_row.extend(vec![Rat::zero(); 2 * n]);
    lp.push(sum_row, Rel::Eq, Rat::one());
    match solve_lp(&lp).expect("well-formed distance instance") {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => unreachable!("distance instance is feasible and bounded: {other:?}"),
    }
}

/// L1 diameter of the probability simplex; the documented distance between
/// an empty and a nonempty transition set.
pub fn empty_vs_nonempty_distance() -> Rat {
    Rat::from_integer(2.into())
}

/// Hausdorff distance between the hulls of two generator sets under the L1
/// metric: the larger of the two directed distances, each the maximum over
/// one side's generators of the L1 distance to the other hull. Two empty
/// sets are at distance 0; an empty and a nonempty set are at the simplex
/// diameter 2.
pub fn hausdorff_distance(a: &GeneratorSet, b: &GeneratorSet) -> Result<Rat, HullError> {
    if a.dim != b.dim {
        return Err(HullError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(Rat::zero()),
        (true, false) | (false, true) => return Ok(empty_vs_nonempty_distance()),
        (false, false) => {}
    }
    let mut best = Rat::zero();
    for g in &a.gens {
        let d = l1_distance_to_hull(g, b)?;
        if d > best {
            best = d;
        }
    }
    for g in &b.gens {
        let d = l1_distance_to_hull(g, a)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn dist(entries: &[(i64, i64)]) -> Distribution {
        Distribution::new(entries.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn gens(dim: usize, ds: &[Distribution]) -> GeneratorSet {
        GeneratorSet::from_slice(dim, ds).unwrap()
    }

    fn mixture_pair() -> (Distribution, Distribution, Distribution) {
        (
            dist(&[(1, 5), (4, 5)]),
            dist(&[(4, 5), (1, 5)]),
            dist(&[(1, 2), (1, 2)]),
        )
    }

    fn off_hull_triple() -> (Distribution, Distribution, Distribution) {
        (
            dist(&[(3, 10), (3, 10), (2, 5)]),
            dist(&[(1, 2), (2, 5), (1, 10)]),
            dist(&[(2, 5), (3, 10), (3, 10)]),
        )
    }

    #[test]
    fn midpoint_is_inside_with_half_weights() {
        let (mu1, mu2, mu3) = mixture_pair();
        let set = gens(2, &[mu1.clone(), mu2.clone()]);
        match hull_membership(&mu3, &set).unwrap() {
            Membership::Inside { weights } => {
                // generator order is lexicographic: mu1 < mu2
                assert_eq!(weights, vec![rat(1, 2), rat(1, 2)]);
            }
            other => panic!("expected inside, got {other:?}"),
        }
    }

    #[test]
    fn singleton_hull_contains_itself() {
        let mu = dist(&[(1, 3), (2, 3)]);
        let set = gens(2, &[mu.clone()]);
        match hull_membership(&mu, &set).unwrap() {
            Membership::Inside { weights } => assert_eq!(weights, vec![rat_int(1)]),
            other => panic!("expected inside, got {other:?}"),
        }
    }

    #[test]
    fn outside_point_gets_separating_witness() {
        let (mu1, mu2, mu3) = off_hull_triple();
        let set = gens(3, &[mu1, mu2]);
        match hull_membership(&mu3, &set).unwrap() {
            Membership::Outside { witness, gap } => {
                assert!(gap.is_positive());
                let norm = witness.iter().map(|v| v.abs()).max().unwrap();
                assert_eq!(norm, rat_int(1));
                // the witness really separates
                let lhs = mu3.expected_value(&witness).unwrap();
                let rhs = upper_expectation(&set, &witness).unwrap();
                assert_eq!(&lhs - &rhs, gap);
            }
            other => panic!("expected outside, got {other:?}"),
        }
    }

    #[test]
    fn membership_in_empty_set_is_outside() {
        let mu = dist(&[(1, 2), (1, 2)]);
        let empty = gens(2, &[]);
        match hull_membership(&mu, &empty).unwrap() {
            Membership::Outside { gap, .. } => assert_eq!(gap, rat_int(1)),
            other => panic!("expected outside, got {other:?}"),
        }
    }

    #[test]
    fn hull_equality_absorbs_mixtures() {
        let (mu1, mu2, mu3) = mixture_pair();
        let with_mix = gens(2, &[mu1.clone(), mu2.clone(), mu3.clone()]);
        let without = gens(2, &[mu1, mu2]);
        assert!(hull_equal(&with_mix, &without).unwrap());
        assert!(hull_equal(&with_mix, &with_mix).unwrap());
    }

    #[test]
    fn hull_equality_detects_extra_vertex() {
        let (mu1, mu2, mu3) = off_hull_triple();
        let with_extra = gens(3, &[mu1.clone(), mu2.clone(), mu3]);
        let without = gens(3, &[mu1, mu2]);
        assert!(!hull_equal(&with_extra, &without).unwrap());
        let empty = gens(3, &[]);
        assert!(hull_equal(&empty, &empty).unwrap());
        assert!(!hull_equal(&empty, &without).unwrap());
    }

    #[test]
    fn upper_expectation_matches_worked_values() {
        let (mu1, mu2, mu3) = off_hull_triple();
        let f = vec![rat_int(60), rat_int(0), rat_int(50)];
        let x_side = gens(3, &[mu1.clone(), mu2.clone()]);
        let y_side = gens(3, &[mu1, mu2, mu3]);
        assert_eq!(upper_expectation(&x_side, &f).unwrap(), rat_int(38));
        assert_eq!(upper_expectation(&y_side, &f).unwrap(), rat_int(39));
        let empty = gens(3, &[]);
        assert_eq!(upper_expectation(&empty, &f).unwrap(), rat_int(0));
    }

    #[test]
    fn distance_zero_inside_the_hull() {
        let (mu1, mu2, mu3) = mixture_pair();
        let set = gens(2, &[mu1, mu2]);
        assert_eq!(l1_distance_to_hull(&mu3, &set).unwrap(), rat_int(0));
    }

    #[test]
    fn distance_to_off_hull_vertex() {
        // frozen from the one-dimensional parametric oracle in the metric
        // integration tests: minimum 1/15 at mixing weight 2/3
        let (mu1, mu2, mu3) = off_hull_triple();
        let set = gens(3, &[mu1, mu2]);
        assert_eq!(l1_distance_to_hull(&mu3, &set).unwrap(), rat(1, 15));
    }

    #[test]
    fn distance_between_disjoint_diracs_is_two() {
        let dx = Distribution::dirac(0, 2).unwrap();
        let dy = Distribution::dirac(1, 2).unwrap();
        let set = gens(2, &[dy]);
        assert_eq!(l1_distance_to_hull(&dx, &set).unwrap(), rat_int(2));
        assert!(l1_distance_to_hull(&dx, &gens(2, &[])).is_err());
    }

    #[test]
    fn hausdorff_conventions() {
        let (mu1, mu2, mu3) = off_hull_triple();
        let x_side = gens(3, &[mu1.clone(), mu2.clone()]);
        let y_side = gens(3, &[mu1, mu2, mu3]);
        assert_eq!(hausdorff_distance(&x_side, &x_side).unwrap(), rat_int(0));
        assert_eq!(hausdorff_distance(&x_side, &y_side).unwrap(), rat(1, 15));
        assert_eq!(hausdorff_distance(&y_side, &x_side).unwrap(), rat(1, 15));
        let empty = gens(3, &[]);
        assert_eq!(hausdorff_distance(&empty, &empty).unwrap(), rat_int(0));
        assert_eq!(hausdorff_distance(&empty, &y_side).unwrap(), rat_int(2));
    }
}
