//! Exact linear programming over rationals.
//!
//! A dense two-phase simplex with Bland's anti-cycling pivot rule. Every
//! coefficient is an arbitrary-precision rational, so optima, witnesses and
//! infeasibility verdicts are exact and reproducible: Bland's rule fixes the
//! pivot order, hence the returned witness, for a given instance.
//!
//! Problem sizes here are small (membership and distance queries over a
//! handful of generators), so no sparsity or factorization machinery is
//! needed.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub rel: Rel,
    pub rhs: Rat,
}

/// A linear program: optimize `objective . x` subject to linear constraints
/// and per-variable bounds. A bound of `None` leaves that side unbounded.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub sense: Sense,
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(Option<Rat>, Option<Rat>)>,
}

impl LpInstance {
    /// New instance with all variables bounded below by zero.
    pub fn nonnegative(sense: Sense, objective: Vec<Rat>) -> LpInstance {
        let n = objective.len();
        LpInstance {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(Some(Rat::zero()), None); n],
        }
    }

    pub fn push(&mut self, coeffs: Vec<Rat>, rel: Rel, rhs: Rat) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    fn var_count(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, witness: Vec<Rat> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("constraint has {got} coefficients, expected {expected}")]
    BadConstraint { got: usize, expected: usize },
    #[error("bounds list has {got} entries, expected {expected}")]
    BadBounds { got: usize, expected: usize },
    #[error("variable {index} has contradictory bounds")]
    EmptyBound { index: usize },
}

/// How an original variable was rewritten into nonnegative columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// x = y + offset
    Shifted { col: usize, offset: Rat },
    /// x = offset - y
    Mirrored { col: usize, offset: Rat },
    /// x = y_pos - y_neg
    Split { pos: usize, neg: usize },
}

/// Solve the instance exactly. Infeasibility and unboundedness are ordinary
/// outcomes, not errors.
pub fn solve_lp(lp: &LpInstance) -> Result<LpOutcome, LpError> {
    let n = lp.var_count();
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(LpError::BadConstraint {
                got: c.coeffs.len(),
                expected: n,
            });
        }
    }
    if lp.bounds.len() != n {
        return Err(LpError::BadBounds {
            got: lp.bounds.len(),
            expected: n,
        });
    }

    // Rewrite into standard form: min c.y, A y (=|<=|>=) b', y >= 0.
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut cols = 0usize;
    let mut extra_rows: Vec<(usize, Rat)> = Vec::new(); // (column, upper value) for two-sided bounds
    for (i, (lo, hi)) in lp.bounds.iter().enumerate() {
        match (lo, hi) {
            (Some(l), Some(u)) => {
                if u < l {
                    return Err(LpError::EmptyBound { index: i });
                }
                maps.push(VarMap::Shifted {
                    col: cols,
                    offset: l.clone(),
                });
                extra_rows.push((cols, u - l));
                cols += 1;
            }
            (Some(l), None) => {
                maps.push(VarMap::Shifted {
                    col: cols,
                    offset: l.clone(),
                });
                cols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Mirrored {
                    col: cols,
                    offset: u.clone(),
                });
                cols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split {
                    pos: cols,
                    neg: cols + 1,
                });
                cols += 2;
            }
        }
    }

    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new(); // equality rows over `cols + slacks`
    let mut slack_count = 0usize;
    let mut pending: Vec<(Vec<Rat>, Rel, Rat)> = Vec::new();
    for c in &lp.constraints {
        let (coeffs, rhs) = rewrite_row(&c.coeffs, &c.rhs, &maps, cols);
        pending.push((coeffs, c.rel, rhs));
    }
    for (col, upper) in extra_rows {
        let mut coeffs = vec![Rat::zero(); cols];
        coeffs[col] = Rat::one();
        pending.push((coeffs, Rel::Le, upper));
    }
    for (mut coeffs, rel, rhs) in pending {
        match rel {
            Rel::Eq => {}
            Rel::Le | Rel::Ge => {
                slack_count += 1;
                coeffs.push(if rel == Rel::Le { Rat::one() } else { -Rat::one() });
            }
        }
        rows.push((coeffs, rhs));
    }
    // Pad slack columns so every row has the same width.
    let width = cols + slack_count;
    let mut slack_seen = 0usize;
    for (coeffs, _) in rows.iter_mut() {
        if coeffs.len() > cols {
            let slack = coeffs.pop().unwrap();
            coeffs.resize(width, Rat::zero());
            coeffs[cols + slack_seen] = slack;
            slack_seen += 1;
        } else {
            coeffs.resize(width, Rat::zero());
        }
    }

    // Objective over standard columns; Max is minimized negated.
    let mut cost = vec![Rat::zero(); width];
    for (i, c) in lp.objective.iter().enumerate() {
        match &maps[i] {
            VarMap::Shifted { col, .. } => cost[*col] += c,
            VarMap::Mirrored { col, .. } => cost[*col] -= c,
            VarMap::Split { pos, neg } => {
                cost[*pos] += c;
                cost[*neg] -= c;
            }
        }
    }
    if lp.sense == Sense::Max {
        for c in cost.iter_mut() {
            *c = -c.clone();
        }
    }

    let mut tableau = Tableau::new(rows, width);
    if !tableau.phase_one() {
        return Ok(LpOutcome::Infeasible);
    }
    if !tableau.phase_two(&cost) {
        return Ok(LpOutcome::Unbounded);
    }

    // Reconstruct the witness in the original variables.
    let y = tableau.solution();
    let mut witness = Vec::with_capacity(n);
    for map in &maps {
        let v = match map {
            VarMap::Shifted { col, offset } => &y[*col] + offset,
            VarMap::Mirrored { col, offset } => offset - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        };
        witness.push(v);
    }
    let mut value = Rat::zero();
    for (c, w) in lp.objective.iter().zip(&witness) {
        value += c * w;
    }
    debug_assert!(witness_feasible(lp, &witness), "witness violates constraints");
    Ok(LpOutcome::Optimal { value, witness })
}

fn rewrite_row(coeffs: &[Rat], rhs: &Rat, maps: &[VarMap], cols: usize) -> (Vec<Rat>, Rat) {
    let mut out = vec![Rat::zero(); cols];
    let mut b = rhs.clone();
    for (i, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        match &maps[i] {
            VarMap::Shifted { col, offset } => {
                out[*col] += a;
                b -= a * offset;
            }
            VarMap::Mirrored { col, offset } => {
                out[*col] -= a;
                b -= a * offset;
            }
            VarMap::Split { pos, neg } => {
                out[*pos] += a;
                out[*neg] -= a;
            }
        }
    }
    (out, b)
}

/// Exact feasibility re-check used by debug assertions.
fn witness_feasible(lp: &LpInstance, witness: &[Rat]) -> bool {
    for c in &lp.constraints {
        let mut lhs = Rat::zero();
        for (a, w) in c.coeffs.iter().zip(witness) {
            lhs += a * w;
        }
        let ok = match c.rel {
            Rel::Le => lhs <= c.rhs,
            Rel::Eq => lhs == c.rhs,
            Rel::Ge => lhs >= c.rhs,
        };
        if !ok {
            return false;
        }
    }
    for ((lo, hi), w) in lp.bounds.iter().zip(witness) {
        if let Some(l) = lo {
            if w < l {
                return false;
            }
        }
        if let Some(u) = hi {
            if w > u {
                return false;
            }
        }
    }
    true
}

/// Dense simplex tableau in canonical form: basic columns are unit vectors,
/// `reduced` holds current reduced costs, `rhs` stays nonnegative.
struct Tableau {
    a: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    real_cols: usize,
    total_cols: usize,
    reduced: Vec<Rat>,
    objective: Rat,
}

impl Tableau {
    fn new(rows: Vec<(Vec<Rat>, Rat)>, real_cols: usize) -> Tableau {
        let m = rows.len();
        let total_cols = real_cols + m;
        let mut a = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, (mut coeffs, mut b)) in rows.into_iter().enumerate() {
            if b.is_negative() {
                for x in coeffs.iter_mut() {
                    *x = -x.clone();
                }
                b = -b;
            }
            coeffs.resize(total_cols, Rat::zero());
            coeffs[real_cols + i] = Rat::one();
            a.push(coeffs);
            rhs.push(b);
            basis.push(real_cols + i);
        }
        Tableau {
            a,
            rhs,
            basis,
            real_cols,
            total_cols,
            reduced: Vec::new(),
            objective: Rat::zero(),
        }
    }

    /// Minimize the sum of artificial variables. Returns false on
    /// infeasibility (positive optimum).
    fn phase_one(&mut self) -> bool {
        // phase-1 cost: 1 on artificials, 0 on real columns
        let mut reduced = vec![Rat::zero(); self.total_cols];
        let mut objective = Rat::zero();
        for i in 0..self.a.len() {
            for j in 0..self.real_cols {
                reduced[j] -= &self.a[i][j];
            }
            objective += &self.rhs[i];
        }
        self.reduced = reduced;
        self.objective = objective;
        self.iterate(self.total_cols);
        if self.objective.is_positive() {
            return false;
        }
        self.evict_artificials();
        true
    }

    /// Minimize the given real objective from the feasible basis left by
    /// phase one. Returns false when unbounded.
    fn phase_two(&mut self, cost: &[Rat]) -> bool {
        let mut reduced = cost.to_vec();
        reduced.resize(self.total_cols, Rat::zero());
        let mut objective = Rat::zero();
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = if bv < self.real_cols {
                cost[bv].clone()
            } else {
                Rat::zero()
            };
            if cb.is_zero() {
                continue;
            }
            objective += &cb * &self.rhs[i];
            for j in 0..self.total_cols {
                if !self.a[i][j].is_zero() {
                    let delta = &cb * &self.a[i][j];
                    reduced[j] -= delta;
                }
            }
        }
        self.reduced = reduced;
        self.objective = -objective;
        // entering restricted to real columns: artificials stay out
        self.iterate(self.real_cols)
    }

    /// Bland's rule: entering column is the lowest index with negative
    /// reduced cost; the leaving row is the ratio-test minimum, ties broken
    /// by lowest basic variable index. Returns false iff unbounded.
    fn iterate(&mut self, enter_limit: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..enter_limit {
                if self.reduced[j].is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rat)> = None;
            for i in 0..self.a.len() {
                if self.a[i][j].is_positive() {
                    let ratio = &self.rhs[i] / &self.a[i][j];
                    let better = match &leaving {
                        None => true,
                        Some((row, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*row])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, j);
        }
    }

    /// Replace basic artificial variables by real columns where possible;
    /// rows that admit no real pivot are redundant and cleared to zero.
    fn evict_artificials(&mut self) {
        for i in 0..self.a.len() {
            if self.basis[i] < self.real_cols {
                continue;
            }
            debug_assert!(self.rhs[i].is_zero(), "artificial basic with positive value");
            let pivot_col = (0..self.real_cols).find(|&j| !self.a[i][j].is_zero());
            match pivot_col {
                Some(j) => self.pivot(i, j),
                None => {
                    // redundant constraint row
                    for j in 0..self.total_cols {
                        self.a[i][j] = Rat::zero();
                    }
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = {
            let p = &self.a[row][col];
            debug_assert!(!p.is_zero());
            Rat::one() / p
        };
        for j in 0..self.total_cols {
            if !self.a[row][j].is_zero() {
                self.a[row][j] = &self.a[row][j] * &inv;
            }
        }
        self.rhs[row] = &self.rhs[row] * &inv;
        for i in 0..self.a.len() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for j in 0..self.total_cols {
                if !self.a[row][j].is_zero() {
                    let delta = &factor * &self.a[row][j];
                    self.a[i][j] -= delta;
                }
            }
            let delta = &factor * &self.rhs[row];
            self.rhs[i] -= delta;
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for j in 0..self.total_cols {
                if !self.a[row][j].is_zero() {
                    let delta = &factor * &self.a[row][j];
                    self.reduced[j] -= delta;
                }
            }
            let delta = &factor * &self.rhs[row];
            self.objective += delta;
        }
        self.basis[row] = col;
    }

    fn solution(&self) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); self.real_cols];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.real_cols {
                y[bv] = self.rhs[i].clone();
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn max_x_subject_to_unit_box() {
        let mut lp = LpInstance::nonnegative(Sense::Max, ints(&[1]));
        lp.push(ints(&[1]), Rel::Le, rat_int(1));
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, witness } => {
                assert_eq!(value, rat_int(1));
                assert_eq!(witness, ints(&[1]));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn midpoint_mixture_is_feasible() {
        // lambda1 * (1/5,4/5) + lambda2 * (4/5,1/5) = (1/2,1/2), lambda >= 0 summing to 1
        let mut lp = LpInstance::nonnegative(Sense::Min, ints(&[0, 0]));
        lp.push(vec![rat(1, 5), rat(4, 5)], Rel::Eq, rat(1, 2));
        lp.push(vec![rat(4, 5), rat(1, 5)], Rel::Eq, rat(1, 2));
        lp.push(ints(&[1, 1]), Rel::Eq, rat_int(1));
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { witness, .. } => {
                assert_eq!(witness, vec![rat(1, 2), rat(1, 2)]);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn off_hull_mixture_is_infeasible() {
        // (2/5,3/10,3/10) is not a mixture of (3/10,3/10,2/5) and (1/2,2/5,1/10)
        let mut lp = LpInstance::nonnegative(Sense::Min, ints(&[0, 0]));
        lp.push(vec![rat(3, 10), rat(1, 2)], Rel::Eq, rat(2, 5));
        lp.push(vec![rat(3, 10), rat(2, 5)], Rel::Eq, rat(3, 10));
        lp.push(vec![rat(2, 5), rat(1, 10)], Rel::Eq, rat(3, 10));
        lp.push(ints(&[1, 1]), Rel::Eq, rat_int(1));
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LpInstance::nonnegative(Sense::Max, ints(&[1]));
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn beale_cycling_instance_terminates() {
        // classic degenerate instance that cycles without an anti-cycling rule
        let mut lp = LpInstance::nonnegative(
            Sense::Min,
            vec![rat(-3, 4), rat_int(150), rat(-1, 50), rat_int(6)],
        );
        lp.push(
            vec![rat(1, 4), rat_int(-60), rat(-1, 25), rat_int(9)],
            Rel::Le,
            rat_int(0),
        );
        lp.push(
            vec![rat(1, 2), rat_int(-90), rat(-1, 50), rat_int(3)],
            Rel::Le,
            rat_int(0),
        );
        lp.push(ints(&[0, 0, 1, 0]), Rel::Le, rat_int(1));
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-1, 20)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn free_and_mirrored_variables() {
        let mut lp = LpInstance {
            sense: Sense::Min,
            objective: ints(&[1]),
            constraints: Vec::new(),
            bounds: vec![(None, None)],
        };
        lp.push(ints(&[1]), Rel::Ge, rat_int(-5));
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, witness } => {
                assert_eq!(value, rat_int(-5));
                assert_eq!(witness, ints(&[-5]));
            }
            other => panic!("unexpected outcome {other:?}"),
        }

        let lp2 = LpInstance {
            sense: Sense::Max,
            objective: ints(&[1]),
            constraints: Vec::new(),
            bounds: vec![(None, Some(rat_int(3)))],
        };
        match solve_lp(&lp2).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat_int(3)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn two_sided_bounds() {
        let lp = LpInstance {
            sense: Sense::Max,
            objective: ints(&[1, 1]),
            constraints: vec![Constraint {
                coeffs: ints(&[1, 1]),
                rel: Rel::Le,
                rhs: rat(3, 2),
            }],
            bounds: vec![
                (Some(rat_int(0)), Some(rat_int(1))),
                (Some(rat_int(0)), Some(rat_int(1))),
            ],
        };
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(3, 2)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_error() {
        let lp = LpInstance {
            sense: Sense::Min,
            objective: ints(&[1]),
            constraints: Vec::new(),
            bounds: vec![(Some(rat_int(2)), Some(rat_int(1)))],
        };
        assert!(matches!(solve_lp(&lp), Err(LpError::EmptyBound { index: 0 })));
    }

    #[test]
    fn equality_with_redundant_row() {
        let mut lp = LpInstance::nonnegative(Sense::Max, ints(&[1, 0]));
        lp.push(ints(&[1, 1]), Rel::Eq, rat_int(2));
        lp.push(ints(&[2, 2]), Rel::Eq, rat_int(4)); // redundant
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat_int(2)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
