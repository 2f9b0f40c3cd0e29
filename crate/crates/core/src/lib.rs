//! Behavioral equivalences, real-valued modal logics and behavioral metrics
//! for finite probabilistic nondeterministic transition systems, computed
//! over exact rationals.
//!
//! The crate decides standard, convex/upper-expectation and
//! upper-probability bisimilarity by partition refinement, evaluates a
//! family of quantitative modal logics (including fixed-point extensions),
//! synthesizes distinguishing and target formulas, computes the Hausdorff
//! behavioral metric by linear programming, composes systems with a
//! CCS-style parallel operator, and estimates upper expectations by
//! seeded Monte Carlo simulation.

pub mod rational;
pub mod model;
pub mod lp;
pub mod hull;
pub mod bisim;
pub mod testgen;

pub use bisim::{
    bisimilarity, check_ue_bisimulation, distinguishing_experiment, experiment_gap, BisimError,
    BisimKind, Experiment, UeCounterexample,
};
pub use hull::{
    hausdorff_distance, hull_equal, hull_membership, l1_distance_to_hull, upper_expectation,
    GeneratorSet, HullError, Membership,
};
pub use lp::{solve_lp, Constraint, LpError, LpInstance, LpOutcome, Rel, Sense};
pub use model::{
    embed_mp, embed_nts, Distribution, Label, LabelKind, ModelError, Partition, Pnts, TAU,
};
pub use rational::{format_rat, parse_rat, rat, rat_int, rat_to_f64, Rat};
