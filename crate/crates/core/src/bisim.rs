//! Partition-refinement deciders for standard, upper-expectation (UE) and
//! upper-probability (UP) bisimilarity, a bisimulation checker, and
//! extraction of distinguishing experiments.
//!
//! All three deciders share the same loop: start from the partition induced
//! by the atomic propositions (the total partition when there are none) and
//! split blocks until stable. Two states stay together when, for every
//! label, their successor generator lists agree after quotienting by the
//! current partition — as sets for the standard kind, as convex hulls for
//! UE, and as upper-probability functionals on unions of blocks for UP.
//! Each round either strictly increases the block count or terminates, so
//! at most `|states|` rounds run.

use num_traits::Signed;
use thiserror::Error;

use crate::hull::{hull_equal, upper_expectation, GeneratorSet};
use crate::model::{ModelError, Partition, Pnts};
use crate::rational::{rat_abs, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BisimKind {
    Standard,
    Ue,
    Up,
}

impl BisimKind {
    pub fn name(self) -> &'static str {
        match self {
            BisimKind::Standard => "standard",
            BisimKind::Ue => "ue",
            BisimKind::Up => "up",
        }
    }
}

impl std::str::FromStr for BisimKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(BisimKind::Standard),
            "ue" => Ok(BisimKind::Ue),
            "up" => Ok(BisimKind::Up),
            other => Err(format!("unknown bisimulation kind `{other}`")),
        }
    }
}

/// Block-count guard for the UP decider, which enumerates all unions of
/// blocks and is exponential by design.
pub const UP_BLOCK_GUARD: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BisimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("up-bisimilarity guard exceeded: {blocks} blocks > {guard}")]
    UpGuardExceeded { blocks: usize, guard: usize },
}

/// A witness that a candidate equivalence fails: states `x` and `y` share a
/// block but some block-constant experiment tells their successor hulls
/// apart under `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeCounterexample {
    pub x: usize,
    pub y: usize,
    pub label: usize,
    /// Experiment over states, constant on the candidate's blocks.
    pub witness: Vec<Rat>,
    /// |ue at x - ue at y| under `witness`, exact and positive.
    pub gap: Rat,
}

/// A distinguishing experiment for a pair of UE-inequivalent states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Experiment {
    pub label: usize,
    /// Constant on the blocks of the coarsest UE partition.
    pub valuation: Vec<Rat>,
    pub gap: Rat,
}

/// The coarsest bisimulation of the requested kind, per label.
pub fn bisimilarity(model: &Pnts, kind: BisimKind) -> Result<Partition, BisimError> {
    let mut partition = initial_partition(model);
    loop {
        if kind == BisimKind::Up && partition.block_count() > UP_BLOCK_GUARD {
            return Err(BisimError::UpGuardExceeded {
                blocks: partition.block_count(),
                guard: UP_BLOCK_GUARD,
            });
        }
        let next = refine_once(model, &partition, kind)?;
        if next.block_count() == partition.block_count() {
            return Ok(partition);
        }
        partition = next;
    }
}

/// Propositions refine the starting partition; states with different
/// proposition values can never be related by a sound equivalence.
pub(crate) fn initial_partition(model: &Pnts) -> Partition {
    if model.props().is_empty() {
        return Partition::total(model.state_count());
    }
    Partition::group_by_key(model.state_count(), |s| {
        model
            .props()
            .values()
            .map(|v| v[s].clone())
            .collect::<Vec<_>>()
    })
}

pub(crate) fn refine_once(
    model: &Pnts,
    partition: &Partition,
    kind: BisimKind,
) -> Result<Partition, BisimError> {
    let quotients = QuotientTable::new(model, partition)?;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for block in partition.blocks() {
        // group block members against representatives; the per-kind relation
        // is an equivalence, so representative comparison is sound
        let mut groups: Vec<Vec<usize>> = Vec::new();
        'states: for &state in block {
            for group in groups.iter_mut() {
                if states_match(model, &quotients, partition, group[0], state, kind)? {
                    group.push(state);
                    continue 'states;
                }
            }
            groups.push(vec![state]);
        }
        blocks.extend(groups);
    }
    Ok(Partition::from_blocks(blocks, model.state_count())?)
}

fn states_match(
    model: &Pnts,
    quotients: &QuotientTable,
    partition: &Partition,
    x: usize,
    y: usize,
    kind: BisimKind,
) -> Result<bool, BisimError> {
    for label in 0..model.label_count() {
        let qx = quotients.set(x, label);
        let qy = quotients.set(y, label);
        let same = match kind {
            BisimKind::Standard => qx.generators() == qy.generators(),
            BisimKind::Ue => hull_equal(qx, qy).expect("equal dimensions"),
            BisimKind::Up => up_signatures_equal(qx, qy, partition.block_count()),
        };
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Upper-probability agreement on every union of blocks: for each subset of
/// blocks, the maximal probability mass any generator puts on the union.
fn up_signatures_equal(a: &GeneratorSet, b: &GeneratorSet, blocks: usize) -> bool {
    if a.is_empty() != b.is_empty() {
        return false;
    }
    for mask in 0..(1u64 << blocks) {
        if up_value(a, mask) != up_value(b, mask) {
            return false;
        }
    }
    true
}

fn up_value(set: &GeneratorSet, mask: u64) -> Rat {
    let mut best = Rat::from_integer(0.into());
    for g in set.generators() {
        let mut mass = Rat::from_integer(0.into());
        for s in g.support() {
            if mask & (1 << s) != 0 {
                mass += g.prob(s);
            }
        }
        if mass > best {
            best = mass;
        }
    }
    best
}

/// Per-round cache of quotiented generator sets.
struct QuotientTable {
    sets: Vec<Vec<GeneratorSet>>,
}

impl QuotientTable {
    fn new(model: &Pnts, partition: &Partition) -> Result<QuotientTable, BisimError> {
        let dim = partition.block_count();
        let mut sets = Vec::with_capacity(model.state_count());
        for state in 0..model.state_count() {
            let mut per_label = Vec::with_capacity(model.label_count());
            for label in 0..model.label_count() {
                let quotiented: Result<Vec<_>, ModelError> = model
                    .successors(state, label)
                    .iter()
                    .map(|d| d.quotient(partition))
                    .collect();
                per_label.push(
                    GeneratorSet::new(dim, quotiented?).expect("quotient dimensions agree"),
                );
            }
            sets.push(per_label);
        }
        Ok(QuotientTable { sets })
    }

    fn set(&self, state: usize, label: usize) -> &GeneratorSet {
        &self.sets[state][label]
    }
}

/// Check whether `partition` is a UE-bisimulation on `model`. Returns a
/// counterexample when it is not: a pair in one block, a label, and a
/// block-constant experiment with a positive upper-expectation gap.
pub fn check_ue_bisimulation(
    model: &Pnts,
    partition: &Partition,
) -> Result<Option<UeCounterexample>, BisimError> {
    let quotients = QuotientTable::new(model, partition)?;
    for block in partition.blocks() {
        let rep = block[0];
        for &state in &block[1..] {
            for label in 0..model.label_count() {
                let qa = quotients.set(rep, label);
                let qb = quotients.set(state, label);
                if !hull_equal(qa, qb).expect("equal dimensions") {
                    let (witness, gap) =
                        separating_experiment(model, partition, rep, state, label, qa, qb);
                    return Ok(Some(UeCounterexample {
                        x: rep,
                        y: state,
                        label,
                        witness,
                        gap,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Dual separating witness for two quotiented generator sets with unequal
/// hulls, lifted back through the quotient map. The gap is recomputed on
/// the lifted experiment, exactly.
fn separating_experiment(
    model: &Pnts,
    partition: &Partition,
    x: usize,
    y: usize,
    label: usize,
    qx: &GeneratorSet,
    qy: &GeneratorSet,
) -> (Vec<Rat>, Rat) {
    let block_witness = hull_gap_witness(qx, qy);
    let lifted: Vec<Rat> = (0..model.state_count())
        .map(|s| block_witness[partition.block_of(s)].clone())
        .collect();
    let ue_x = upper_expectation(
        &state_generator_set(model, x, label),
        &lifted,
    )
    .expect("dimensions agree");
    let ue_y = upper_expectation(
        &state_generator_set(model, y, label),
        &lifted,
    )
    .expect("dimensions agree");
    let gap = rat_abs(&(ue_x - ue_y));
    debug_assert!(gap.is_positive(), "separating experiment must have a gap");
    (lifted, gap)
}

/// A valuation over blocks that separates two unequal hulls.
fn hull_gap_witness(qx: &GeneratorSet, qy: &GeneratorSet) -> Vec<Rat> {
    crate::hull::hull_difference_witness(qx, qy)
        .expect("equal dimensions")
        .expect("unequal hulls must expose a difference witness")
}

fn state_generator_set(model: &Pnts, state: usize, label: usize) -> GeneratorSet {
    GeneratorSet::from_slice(model.state_count(), model.successors(state, label))
        .expect("transition lists dimension-match the model")
}

/// Search for an experiment distinguishing `x` from `y`, or report them
/// equivalent. The experiment is constant on the blocks of the coarsest UE
/// partition and exhibits an exact positive gap under some label.
pub fn distinguishing_experiment(
    model: &Pnts,
    x: usize,
    y: usize,
) -> Result<Option<Experiment>, BisimError> {
    if x == y {
        return Ok(None);
    }
    let partition = bisimilarity(model, BisimKind::Ue)?;
    if partition.same_block(x, y) {
        return Ok(None);
    }
    let quotients = QuotientTable::new(model, &partition)?;
    for label in 0..model.label_count() {
        let qx = quotients.set(x, label);
        let qy = quotients.set(y, label);
        if !hull_equal(qx, qy).expect("equal dimensions") {
            let (valuation, gap) =
                separating_experiment(model, &partition, x, y, label, qx, qy);
            return Ok(Some(Experiment {
                label,
                valuation,
                gap,
            }));
        }
    }
    // Inequivalent states always differ on some label of the coarsest
    // partition's quotient, since merging their blocks would otherwise be a
    // coarser UE-bisimulation.
    unreachable!("states in different blocks of the coarsest UE partition must differ")
}

/// Validate a proposed distinguishing experiment: the valuation must be
/// constant on the blocks of the coarsest UE partition, and the returned
/// gap is |ue at x - ue at y| under the given label, exact.
pub fn experiment_gap(
    model: &Pnts,
    x: usize,
    y: usize,
    label: usize,
    valuation: &[Rat],
) -> Result<Rat, BisimError> {
    if valuation.len() != model.state_count() {
        return Err(BisimError::Model(ModelError::DimensionMismatch {
            left: valuation.len(),
            right: model.state_count(),
        }));
    }
    let partition = bisimilarity(model, BisimKind::Ue)?;
    for block in partition.blocks() {
        let v = &valuation[block[0]];
        for &s in &block[1..] {
            if &valuation[s] != v {
                return Err(BisimError::Model(ModelError::BadPartition));
            }
        }
    }
    let ue_x = upper_expectation(&state_generator_set(model, x, label), valuation)
        .expect("dimensions agree");
    let ue_y = upper_expectation(&state_generator_set(model, y, label), valuation)
        .expect("dimensions agree");
    Ok(rat_abs(&(ue_x - ue_y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;
    use crate::rational::{rat, rat_int};
    use crate::testgen::{up_merge_model, ue_merge_model};

    #[test]
    fn ue_merge_model_splits_standard_merges_ue() {
        let m = ue_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();

        let standard = bisimilarity(&m, BisimKind::Standard).unwrap();
        assert!(!standard.same_block(x, y));

        let ue = bisimilarity(&m, BisimKind::Ue).unwrap();
        assert!(ue.same_block(x, y));
        assert_eq!(ue.block_count(), 3);
    }

    #[test]
    fn up_merge_model_splits_ue_merges_up() {
        let m = up_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();

        let ue = bisimilarity(&m, BisimKind::Ue).unwrap();
        assert!(!ue.same_block(x, y));
        assert_eq!(ue.block_count(), 5);

        let up = bisimilarity(&m, BisimKind::Up).unwrap();
        assert!(up.same_block(x, y));
    }

    #[test]
    fn singleton_partition_is_always_a_bisimulation() {
        let m = up_merge_model();
        let p = Partition::singletons(m.state_count());
        assert!(check_ue_bisimulation(&m, &p).unwrap().is_none());
    }

    #[test]
    fn decider_output_passes_the_checker() {
        for m in [ue_merge_model(), up_merge_model()] {
            let p = bisimilarity(&m, BisimKind::Ue).unwrap();
            assert!(check_ue_bisimulation(&m, &p).unwrap().is_none());
        }
    }

    #[test]
    fn merging_inequivalent_states_fails_with_witness() {
        let m = up_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();
        let merged = bisimilarity(&m, BisimKind::Ue).unwrap().merge_blocks(x, y);
        let counter = check_ue_bisimulation(&m, &merged).unwrap().unwrap();
        assert!(counter.gap.is_positive());
        // the witness is constant on blocks of the merged candidate
        for block in merged.blocks() {
            for &s in block {
                assert_eq!(counter.witness[s], counter.witness[block[0]]);
            }
        }
    }

    #[test]
    fn distinguishing_experiment_for_up_merge_pair() {
        let m = up_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();
        let exp = distinguishing_experiment(&m, x, y).unwrap().unwrap();
        assert!(exp.gap.is_positive());
        let recomputed = experiment_gap(&m, x, y, exp.label, &exp.valuation).unwrap();
        assert_eq!(recomputed, exp.gap);
    }

    #[test]
    fn equivalent_states_have_no_experiment() {
        let m = ue_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();
        assert!(distinguishing_experiment(&m, x, y).unwrap().is_none());
        assert!(distinguishing_experiment(&m, x, x).unwrap().is_none());
    }

    #[test]
    fn worked_experiment_is_accepted_with_gap_one() {
        let m = up_merge_model();
        let x = m.state_index("x").unwrap();
        let y = m.state_index("y").unwrap();
        let mut f = vec![rat_int(0); m.state_count()];
        f[m.state_index("x1").unwrap()] = rat_int(60);
        f[m.state_index("x2").unwrap()] = rat_int(0);
        f[m.state_index("x3").unwrap()] = rat_int(50);
        let a = m.label_index("a").unwrap();
        assert_eq!(experiment_gap(&m, x, y, a, &f).unwrap(), rat_int(1));
    }

    #[test]
    fn kind_ordering_on_both_models() {
        for m in [ue_merge_model(), up_merge_model()] {
            let standard = bisimilarity(&m, BisimKind::Standard).unwrap();
            let ue = bisimilarity(&m, BisimKind::Ue).unwrap();
            let up = bisimilarity(&m, BisimKind::Up).unwrap();
            assert!(standard.refines(&ue));
            assert!(ue.refines(&up));
        }
    }

    #[test]
    fn props_split_the_initial_partition() {
        let mut m = Pnts::new(
            vec!["x".into(), "y".into()],
            vec![("a".into(), None)],
        )
        .unwrap();
        m.set_prop("p".into(), vec![rat_int(1), rat(1, 2)]).unwrap();
        let ue = bisimilarity(&m, BisimKind::Ue).unwrap();
        assert_eq!(ue.block_count(), 2);
    }

    #[test]
    fn quotient_by_ue_partition_merges_redundant_vertex() {
        let m = ue_merge_model();
        let ue = bisimilarity(&m, BisimKind::Ue).unwrap();
        let q = m.quotient(&ue).unwrap();
        assert_eq!(q.state_count(), 3);
        // the merged block unions its members' generators: the two mixing
        // extremes plus the (still distinct as a point) midpoint
        let xy = q.state_index("x+y").unwrap();
        let a = q.label_index("a").unwrap();
        assert_eq!(q.successors(xy, a).len(), 3);
    }

    #[test]
    fn terminal_states_split_from_live_ones() {
        let mut m = Pnts::new(
            vec!["x".into(), "y".into()],
            vec![("a".into(), None)],
        )
        .unwrap();
        m.add_transition(0, 0, Distribution::dirac(0, 2).unwrap())
            .unwrap();
        for kind in [BisimKind::Standard, BisimKind::Ue, BisimKind::Up] {
            let p = bisimilarity(&m, kind).unwrap();
            assert_eq!(p.block_count(), 2, "kind {kind:?}");
        }
    }
}
