//! Finite labeled probabilistic nondeterministic transition systems (PNTS)
//! over exact rationals, together with distributions, partitions, quotients,
//! products and the embeddings of plain transition systems and Markov chains.
//!
//! A PNTS maps each (state, label) pair to a finite list of probability
//! distributions over states. The list is kept duplicate-free and sorted so
//! that model equality is canonical. Transition lists stand for their closed
//! convex hulls throughout; the hulls themselves are never materialized.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("distribution entries must be nonnegative (entry {index} is {value})")]
    NegativeProbability { index: usize, value: String },
    #[error("distribution entries sum to {sum}, expected 1")]
    BadTotalMass { sum: String },
    #[error("state index {index} out of range for {len} states")]
    StateOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("duplicate label name `{0}`")]
    DuplicateLabel(String),
    #[error("label `{0}` declares an invalid complement")]
    BadComplement(String),
    #[error("blocks do not partition the state set")]
    BadPartition,
    #[error("proposition `{name}` takes value {value} outside [0,1] at state {state}")]
    PropOutOfRange {
        name: String,
        state: String,
        value: String,
    },
    #[error("pairing target {index} out of range for {len} states")]
    PairingOutOfRange { index: usize, len: usize },
}

/// A probability distribution over the states of a model, as a dense vector
/// of exact rationals that are nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    probs: Vec<Rat>,
}

impl Distribution {
    pub fn new(probs: Vec<Rat>) -> Result<Self, ModelError> {
        let mut sum = Rat::zero();
        for (index, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(ModelError::NegativeProbability {
                    index,
                    value: format_rat(p),
                });
            }
            sum += p;
        }
        if !sum.is_one() {
            return Err(ModelError::BadTotalMass {
                sum: format_rat(&sum),
            });
        }
        Ok(Distribution { probs })
    }

    /// The Dirac distribution concentrated on `state`.
    pub fn dirac(state: usize, len: usize) -> Result<Self, ModelError> {
        if state >= len {
            return Err(ModelError::StateOutOfRange { index: state, len });
        }
        let mut probs = vec![Rat::zero(); len];
        probs[state] = Rat::one();
        Ok(Distribution { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, state: usize) -> &Rat {
        &self.probs[state]
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| i)
    }

    /// Is this a Dirac distribution, and on which state?
    pub fn as_dirac(&self) -> Option<usize> {
        let mut sup = self.support();
        match (sup.next(), sup.next()) {
            (Some(s), None) => Some(s),
            _ => None,
        }
    }

    /// Expected value of `f` under this distribution: sum of `prob(x) * f(x)`.
    pub fn expected_value(&self, f: &[Rat]) -> Result<Rat, ModelError> {
        if f.len() != self.probs.len() {
            return Err(ModelError::DimensionMismatch {
                left: self.probs.len(),
                right: f.len(),
            });
        }
        let mut acc = Rat::zero();
        for (p, v) in self.probs.iter().zip(f) {
            if !p.is_zero() {
                acc += p * v;
            }
        }
        Ok(acc)
    }

    /// Push the distribution through a partition's quotient map: block `b`
    /// receives the total mass of its member states.
    pub fn quotient(&self, partition: &Partition) -> Result<Distribution, ModelError> {
        if partition.state_count() != self.probs.len() {
            return Err(ModelError::DimensionMismatch {
                left: self.probs.len(),
                right: partition.state_count(),
            });
        }
        let mut probs = vec![Rat::zero(); partition.block_count()];
        for (state, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                probs[partition.block_of(state)] += p;
            }
        }
        Ok(Distribution { probs })
    }

    /// Product measure pushed through a pairing map: the image state
    /// `pairing(x, y)` receives `self(x) * other(y)`.
    pub fn product(
        &self,
        other: &Distribution,
        target_len: usize,
        pairing: impl Fn(usize, usize) -> usize,
    ) -> Result<Distribution, ModelError> {
        let mut probs = vec![Rat::zero(); target_len];
        for x in self.support() {
            for y in other.support() {
                let z = pairing(x, y);
                if z >= target_len {
                    return Err(ModelError::PairingOutOfRange {
                        index: z,
                        len: target_len,
                    });
                }
                probs[z] += self.prob(x) * other.prob(y);
            }
        }
        Distribution::new(probs)
    }
}

/// An equivalence relation on states, stored as disjoint nonempty blocks
/// covering the state set. Blocks are kept sorted by least member so that
/// partitions are canonical and diffable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// The total partition: all states in one block.
    pub fn total(state_count: usize) -> Partition {
        if state_count == 0 {
            return Partition {
                blocks: Vec::new(),
                block_of: Vec::new(),
            };
        }
        Partition {
            blocks: vec![(0..state_count).collect()],
            block_of: vec![0; state_count],
        }
    }

    /// The identity partition: every state alone.
    pub fn singletons(state_count: usize) -> Partition {
        Partition {
            blocks: (0..state_count).map(|s| vec![s]).collect(),
            block_of: (0..state_count).collect(),
        }
    }

    /// Build from explicit blocks, validating disjointness and coverage.
    pub fn from_blocks(blocks: Vec<Vec<usize>>, state_count: usize) -> Result<Partition, ModelError> {
        let mut block_of = vec![usize::MAX; state_count];
        let mut canonical: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.is_empty() {
                return Err(ModelError::BadPartition);
            }
            let mut b = block;
            b.sort_unstable();
            b.dedup();
            canonical.push(b);
        }
        canonical.sort_by_key(|b| b[0]);
        for (idx, block) in canonical.iter().enumerate() {
            for &s in block {
                if s >= state_count || block_of[s] != usize::MAX {
                    return Err(ModelError::BadPartition);
                }
                block_of[s] = idx;
            }
        }
        if block_of.iter().any(|&b| b == usize::MAX) {
            return Err(ModelError::BadPartition);
        }
        Ok(Partition {
            blocks: canonical,
            block_of,
        })
    }

    /// Group states by an arbitrary key; states with equal keys share a block.
    pub fn group_by_key<K: Ord>(state_count: usize, mut key: impl FnMut(usize) -> K) -> Partition {
        let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for s in 0..state_count {
            groups.entry(key(s)).or_default().push(s);
        }
        Partition::from_blocks(groups.into_values().collect(), state_count)
            .expect("grouping always yields a partition")
    }

    pub fn state_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &[usize] {
        &self.blocks[index]
    }

    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.block_of[x] == self.block_of[y]
    }

    /// Does every block of `self` sit inside a block of `coarser`?
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.block_of.len() == coarser.block_of.len()
            && self.blocks.iter().all(|block| {
                let target = coarser.block_of(block[0]);
                block.iter().all(|&s| coarser.block_of(s) == target)
            })
    }

    /// Merge the blocks containing `x` and `y`, leaving other blocks intact.
    pub fn merge_blocks(&self, x: usize, y: usize) -> Partition {
        let (bx, by) = (self.block_of[x], self.block_of[y]);
        if bx == by {
            return self.clone();
        }
        let mut blocks = Vec::with_capacity(self.blocks.len() - 1);
        let mut merged: Vec<usize> = Vec::new();
        for (idx, block) in self.blocks.iter().enumerate() {
            if idx == bx || idx == by {
                merged.extend_from_slice(block);
            } else {
                blocks.push(block.clone());
            }
        }
        blocks.push(merged);
        Partition::from_blocks(blocks, self.state_count()).expect("merge preserves partition")
    }
}

/// Label kinds: plain names, co-names (for CCS-style communication), and
/// the silent label tau. Complementation swaps a name with its co-name and
/// is undefined on tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKind {
    Plain,
    CoName,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub name: String,
    pub kind: LabelKind,
    /// Index of the complementary label, when one is declared.
    pub complement: Option<usize>,
}

/// The name reserved for the silent label.
pub const TAU: &str = "tau";

/// A finite labeled PNTS with optional `[0,1]`-valued atomic propositions.
#[derive(Debug, Clone, PartialEq)]
pub struct Pnts {
    state_names: Vec<String>,
    labels: Vec<Label>,
    /// transitions[state][label] = sorted duplicate-free generator list
    transitions: Vec<Vec<Vec<Distribution>>>,
    props: BTreeMap<String, Vec<Rat>>,
}

impl Pnts {
    pub fn new(state_names: Vec<String>, label_names: Vec<(String, Option<String>)>) -> Result<Self, ModelError> {
        let mut seen = BTreeMap::new();
        for (i, name) in state_names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        let mut labels: Vec<Label> = Vec::with_capacity(label_names.len());
        let mut by_name = BTreeMap::new();
        for (name, _) in &label_names {
            let kind = if name == TAU {
                LabelKind::Tau
            } else {
                LabelKind::Plain
            };
            if by_name.insert(name.clone(), labels.len()).is_some() {
                return Err(ModelError::DuplicateLabel(name.clone()));
            }
            labels.push(Label {
                name: name.clone(),
                kind,
                complement: None,
            });
        }
        for (name, co) in &label_names {
            if let Some(co_name) = co {
                let idx = by_name[name];
                let co_idx = *by_name
                    .get(co_name)
                    .ok_or_else(|| ModelError::BadComplement(name.clone()))?;
                if co_idx == idx
                    || labels[idx].kind == LabelKind::Tau
                    || labels[co_idx].kind == LabelKind::Tau
                {
                    return Err(ModelError::BadComplement(name.clone()));
                }
                match labels[co_idx].complement {
                    None => {
                        labels[idx].complement = Some(co_idx);
                        labels[co_idx].complement = Some(idx);
                        labels[co_idx].kind = LabelKind::CoName;
                    }
                    Some(back) if back == idx => {
                        labels[idx].complement = Some(co_idx);
                    }
                    Some(_) => return Err(ModelError::BadComplement(name.clone())),
                }
            }
        }
        let n = state_names.len();
        let l = labels.len();
        Ok(Pnts {
            state_names,
            labels,
            transitions: vec![vec![Vec::new(); l]; n],
            props: BTreeMap::new(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.state_names[state]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_name(&self, label: usize) -> &str {
        &self.labels[label].name
    }

    pub fn state_index(&self, name: &str) -> Result<usize, ModelError> {
        self.state_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn label_index(&self, name: &str) -> Result<usize, ModelError> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelError::UnknownLabel(name.to_string()))
    }

    pub fn tau_index(&self) -> Option<usize> {
        self.labels.iter().position(|l| l.kind == LabelKind::Tau)
    }

    /// Add one accessible distribution under a label. Duplicates are dropped
    /// and the generator list is kept in lexicographic order.
    pub fn add_transition(
        &mut self,
        state: usize,
        label: usize,
        dist: Distribution,
    ) -> Result<(), ModelError> {
        if state >= self.state_count() {
            return Err(ModelError::StateOutOfRange {
                index: state,
                len: self.state_count(),
            });
        }
        if dist.len() != self.state_count() {
            return Err(ModelError::DimensionMismatch {
                left: dist.len(),
                right: self.state_count(),
            });
        }
        let list = &mut self.transitions[state][label];
        match list.binary_search(&dist) {
            Ok(_) => {}
            Err(pos) => list.insert(pos, dist),
        }
        Ok(())
    }

    /// The generator list accessible from `state` under `label`.
    pub fn successors(&self, state: usize, label: usize) -> &[Distribution] {
        &self.transitions[state][label]
    }

    pub fn prop_names(&self) -> impl Iterator<Item = &String> {
        self.props.keys()
    }

    pub fn prop(&self, name: &str) -> Option<&[Rat]> {
        self.props.get(name).map(|v| v.as_slice())
    }

    pub fn props(&self) -> &BTreeMap<String, Vec<Rat>> {
        &self.props
    }

    /// Install an atomic proposition as a `[0,1]`-valued valuation.
    pub fn set_prop(&mut self, name: String, values: Vec<Rat>) -> Result<(), ModelError> {
        if values.len() != self.state_count() {
            return Err(ModelError::DimensionMismatch {
                left: values.len(),
                right: self.state_count(),
            });
        }
        for (state, v) in values.iter().enumerate() {
            if v.is_negative() || v > &Rat::one() {
                return Err(ModelError::PropOutOfRange {
                    name,
                    state: self.state_names[state].clone(),
                    value: format_rat(v),
                });
            }
        }
        self.props.insert(name, values);
        Ok(())
    }

    /// Quotient the model by a partition: states become blocks, and each
    /// block's generators are the quotients of its members' generators,
    /// deduplicated.
    pub fn quotient(&self, partition: &Partition) -> Result<Pnts, ModelError> {
        if partition.state_count() != self.state_count() {
            return Err(ModelError::DimensionMismatch {
                left: partition.state_count(),
                right: self.state_count(),
            });
        }
        let names = partition
            .blocks()
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|&s| self.state_names[s].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let label_spec = self
            .labels
            .iter()
            .map(|l| (l.name.clone(), l.complement.map(|c| self.labels[c].name.clone())))
            .collect();
        let mut out = Pnts::new(names, label_spec)?;
        for (b, block) in partition.blocks().iter().enumerate() {
            for &state in block {
                for label in 0..self.label_count() {
                    for dist in self.successors(state, label) {
                        out.add_transition(b, label, dist.quotient(partition)?)?;
                    }
                }
            }
        }
        // Propositions survive only when constant on blocks, which holds for
        // every partition refined by the proposition values.
        for (name, values) in &self.props {
            let mut block_values = vec![None::<Rat>; partition.block_count()];
            let mut constant = true;
            'outer: for (b, block) in partition.blocks().iter().enumerate() {
                for &s in block {
                    match &block_values[b] {
                        None => block_values[b] = Some(values[s].clone()),
                        Some(v) if *v == values[s] => {}
                        Some(_) => {
                            constant = false;
                            break 'outer;
                        }
                    }
                }
            }
            if constant {
                out.set_prop(
                    name.clone(),
                    block_values.into_iter().map(|v| v.unwrap()).collect(),
                )?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Pnts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.state_names.join(", "))?;
        for (s, per_label) in self.transitions.iter().enumerate() {
            for (l, dists) in per_label.iter().enumerate() {
                for d in dists {
                    let entries: Vec<String> = d
                        .support()
                        .map(|t| format!("{}:{}", self.state_names[t], format_rat(d.prob(t))))
                        .collect();
                    writeln!(
                        f,
                        "  {} -{}-> {{{}}}",
                        self.state_names[s],
                        self.labels[l].name,
                        entries.join(", ")
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Embed a plain nondeterministic transition system: each state's successor
/// set becomes the set of Dirac distributions on those successors, standing
/// for its closed convex hull.
pub fn embed_nts(successors: &[Vec<usize>], label: &str) -> Result<Pnts, ModelError> {
    let n = successors.len();
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let mut m = Pnts::new(names, vec![(label.to_string(), None)])?;
    for (state, succ) in successors.iter().enumerate() {
        for &t in succ {
            m.add_transition(state, 0, Distribution::dirac(t, n)?)?;
        }
    }
    Ok(m)
}

/// Embed a Markov process: terminal states get no transitions, the rest a
/// singleton generator list.
pub fn embed_mp(rows: &[Option<Distribution>], label: &str) -> Result<Pnts, ModelError> {
    let n = rows.len();
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let mut m = Pnts::new(names, vec![(label.to_string(), None)])?;
    for (state, row) in rows.iter().enumerate() {
        if let Some(dist) = row {
            m.add_transition(state, 0, dist.clone())?;
        }
    }
    Ok(m)
}
