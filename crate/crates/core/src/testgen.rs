//! Deterministic model generators: the two small worked examples used all
//! over the test suites, and seeded random models for property testing.
//!
//! Randomness comes from ChaCha8, a counter-based stream cipher RNG, so a
//! fixed seed reproduces the same models on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Distribution, Pnts};
use crate::rational::{rat, Rat};

/// Two states `x`, `y` over leaves `x1`, `x2`: `y` has an extra generator
/// that is the midpoint mixture of the other two, so standard bisimilarity
/// separates `x` from `y` while UE-bisimilarity merges them. The leaves are
/// told apart by an `a` self-loop on `x1` (`x2` is terminal).
pub fn ue_merge_model() -> Pnts {
    let mut m = Pnts::new(
        vec!["x".into(), "y".into(), "x1".into(), "x2".into()],
        vec![("a".into(), None)],
    )
    .unwrap();
    let n = 4;
    let mu1 = dist(&[(0, 1), (0, 1), (1, 5), (4, 5)]);
    let mu2 = dist(&[(0, 1), (0, 1), (4, 5), (1, 5)]);
    let mu3 = dist(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
    for d in [&mu1, &mu2] {
        m.add_transition(0, 0, d.clone()).unwrap();
    }
    for d in [&mu1, &mu2, &mu3] {
        m.add_transition(1, 0, d.clone()).unwrap();
    }
    m.add_transition(2, 0, Distribution::dirac(2, n).unwrap())
        .unwrap();
    m
}

/// Two states `x`, `y` over leaves `x1`, `x2`, `x3`: `y` has an extra
/// generator outside the hull of the other two, so UE-bisimilarity
/// separates `x` from `y`, yet their upper-probability functionals agree on
/// every event, so UP-bisimilarity merges them. Leaves are told apart by an
/// `a` self-loop on `x1` and a `b` self-loop on `x2` (`x3` is terminal).
pub fn up_merge_model() -> Pnts {
    let mut m = Pnts::new(
        vec![
            "x".into(),
            "y".into(),
            "x1".into(),
            "x2".into(),
            "x3".into(),
        ],
        vec![("a".into(), None), ("b".into(), None)],
    )
    .unwrap();
    let n = 5;
    let mu1 = dist(&[(0, 1), (0, 1), (3, 10), (3, 10), (2, 5)]);
    let mu2 = dist(&[(0, 1), (0, 1), (1, 2), (2, 5), (1, 10)]);
    let mu3 = dist(&[(0, 1), (0, 1), (2, 5), (3, 10), (3, 10)]);
    for d in [&mu1, &mu2] {
        m.add_transition(0, 0, d.clone()).unwrap();
    }
    for d in [&mu1, &mu2, &mu3] {
        m.add_transition(1, 0, d.clone()).unwrap();
    }
    m.add_transition(2, 0, Distribution::dirac(2, n).unwrap())
        .unwrap();
    m.add_transition(3, 1, Distribution::dirac(3, n).unwrap())
        .unwrap();
    m
}

fn dist(entries: &[(i64, i64)]) -> Distribution {
    Distribution::new(
        entries
            .iter()
            .map(|&(n, d)| rat(n, d))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Shape parameters for random models.
#[derive(Debug, Clone)]
pub struct RandomModelSpec {
    pub max_states: usize,
    pub labels: usize,
    pub max_generators: usize,
    pub max_denominator: u64,
    /// Chance that a (state, label) pair has any transitions at all.
    pub live_probability: f64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        RandomModelSpec {
            max_states: 4,
            labels: 2,
            max_generators: 3,
            max_denominator: 6,
            live_probability: 0.7,
        }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random model with the given shape, deterministic in the RNG state.
pub fn random_model(rng: &mut ChaCha8Rng, spec: &RandomModelSpec) -> Pnts {
    let n = rng.random_range(1..=spec.max_states);
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let labels = (0..spec.labels)
        .map(|i| (label_name(i), None))
        .collect();
    let mut m = Pnts::new(names, labels).unwrap();
    for state in 0..n {
        for label in 0..spec.labels {
            if !rng.random_bool(spec.live_probability) {
                continue;
            }
            let count = rng.random_range(1..=spec.max_generators);
            for _ in 0..count {
                let d = random_distribution(rng, n, spec.max_denominator);
                m.add_transition(state, label, d).unwrap();
            }
        }
    }
    m
}

fn label_name(i: usize) -> String {
    const NAMES: [&str; 4] = ["a", "b", "c", "d"];
    if i < NAMES.len() {
        NAMES[i].to_string()
    } else {
        format!("l{i}")
    }
}

/// A random distribution with denominator at most `max_denominator`,
/// sampled by cutting the denominator into nonnegative integer parts.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize, max_denominator: u64) -> Distribution {
    let den = rng.random_range(1..=max_denominator) as i64;
    let mut cuts: Vec<i64> = (0..n - 1).map(|_| rng.random_range(0..=den)).collect();
    cuts.push(0);
    cuts.push(den);
    cuts.sort_unstable();
    let probs = cuts
        .windows(2)
        .map(|w| rat(w[1] - w[0], den))
        .collect::<Vec<_>>();
    Distribution::new(probs).unwrap()
}

/// A random rational valuation with entries `num/den`, `num` drawn from
/// `lo..=hi` and `den` from `1..=max_denominator`.
pub fn random_valuation(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_denominator: u64,
    lo: i64,
    hi: i64,
) -> Vec<Rat> {
    (0..n)
        .map(|_| {
            let den = rng.random_range(1..=max_denominator) as i64;
            let num = rng.random_range(lo * den..=hi * den);
            rat(num, den)
        })
        .collect()
}

/// A random plain transition system as a successor-set table.
pub fn random_nts(rng: &mut ChaCha8Rng, max_states: usize, edge_probability: f64) -> Vec<Vec<usize>> {
    let n = rng.random_range(1..=max_states);
    (0..n)
        .map(|_| {
            (0..n)
                .filter(|_| rng.random_bool(edge_probability))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn worked_models_are_well_formed() {
        let m1 = ue_merge_model();
        assert_eq!(m1.state_count(), 4);
        assert_eq!(m1.successors(1, 0).len(), 3);
        let m2 = up_merge_model();
        assert_eq!(m2.state_count(), 5);
        assert_eq!(m2.successors(0, 0).len(), 2);
        assert!(m2.successors(4, 0).is_empty());
    }

    #[test]
    fn random_distributions_are_normalized() {
        let mut rng = rng_for(7);
        for _ in 0..200 {
            let d = random_distribution(&mut rng, 4, 6);
            let sum: Rat = d.probs().iter().sum();
            assert!(sum.is_one());
        }
    }

    #[test]
    fn fixed_seed_reproduces_models() {
        let spec = RandomModelSpec::default();
        let a = random_model(&mut rng_for(42), &spec);
        let b = random_model(&mut rng_for(42), &spec);
        assert_eq!(a, b);
    }
}
