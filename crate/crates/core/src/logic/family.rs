//! Deterministic formula enumeration, used by the semantic kernel and the
//! formula-based metric estimator.
//!
//! The stream is organized in rounds of growing modal depth. Round one
//! starts from label-presence atoms (`<l>1` and their complements) and the
//! model's propositions; each later round wraps a window of the previous
//! round's formulas in diamonds and recombines. Within a round the order
//! is: atoms, weighted two-term combinations (coefficient tuples drawn from
//! a Stern-Brocot prefix, tuple-major so small coefficients come first),
//! scalar multiples, then joins and meets. Everything is deterministic
//! given the model's labels and propositions, so a budget prefix is stable
//! across runs.

use std::collections::BTreeSet;

use num_traits::One;

use crate::model::Pnts;
use crate::rational::Rat;

use super::Formula;

/// Level-order prefix of the Stern-Brocot tree: 1, 1/2, 2, 1/3, 2/3, 3/2,
/// 3, 1/4, ...; every positive rational appears exactly once.
pub fn stern_brocot(count: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(count);
    // queue of (left numerator/denominator, right numerator/denominator)
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(((0i64, 1i64), (1i64, 0i64)));
    while out.len() < count {
        let ((ln, ld), (rn, rd)) = queue.pop_front().expect("queue never empties");
        let (mn, md) = (ln + rn, ld + rd);
        out.push(crate::rational::rat(mn, md));
        queue.push_back(((ln, ld), (mn, md)));
        queue.push_back(((mn, md), (rn, rd)));
    }
    out
}

/// Signed coefficient prefix for the Riesz-space family.
fn signed_scalars(count: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(count);
    for q in stern_brocot(count) {
        if out.len() >= count {
            break;
        }
        out.push(q.clone());
        if out.len() >= count {
            break;
        }
        out.push(-q);
    }
    out
}

/// Coefficient prefix inside [0,1] for the unit-interval family.
fn unit_scalars(count: usize) -> Vec<Rat> {
    stern_brocot(count * 4)
        .into_iter()
        .filter(|q| q <= &Rat::one())
        .take(count)
        .collect()
}

const ROUND_CAP: usize = 256;
const WRAP_WINDOW: usize = 128;
const SIGNED_COUNT: usize = 13;
const UNIT_COUNT: usize = 8;

struct Stream {
    out: Vec<Formula>,
    seen: BTreeSet<String>,
    budget: usize,
}

impl Stream {
    fn new(budget: usize) -> Stream {
        Stream {
            out: Vec::new(),
            seen: BTreeSet::new(),
            budget,
        }
    }

    fn full(&self) -> bool {
        self.out.len() >= self.budget
    }

    /// Emit unless a syntactic duplicate; returns the formula's index.
    fn emit(&mut self, f: Formula) -> Option<usize> {
        if self.full() {
            return None;
        }
        if self.seen.insert(f.to_string()) {
            self.out.push(f);
            Some(self.out.len() - 1)
        } else {
            None
        }
    }
}

fn label_atom(label: &str) -> Formula {
    Formula::diamond(label, Formula::One)
}

/// Riesz-logic family: linear combinations over label-presence atoms and
/// their modal wraps.
pub fn r_family(model: &Pnts, budget: usize) -> Vec<Formula> {
    let labels: Vec<String> = model.labels().iter().map(|l| l.name.clone()).collect();
    let props: Vec<String> = model.prop_names().cloned().collect();
    let scalars = signed_scalars(SIGNED_COUNT);

    let mut atoms: Vec<Formula> = vec![Formula::One];
    atoms.extend(props.iter().map(|p| Formula::Prop(p.clone())));
    atoms.extend(labels.iter().map(|l| label_atom(l)));
    for l in &labels {
        atoms.push(Formula::plus(
            Formula::One,
            Formula::scale(crate::rational::rat_int(-1), label_atom(l)),
        ));
    }
    for (i, l1) in labels.iter().enumerate() {
        for l2 in labels.iter().skip(i + 1) {
            atoms.push(Formula::plus(
                Formula::plus(
                    Formula::One,
                    Formula::scale(crate::rational::rat_int(-1), label_atom(l1)),
                ),
                Formula::scale(crate::rational::rat_int(-1), label_atom(l2)),
            ));
        }
    }

    let mut stream = Stream::new(budget);
    run_rounds(&mut stream, atoms, &labels, &scalars, Combine::Plus);
    stream.out
}

/// Lukasiewicz-fragment family over [0,1]: truncated-sum combinations and
/// negations over label-presence atoms and their modal wraps.
pub fn unit_family(model: &Pnts, budget: usize) -> Vec<Formula> {
    let labels: Vec<String> = model.labels().iter().map(|l| l.name.clone()).collect();
    let props: Vec<String> = model.prop_names().cloned().collect();
    let scalars = unit_scalars(UNIT_COUNT);

    let mut atoms: Vec<Formula> = vec![Formula::One, Formula::Zero];
    atoms.extend(props.iter().map(|p| Formula::Prop(p.clone())));
    atoms.extend(labels.iter().map(|l| label_atom(l)));
    for l in &labels {
        atoms.push(Formula::neg(label_atom(l)));
    }
    for (i, l1) in labels.iter().enumerate() {
        for l2 in labels.iter().skip(i + 1) {
            atoms.push(Formula::neg(Formula::oplus(label_atom(l1), label_atom(l2))));
        }
    }

    let mut stream = Stream::new(budget);
    run_rounds(&mut stream, atoms, &labels, &scalars, Combine::OPlus);
    stream.out
}

#[derive(Clone, Copy)]
enum Combine {
    Plus,
    OPlus,
}

impl Combine {
    fn apply(self, a: Formula, b: Formula) -> Formula {
        match self {
            Combine::Plus => Formula::plus(a, b),
            Combine::OPlus => Formula::oplus(a, b),
        }
    }

    fn negations(self) -> bool {
        matches!(self, Combine::OPlus)
    }
}

fn run_rounds(
    stream: &mut Stream,
    base_atoms: Vec<Formula>,
    labels: &[String],
    scalars: &[Rat],
    combine: Combine,
) {
    let mut atoms = base_atoms;
    while !stream.full() && !atoms.is_empty() {
        let round_start = stream.out.len();
        let cap = |s: &Stream| s.out.len() - round_start >= ROUND_CAP;

        for a in &atoms {
            if stream.full() || cap(stream) {
                break;
            }
            stream.emit(a.clone());
        }
        // weighted pair combinations, tuple-major so small coefficients
        // across all pairs precede large coefficients on any pair
        'combos: for q1 in scalars {
            for q2 in scalars {
                for i in 0..atoms.len() {
                    for j in (i + 1)..atoms.len() {
                        if stream.full() || cap(stream) {
                            break 'combos;
                        }
                        stream.emit(combine.apply(
                            Formula::scale(q1.clone(), atoms[i].clone()),
                            Formula::scale(q2.clone(), atoms[j].clone()),
                        ));
                    }
                }
            }
        }
        'scales: for q in scalars {
            if q.is_one() {
                continue;
            }
            for a in &atoms {
                if stream.full() || cap(stream) {
                    break 'scales;
                }
                stream.emit(Formula::scale(q.clone(), a.clone()));
            }
        }
        if combine.negations() {
            for a in &atoms {
                if stream.full() || cap(stream) {
                    break;
                }
                stream.emit(Formula::neg(a.clone()));
            }
        }
        'lattice: for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if stream.full() || cap(stream) {
                    break 'lattice;
                }
                stream.emit(Formula::join(atoms[i].clone(), atoms[j].clone()));
                if stream.full() || cap(stream) {
                    break 'lattice;
                }
                stream.emit(Formula::meet(atoms[i].clone(), atoms[j].clone()));
            }
        }

        // next round: diamond wraps of a window of this round's output
        let window = stream.out[round_start..]
            .iter()
            .take(WRAP_WINDOW)
            .cloned()
            .collect::<Vec<_>>();
        atoms = Vec::new();
        for f in &window {
            for l in labels {
                atoms.push(Formula::diamond(l, f.clone()));
            }
        }
        if stream.out.len() == round_start {
            break; // nothing new this round
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_kind, LogicKind};
    use crate::rational::rat;
    use crate::testgen::up_merge_model;

    #[test]
    fn stern_brocot_prefix_is_canonical() {
        let sb = stern_brocot(7);
        assert_eq!(
            sb,
            vec![
                rat(1, 1),
                rat(1, 2),
                rat(2, 1),
                rat(1, 3),
                rat(2, 3),
                rat(3, 2),
                rat(3, 1)
            ]
        );
    }

    #[test]
    fn families_are_deterministic_and_kind_valid() {
        let m = up_merge_model();
        let f1 = r_family(&m, 300);
        let f2 = r_family(&m, 300);
        assert_eq!(f1, f2);
        assert_eq!(f1.len(), 300);
        for f in &f1 {
            check_kind(f, LogicKind::R).expect("r family stays in kind r");
        }
        let u = unit_family(&m, 300);
        assert_eq!(u.len(), 300);
        for f in &u {
            check_kind(f, LogicKind::LUK).expect("unit family stays in Lukasiewicz kind");
        }
    }

    #[test]
    fn budget_prefixes_nest() {
        let m = up_merge_model();
        let small = r_family(&m, 50);
        let large = r_family(&m, 200);
        assert_eq!(&large[..50], &small[..]);
    }

    #[test]
    fn families_have_no_duplicates() {
        let m = up_merge_model();
        let f = unit_family(&m, 400);
        let mut texts: Vec<String> = f.iter().map(|x| x.to_string()).collect();
        texts.sort();
        texts.dedup();
        assert_eq!(texts.len(), f.len());
    }
}
