//! Finite concrete coalgebras and direct fixpoint semantics.
//!
//! [`semantics_eval`] computes extensions by structural recursion with
//! Kleene iteration for fixpoints, evaluating every modal clause in exact
//! arithmetic. This is the production model checker that re-verifies every
//! extracted model.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::formula::{Formula, Logic, ModalKind, ModalOp};
use crate::Error;

pub type Valuation = BTreeMap<String, BTreeSet<usize>>;

/// One component structure over the shared state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoalgebraPart {
    Relational {
        succ: Vec<BTreeSet<usize>>,
        atoms: Vec<BTreeSet<String>>,
    },
    Graded {
        weight: Vec<BTreeMap<usize, BigInt>>,
        atoms: Vec<BTreeSet<String>>,
    },
    Probabilistic {
        dist: Vec<BTreeMap<usize, BigRational>>,
        atoms: Vec<BTreeSet<String>>,
    },
}

impl CoalgebraPart {
    pub fn logic(&self) -> Logic {
        match self {
            CoalgebraPart::Relational { .. } => Logic::Relational,
            CoalgebraPart::Graded { .. } => Logic::Graded,
            CoalgebraPart::Probabilistic { .. } => Logic::Probabilistic,
        }
    }
}

/// A finite concrete model: a tuple of component structures over a shared
/// state set (a single component outside fusion runs) plus a root state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalgebra {
    pub num_states: usize,
    pub root: usize,
    pub parts: Vec<CoalgebraPart>,
}

impl Coalgebra {
    /// Structural invariants: indices in range, non-negative weights, and
    /// probability rows summing to exactly one.
    pub fn validate(&self) -> Result<(), Error> {
        if self.root >= self.num_states {
            return Err(Error::Model("root state out of range".into()));
        }
        for part in &self.parts {
            match part {
                CoalgebraPart::Relational { succ, atoms } => {
                    if succ.len() != self.num_states || atoms.len() != self.num_states {
                        return Err(Error::Model("relational part has wrong arity".into()));
                    }
                    for s in succ {
                        if s.iter().any(|&t| t >= self.num_states) {
                            return Err(Error::Model("successor out of range".into()));
                        }
                    }
                }
                CoalgebraPart::Graded { weight, atoms } => {
                    if weight.len() != self.num_states || atoms.len() != self.num_states {
                        return Err(Error::Model("graded part has wrong arity".into()));
                    }
                    for row in weight {
                        for (&t, w) in row {
                            if t >= self.num_states {
                                return Err(Error::Model("successor out of range".into()));
                            }
                            if w.is_negative() {
                                return Err(Error::Model("negative multiplicity".into()));
                            }
                        }
                    }
                }
                CoalgebraPart::Probabilistic { dist, atoms } => {
                    if dist.len() != self.num_states || atoms.len() != self.num_states {
                        return Err(Error::Model("probabilistic part has wrong arity".into()));
                    }
                    for row in dist {
                        let mut total = BigRational::zero();
                        for (&t, w) in row {
                            if t >= self.num_states {
                                return Err(Error::Model("successor out of range".into()));
                            }
                            if w.is_negative() {
                                return Err(Error::Model("negative probability".into()));
                            }
                            total += w;
                        }
                        if !total.is_one() {
                            return Err(Error::Model(format!(
                                "probability row sums to {total}, not 1"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn part_for(&self, logic: Logic) -> Option<&CoalgebraPart> {
        self.parts.iter().find(|p| p.logic() == logic)
    }

    /// Does `ξ(x) ∈ [[op]](args...)` hold, with argument extensions given as
    /// state sets?
    pub fn modal_holds(&self, x: usize, op: &ModalOp, args: &[&BTreeSet<usize>]) -> bool {
        let part = self
            .part_for(op.logic)
            .unwrap_or_else(|| panic!("model lacks a {} component", op.logic));
        match (part, &op.kind) {
            (CoalgebraPart::Relational { succ, .. }, ModalKind::Diamond) => {
                succ[x].iter().any(|t| args[0].contains(t))
            }
            (CoalgebraPart::Relational { succ, .. }, ModalKind::Box) => {
                succ[x].iter().all(|t| args[0].contains(t))
            }
            (CoalgebraPart::Relational { atoms, .. }, ModalKind::Atom(a)) => {
                atoms[x].contains(a)
            }
            (CoalgebraPart::Relational { atoms, .. }, ModalKind::NegAtom(a)) => {
                !atoms[x].contains(a)
            }
            (CoalgebraPart::Graded { weight, .. }, ModalKind::DiaPoly(p)) => {
                let vals: Vec<BigRational> = args
                    .iter()
                    .map(|set| {
                        let m: BigInt = weight[x]
                            .iter()
                            .filter(|(t, _)| set.contains(t))
                            .map(|(_, w)| w.clone())
                            .sum();
                        BigRational::from_integer(m)
                    })
                    .collect();
                p.eval(&vals).is_positive()
            }
            (CoalgebraPart::Graded { weight, .. }, ModalKind::BoxPoly(p)) => {
                let vals: Vec<BigRational> = args
                    .iter()
                    .map(|set| {
                        let m: BigInt = weight[x]
                            .iter()
                            .filter(|(t, _)| !set.contains(t))
                            .map(|(_, w)| w.clone())
                            .sum();
                        BigRational::from_integer(m)
                    })
                    .collect();
                !p.eval(&vals).is_positive()
            }
            (CoalgebraPart::Graded { atoms, .. }, ModalKind::Atom(a)) => atoms[x].contains(a),
            (CoalgebraPart::Graded { atoms, .. }, ModalKind::NegAtom(a)) => !atoms[x].contains(a),
            (CoalgebraPart::Probabilistic { dist, .. }, ModalKind::DiaPoly(p)) => {
                let vals: Vec<BigRational> = args
                    .iter()
                    .map(|set| {
                        dist[x]
                            .iter()
                            .filter(|(t, _)| set.contains(t))
                            .map(|(_, w)| w.clone())
                            .sum()
                    })
                    .collect();
                p.eval(&vals).is_positive()
            }
            (CoalgebraPart::Probabilistic { dist, .. }, ModalKind::BoxPoly(p)) => {
                let vals: Vec<BigRational> = args
                    .iter()
                    .map(|set| {
                        dist[x]
                            .iter()
                            .filter(|(t, _)| !set.contains(t))
                            .map(|(_, w)| w.clone())
                            .sum()
                    })
                    .collect();
                !p.eval(&vals).is_positive()
            }
            (CoalgebraPart::Probabilistic { atoms, .. }, ModalKind::Atom(a)) => {
                atoms[x].contains(a)
            }
            (CoalgebraPart::Probabilistic { atoms, .. }, ModalKind::NegAtom(a)) => {
                !atoms[x].contains(a)
            }
            (part, kind) => panic!("operator {kind:?} against {} component", part.logic()),
        }
    }
}

/// Extension of `phi` in the model under `valuation` (which must cover the
/// free variables). Fixpoints are computed by Kleene iteration from the
/// empty (μ) or full (ν) set.
pub fn semantics_eval(model: &Coalgebra, phi: &Formula, valuation: &Valuation) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..model.num_states).collect();
    match phi {
        Formula::Top => all,
        Formula::Bot => BTreeSet::new(),
        Formula::Var(x) => valuation
            .get(x)
            .unwrap_or_else(|| panic!("unbound variable {x}"))
            .clone(),
        Formula::NegVar(x) => {
            let v = valuation
                .get(x)
                .unwrap_or_else(|| panic!("unbound variable {x}"));
            all.difference(v).copied().collect()
        }
        Formula::And(l, r) => {
            let a = semantics_eval(model, l, valuation);
            let b = semantics_eval(model, r, valuation);
            a.intersection(&b).copied().collect()
        }
        Formula::Or(l, r) => {
            let a = semantics_eval(model, l, valuation);
            let b = semantics_eval(model, r, valuation);
            a.union(&b).copied().collect()
        }
        Formula::Modal(op, args) => {
            let arg_sets: Vec<BTreeSet<usize>> = args
                .iter()
                .map(|a| semantics_eval(model, a, valuation))
                .collect();
            let refs: Vec<&BTreeSet<usize>> = arg_sets.iter().collect();
            (0..model.num_states)
                .filter(|&x| model.modal_holds(x, op, &refs))
                .collect()
        }
        Formula::Mu(x, body) => {
            let mut cur = BTreeSet::new();
            loop {
                let mut val = valuation.clone();
                val.insert(x.clone(), cur.clone());
                let next = semantics_eval(model, body, &val);
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
        Formula::Nu(x, body) => {
            let mut cur = all;
            loop {
                let mut val = valuation.clone();
                val.insert(x.clone(), cur.clone());
                let next = semantics_eval(model, body, &val);
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
        Formula::Not(_) => panic!("semantics_eval requires negation normal form"),
    }
}
