//! Seeded random generators for the property suites and the `selftest`
//! subcommand. Everything is driven by a caller-supplied ChaCha RNG so runs
//! are reproducible byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;

use crate::determinize::Npa;
use crate::formula::{Formula, Logic, ModalKind, ModalOp};
use crate::games::{Coalgebra, CoalgebraPart, ParityGame, Player};
use crate::onestep::{OneStepPair, OsLiteral};
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone)]
pub struct FormulaGenConfig {
    pub logic: Logic,
    pub max_len: usize,
    pub atoms: Vec<String>,
}

impl FormulaGenConfig {
    pub fn relational(max_len: usize) -> FormulaGenConfig {
        FormulaGenConfig {
            logic: Logic::Relational,
            max_len,
            atoms: vec!["p".into(), "q".into()],
        }
    }

    pub fn graded(max_len: usize) -> FormulaGenConfig {
        FormulaGenConfig {
            logic: Logic::Graded,
            max_len,
            atoms: vec!["p".into(), "q".into()],
        }
    }

    pub fn probabilistic(max_len: usize) -> FormulaGenConfig {
        FormulaGenConfig {
            logic: Logic::Probabilistic,
            max_len,
            atoms: vec!["p".into(), "q".into()],
        }
    }
}

/// A random closed formula in negation normal form (no surface negation,
/// variables only positive), of length at most `cfg.max_len`.
pub fn random_formula(rng: &mut impl Rng, cfg: &FormulaGenConfig) -> Formula {
    let mut var_counter = 0usize;
    gen_formula(rng, cfg, cfg.max_len.max(1), &mut Vec::new(), &mut var_counter)
}

fn gen_formula(
    rng: &mut impl Rng,
    cfg: &FormulaGenConfig,
    budget: usize,
    scope: &mut Vec<String>,
    var_counter: &mut usize,
) -> Formula {
    let leafish = budget <= 1;
    let choice = if leafish { rng.gen_range(0..4) } else { rng.gen_range(0..10) };
    match choice {
        0 => Formula::Top,
        1 => Formula::Bot,
        2 => {
            let name = &cfg.atoms[rng.gen_range(0..cfg.atoms.len())];
            let f = Formula::atom(cfg.logic, name.clone());
            if rng.gen_bool(0.3) {
                Formula::Modal(
                    ModalOp {
                        logic: cfg.logic,
                        kind: ModalKind::NegAtom(name.clone()),
                    },
                    vec![],
                )
            } else {
                f
            }
        }
        3 => {
            if scope.is_empty() {
                Formula::Top
            } else {
                Formula::Var(scope[rng.gen_range(0..scope.len())].clone())
            }
        }
        4 | 5 => {
            let left = budget.saturating_sub(1) / 2;
            let l = gen_formula(rng, cfg, left.max(1), scope, var_counter);
            let r = gen_formula(rng, cfg, left.max(1), scope, var_counter);
            if choice == 4 {
                Formula::and(l, r)
            } else {
                Formula::or(l, r)
            }
        }
        6 | 7 => {
            let arg = gen_formula(rng, cfg, budget - 1, scope, var_counter);
            let diamond = choice == 6;
            match cfg.logic {
                Logic::Relational => {
                    if diamond {
                        Formula::diamond(arg)
                    } else {
                        Formula::boxm(arg)
                    }
                }
                Logic::Graded => {
                    let index = BigRational::from_integer(BigInt::from(rng.gen_range(0..=2)));
                    let p = Polynomial::linear_minus(index);
                    let kind = if diamond {
                        ModalKind::DiaPoly(p)
                    } else {
                        ModalKind::BoxPoly(p)
                    };
                    Formula::Modal(ModalOp { logic: Logic::Graded, kind }, vec![arg])
                }
                Logic::Probabilistic => {
                    let b = BigRational::new(
                        BigInt::from(rng.gen_range(0..=3)),
                        BigInt::from(4),
                    );
                    let p = Polynomial::linear_minus(b);
                    let kind = if diamond {
                        ModalKind::DiaPoly(p)
                    } else {
                        ModalKind::BoxPoly(p)
                    };
                    Formula::Modal(ModalOp { logic: Logic::Probabilistic, kind }, vec![arg])
                }
            }
        }
        _ => {
            *var_counter += 1;
            let name = format!("V{var_counter}");
            scope.push(name.clone());
            let body = gen_formula(rng, cfg, budget - 1, scope, var_counter);
            scope.pop();
            if rng.gen_bool(0.5) {
                Formula::mu(name, body)
            } else {
                Formula::nu(name, body)
            }
        }
    }
}

/// A random nondeterministic parity automaton with the given bounds.
pub fn random_npa(
    rng: &mut impl Rng,
    max_states: usize,
    max_letters: usize,
    max_priority: u32,
) -> Npa {
    let num_states = rng.gen_range(1..=max_states);
    let num_letters = rng.gen_range(1..=max_letters);
    let priority: Vec<u32> = (0..num_states).map(|_| rng.gen_range(1..=max_priority)).collect();
    let delta: Vec<Vec<Vec<usize>>> = (0..num_states)
        .map(|_| {
            (0..num_letters)
                .map(|_| {
                    (0..num_states)
                        .filter(|_| rng.gen_bool(0.4))
                        .collect()
                })
                .collect()
        })
        .collect();
    Npa {
        num_states,
        num_letters,
        initial: 0,
        priority,
        delta,
    }
}

/// A random lasso word `(prefix, period)` with `|period| >= 1`.
pub fn random_lasso(rng: &mut impl Rng, num_letters: usize, max_len: usize) -> (Vec<usize>, Vec<usize>) {
    let plen = rng.gen_range(0..=max_len);
    let vlen = rng.gen_range(1..=max_len);
    let prefix = (0..plen).map(|_| rng.gen_range(0..num_letters)).collect();
    let period = (0..vlen).map(|_| rng.gen_range(0..num_letters)).collect();
    (prefix, period)
}

/// A random parity game; some nodes may be stuck.
pub fn random_parity_game(rng: &mut impl Rng, max_nodes: usize, max_priority: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_nodes);
    let mut g = ParityGame::default();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::Exists } else { Player::Forall };
        g.add_node(owner, rng.gen_range(0..=max_priority));
    }
    for v in 0..n {
        let degree = rng.gen_range(0..=3usize);
        for _ in 0..degree {
            let t = rng.gen_range(0..n);
            g.add_move(v, t);
        }
    }
    g
}

/// A random relational model over the given atom pool.
pub fn random_rel_model(rng: &mut impl Rng, max_states: usize, atoms: &[String]) -> Coalgebra {
    let n = rng.gen_range(1..=max_states);
    let succ: Vec<BTreeSet<usize>> = (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    let atom_sets: Vec<BTreeSet<String>> = (0..n)
        .map(|_| {
            atoms
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect()
        })
        .collect();
    Coalgebra {
        num_states: n,
        root: 0,
        parts: vec![CoalgebraPart::Relational { succ, atoms: atom_sets }],
    }
}

#[derive(Debug, Clone)]
pub struct PairGenConfig {
    pub logic: Logic,
    pub max_vars: usize,
    pub max_theta: usize,
    pub max_literals: usize,
    /// Restrict probabilistic polynomials to linear ones.
    pub linear_only: bool,
}

impl PairGenConfig {
    pub fn new(logic: Logic) -> PairGenConfig {
        PairGenConfig {
            logic,
            max_vars: 4,
            max_theta: 8,
            max_literals: 4,
            linear_only: true,
        }
    }
}

/// A random one-step pair for the configured logic.
pub fn random_pair(rng: &mut impl Rng, cfg: &PairGenConfig) -> OneStepPair {
    let num_vars = rng.gen_range(1..=cfg.max_vars);
    // Profiles: distinct random subsets of V.
    let n_theta = rng.gen_range(0..=cfg.max_theta);
    let mut profiles: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for _ in 0..n_theta {
        profiles.insert((0..num_vars).filter(|_| rng.gen_bool(0.5)).collect());
    }
    let theta: Vec<BTreeSet<usize>> = profiles.into_iter().collect();
    let n_lits = rng.gen_range(0..=cfg.max_literals);
    let gamma: Vec<OsLiteral> = (0..n_lits)
        .map(|_| random_literal(rng, cfg, num_vars))
        .collect();
    OneStepPair::new(num_vars, dedup_literals(gamma), theta)
}

fn dedup_literals(gamma: Vec<OsLiteral>) -> Vec<OsLiteral> {
    let set: BTreeSet<OsLiteral> = gamma.into_iter().collect();
    set.into_iter().collect()
}

fn random_literal(rng: &mut impl Rng, cfg: &PairGenConfig, num_vars: usize) -> OsLiteral {
    let var = |rng: &mut dyn rand::RngCore| -> usize { rng.gen_range(0..num_vars) };
    match cfg.logic {
        Logic::Relational => {
            let kind = match rng.gen_range(0..4) {
                0 => ModalKind::Diamond,
                1 => ModalKind::Box,
                2 => ModalKind::Atom(format!("at{}", rng.gen_range(0..2))),
                _ => ModalKind::NegAtom(format!("at{}", rng.gen_range(0..2))),
            };
            let args = match kind {
                ModalKind::Diamond | ModalKind::Box => vec![var(rng)],
                _ => vec![],
            };
            OsLiteral { op: ModalOp { logic: Logic::Relational, kind }, args }
        }
        Logic::Graded => {
            // Indices kept small so the brute oracle's doubled bound stays
            // enumerable.
            let arity = rng.gen_range(1..=2usize.min(num_vars));
            let index = rng.gen_range(0..=2i64);
            let mut monomials = vec![Monomial {
                exps: vec![0; arity],
                coeff: BigRational::from_integer(BigInt::from(-index)),
            }];
            for i in 0..arity {
                let coeff = rng.gen_range(0..=2i64);
                let exp = rng.gen_range(1..=2u32);
                if coeff > 0 {
                    let mut exps = vec![0; arity];
                    exps[i] = exp;
                    monomials.push(Monomial {
                        exps,
                        coeff: BigRational::from_integer(BigInt::from(coeff)),
                    });
                }
            }
            let poly = Polynomial::new(arity, monomials);
            // Ensure at least one non-constant monomial survived.
            let poly = if poly.degree() == 0 {
                Polynomial::linear_minus(BigRational::from_integer(BigInt::from(index)))
            } else {
                poly
            };
            let kind = if rng.gen_bool(0.6) {
                ModalKind::DiaPoly(poly)
            } else {
                ModalKind::BoxPoly(poly)
            };
            let args = (0..kind_arity(&kind)).map(|_| var(rng)).collect();
            OsLiteral { op: ModalOp { logic: Logic::Graded, kind }, args }
        }
        Logic::Probabilistic => {
            if rng.gen_bool(0.2) {
                let kind = if rng.gen_bool(0.5) {
                    ModalKind::Atom(format!("at{}", rng.gen_range(0..2)))
                } else {
                    ModalKind::NegAtom(format!("at{}", rng.gen_range(0..2)))
                };
                return OsLiteral { op: ModalOp { logic: Logic::Probabilistic, kind }, args: vec![] };
            }
            let arity = rng.gen_range(1..=2usize.min(num_vars));
            let mut monomials = Vec::new();
            for i in 0..arity {
                let num = rng.gen_range(1..=4i64);
                let den = rng.gen_range(1..=4i64);
                let mut exps = vec![0; arity];
                exps[i] = if cfg.linear_only { 1 } else { rng.gen_range(1..=2) };
                monomials.push(Monomial {
                    exps,
                    coeff: BigRational::new(num.into(), den.into()),
                });
            }
            let num = rng.gen_range(0..=4i64);
            let den = rng.gen_range(1..=4i64);
            monomials.push(Monomial {
                exps: vec![0; arity],
                coeff: -BigRational::new(num.into(), den.into()),
            });
            let poly = Polynomial::new(arity, monomials);
            let kind = if rng.gen_bool(0.6) {
                ModalKind::DiaPoly(poly)
            } else {
                ModalKind::BoxPoly(poly)
            };
            let args = (0..kind_arity(&kind)).map(|_| var(rng)).collect();
            OsLiteral { op: ModalOp { logic: Logic::Probabilistic, kind }, args }
        }
    }
}

fn kind_arity(kind: &ModalKind) -> usize {
    match kind {
        ModalKind::Diamond | ModalKind::Box => 1,
        ModalKind::Atom(_) | ModalKind::NegAtom(_) => 0,
        ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) => p.arity(),
    }
}

/// A random full choice letter over all disjunctions plus a random selection
/// over all modal argument slots of a closure (sampled sub-alphabet for the
/// lasso suites).
pub fn random_tracking_letter(
    rng: &mut impl Rng,
    npa: &crate::tracking::TrackingNpa<'_>,
) -> crate::tracking::Letter {
    let all: Vec<crate::closure::FormulaId> = npa.table.all_ids().collect();
    if rng.gen_bool(0.5) {
        let map: BTreeMap<crate::closure::FormulaId, bool> = npa
            .label_disjunctions(&all)
            .into_iter()
            .map(|d| (d, rng.gen_bool(0.5)))
            .collect();
        crate::tracking::Letter::Choice(map)
    } else {
        let set: BTreeSet<crate::tracking::Slot> = npa
            .label_slots(&all)
            .into_iter()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        crate::tracking::Letter::Selection(set)
    }
}
