//! One-step pairs and their satisfiability backends.
//!
//! A one-step pair `(γ, Θ)` over a placeholder set `V` consists of a
//! conjunction `γ` of depth-one modal literals over `V` and a set
//! `Θ ⊆ P(V)` of admitted placeholder profiles. The pair is satisfiable if
//! some element of `FΘ` lies in all lifted predicates. Each backend decides
//! this for its functor and returns a concrete witness; witnesses are always
//! re-checked by the independent validator in tests, so no backend is
//! trusted on its own.

use std::collections::BTreeSet;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::formula::{Logic, LogicSpec, ModalKind, ModalOp};
use crate::Error;

mod brute;
mod graded;
mod prob;
mod relational;

pub use brute::oss_brute;
pub use graded::oss_graded;
pub use prob::oss_probabilistic;
pub use relational::oss_relational;

/// A depth-one modal literal `♡(a_1, ..., a_n)` with placeholder arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OsLiteral {
    pub op: ModalOp,
    pub args: Vec<usize>,
}

/// A one-step pair `(γ, Θ)` over placeholders `0..num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneStepPair {
    pub num_vars: usize,
    pub gamma: Vec<OsLiteral>,
    pub theta: Vec<BTreeSet<usize>>,
}

impl OneStepPair {
    pub fn new(num_vars: usize, gamma: Vec<OsLiteral>, theta: Vec<BTreeSet<usize>>) -> OneStepPair {
        for lit in &gamma {
            assert_eq!(lit.args.len(), lit.op.arity(), "literal arity mismatch");
            assert!(lit.args.iter().all(|&a| a < num_vars), "argument outside V");
        }
        for u in &theta {
            assert!(u.iter().all(|&a| a < num_vars), "profile outside V");
        }
        OneStepPair { num_vars, gamma, theta }
    }

    /// `[[a]]_0 = { u ∈ Θ | a ∈ u }` as indices into `theta`.
    pub fn ext0(&self, a: usize) -> Vec<usize> {
        self.theta
            .iter()
            .enumerate()
            .filter(|(_, u)| u.contains(&a))
            .map(|(i, _)| i)
            .collect()
    }

    /// The strict input-size measure `b = size(γ) + |V|`.
    pub fn size_b(&self) -> u64 {
        let gamma: u64 = self
            .gamma
            .iter()
            .map(|l| 1 + l.op.encoding_size())
            .sum();
        gamma + self.num_vars as u64
    }

    /// Splits `γ` by component logic, preserving literal order.
    pub fn partition(&self, spec: &LogicSpec) -> Result<Vec<Vec<OsLiteral>>, Error> {
        let mut parts: Vec<Vec<OsLiteral>> = vec![Vec::new(); spec.components().len()];
        for lit in &self.gamma {
            match spec.component_index(lit.op.logic) {
                Some(i) => parts[i].push(lit.clone()),
                None => {
                    return Err(Error::Contract(format!(
                        "literal {} has logic {} outside the run's logic {}",
                        lit.op, lit.op.logic, spec
                    )))
                }
            }
        }
        Ok(parts)
    }
}

/// Functor-specific witness for a satisfiable one-step pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OsWitness {
    /// Element of `P(Θ) × P(P)`: the chosen successor profiles and atoms.
    Relational {
        chosen: BTreeSet<usize>,
        atoms: BTreeSet<String>,
    },
    /// Multiset over `Θ` (plus atoms).
    Graded {
        mult: Vec<BigInt>,
        atoms: BTreeSet<String>,
    },
    /// Rational distribution over `Θ` (plus atoms).
    Probabilistic {
        weight: Vec<BigRational>,
        atoms: BTreeSet<String>,
    },
    /// One witness per fusion component, in component order.
    Fusion(Vec<OsWitness>),
}

impl OsWitness {
    /// Number of profiles carrying positive weight (support size).
    pub fn support_size(&self) -> usize {
        match self {
            OsWitness::Relational { chosen, .. } => chosen.len(),
            OsWitness::Graded { mult, .. } => mult.iter().filter(|m| m.is_positive()).count(),
            OsWitness::Probabilistic { weight, .. } => {
                weight.iter().filter(|w| w.is_positive()).count()
            }
            OsWitness::Fusion(ws) => ws.iter().map(OsWitness::support_size).max().unwrap_or(0),
        }
    }
}

/// Backend verdicts. `UnsatAtResolution` is the incomplete third outcome of
/// the nonlinear probabilistic search: no certified satisfying point was
/// found down to boxes of width `ε`, but unsatisfiability is not claimed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OsOutcome {
    Sat(OsWitness),
    Unsat,
    UnsatAtResolution(BigRational),
}

impl OsOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, OsOutcome::Sat(_))
    }
}

impl fmt::Display for OsOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OsOutcome::Sat(_) => write!(f, "sat"),
            OsOutcome::Unsat => write!(f, "unsat"),
            OsOutcome::UnsatAtResolution(eps) => write!(f, "unsat-at-resolution({eps})"),
        }
    }
}

/// Options threaded through the backends.
#[derive(Debug, Clone)]
pub struct OsOptions {
    /// Resolution for the nonlinear probabilistic search.
    pub eps: BigRational,
}

impl Default for OsOptions {
    fn default() -> OsOptions {
        // 2^-20 by default.
        OsOptions {
            eps: BigRational::new(BigInt::one(), BigInt::from(1u64 << 20)),
        }
    }
}

/// Decides a one-step pair in the given (possibly fused) logic.
///
/// For a fusion, the pair is satisfiable iff every component pair
/// `(γ ∩ Λ_i(V), Θ)` is satisfiable in its own backend; the witness is the
/// tuple of component witnesses.
pub fn oss_solve(pair: &OneStepPair, spec: &LogicSpec, opts: &OsOptions) -> Result<OsOutcome, Error> {
    if !spec.is_fusion() {
        return solve_component(pair, spec.components()[0], opts);
    }
    let parts = pair.partition(spec)?;
    let mut witnesses = Vec::with_capacity(parts.len());
    let mut unknown: Option<BigRational> = None;
    for (i, gamma) in parts.into_iter().enumerate() {
        let sub = OneStepPair {
            num_vars: pair.num_vars,
            gamma,
            theta: pair.theta.clone(),
        };
        match solve_component(&sub, spec.components()[i], opts)? {
            OsOutcome::Sat(w) => witnesses.push(w),
            OsOutcome::Unsat => return Ok(OsOutcome::Unsat),
            OsOutcome::UnsatAtResolution(eps) => unknown = Some(eps),
        }
    }
    match unknown {
        Some(eps) => Ok(OsOutcome::UnsatAtResolution(eps)),
        None => Ok(OsOutcome::Sat(OsWitness::Fusion(witnesses))),
    }
}

fn solve_component(pair: &OneStepPair, logic: Logic, opts: &OsOptions) -> Result<OsOutcome, Error> {
    for lit in &pair.gamma {
        if lit.op.logic != logic {
            return Err(Error::Contract(format!(
                "mixed-logic literal {} (expected {logic})",
                lit.op
            )));
        }
    }
    match logic {
        Logic::Relational => oss_relational(pair),
        Logic::Graded => oss_graded(pair),
        Logic::Probabilistic => oss_probabilistic(pair, opts),
    }
}

/// Collects atom literals of `γ` and checks joint consistency. Returns the
/// positive atom set, or `None` when some atom occurs both ways.
pub(crate) fn atom_side_conditions(gamma: &[OsLiteral]) -> Option<BTreeSet<String>> {
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for lit in gamma {
        match &lit.op.kind {
            ModalKind::Atom(a) => {
                pos.insert(a.clone());
            }
            ModalKind::NegAtom(a) => {
                neg.insert(a.clone());
            }
            _ => {}
        }
    }
    if pos.intersection(&neg).next().is_some() {
        None
    } else {
        Some(pos)
    }
}

/// Independent witness validator: direct evaluation of every predicate
/// lifting membership. Backends are never trusted without this.
pub fn validate_witness(
    pair: &OneStepPair,
    witness: &OsWitness,
    spec: &LogicSpec,
) -> Result<(), String> {
    if spec.is_fusion() {
        let parts = pair.partition(spec).map_err(|e| e.to_string())?;
        let ws = match witness {
            OsWitness::Fusion(ws) => ws,
            _ => return Err("fusion pair needs a fusion witness".into()),
        };
        if ws.len() != parts.len() {
            return Err(format!(
                "fusion witness has {} components, logic has {}",
                ws.len(),
                parts.len()
            ));
        }
        for ((gamma, w), logic) in parts.into_iter().zip(ws).zip(spec.components()) {
            let sub = OneStepPair {
                num_vars: pair.num_vars,
                gamma,
                theta: pair.theta.clone(),
            };
            validate_component(&sub, w, *logic)?;
        }
        Ok(())
    } else {
        validate_component(pair, witness, spec.components()[0])
    }
}

fn validate_component(pair: &OneStepPair, witness: &OsWitness, logic: Logic) -> Result<(), String> {
    match (logic, witness) {
        (Logic::Relational, OsWitness::Relational { chosen, atoms }) => {
            for i in chosen {
                if *i >= pair.theta.len() {
                    return Err("chosen profile out of range".into());
                }
            }
            for lit in &pair.gamma {
                let ok = match &lit.op.kind {
                    ModalKind::Diamond => {
                        let a = lit.args[0];
                        chosen.iter().any(|&i| pair.theta[i].contains(&a))
                    }
                    ModalKind::Box => {
                        let a = lit.args[0];
                        chosen.iter().all(|&i| pair.theta[i].contains(&a))
                    }
                    ModalKind::Atom(a) => atoms.contains(a),
                    ModalKind::NegAtom(a) => !atoms.contains(a),
                    other => return Err(format!("non-relational literal {other:?}")),
                };
                if !ok {
                    return Err(format!("literal {} not satisfied", lit.op));
                }
            }
            Ok(())
        }
        (Logic::Graded, OsWitness::Graded { mult, atoms }) => {
            if mult.len() != pair.theta.len() {
                return Err("multiplicity vector length mismatch".into());
            }
            if mult.iter().any(|m| m.is_negative()) {
                return Err("negative multiplicity".into());
            }
            let measure = |pred: &dyn Fn(usize) -> bool| -> BigRational {
                let mut acc = BigInt::zero();
                for (i, m) in mult.iter().enumerate() {
                    if pred(i) {
                        acc += m;
                    }
                }
                BigRational::from_integer(acc)
            };
            for lit in &pair.gamma {
                let ok = match &lit.op.kind {
                    ModalKind::DiaPoly(p) => {
                        let args: Vec<BigRational> = lit
                            .args
                            .iter()
                            .map(|&a| measure(&|i| pair.theta[i].contains(&a)))
                            .collect();
                        p.eval(&args) > BigRational::zero()
                    }
                    ModalKind::BoxPoly(p) => {
                        let args: Vec<BigRational> = lit
                            .args
                            .iter()
                            .map(|&a| measure(&|i| !pair.theta[i].contains(&a)))
                            .collect();
                        p.eval(&args) <= BigRational::zero()
                    }
                    ModalKind::Atom(a) => atoms.contains(a),
                    ModalKind::NegAtom(a) => !atoms.contains(a),
                    other => return Err(format!("non-graded literal {other:?}")),
                };
                if !ok {
                    return Err(format!("literal {} not satisfied", lit.op));
                }
            }
            Ok(())
        }
        (Logic::Probabilistic, OsWitness::Probabilistic { weight, atoms }) => {
            if weight.len() != pair.theta.len() {
                return Err("weight vector length mismatch".into());
            }
            if weight.iter().any(|w| w.is_negative()) {
                return Err("negative weight".into());
            }
            let total: BigRational = weight.iter().cloned().sum();
            if !total.is_one() {
                return Err(format!("weights sum to {total}, not 1"));
            }
            let measure = |pred: &dyn Fn(usize) -> bool| -> BigRational {
                weight
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| pred(*i))
                    .map(|(_, w)| w.clone())
                    .sum()
            };
            for lit in &pair.gamma {
                let ok = match &lit.op.kind {
                    ModalKind::DiaPoly(p) => {
                        let args: Vec<BigRational> = lit
                            .args
                            .iter()
                            .map(|&a| measure(&|i| pair.theta[i].contains(&a)))
                            .collect();
                        p.eval(&args) > BigRational::zero()
                    }
                    ModalKind::BoxPoly(p) => {
                        let args: Vec<BigRational> = lit
                            .args
                            .iter()
                            .map(|&a| measure(&|i| !pair.theta[i].contains(&a)))
                            .collect();
                        p.eval(&args) <= BigRational::zero()
                    }
                    ModalKind::Atom(a) => atoms.contains(a),
                    ModalKind::NegAtom(a) => !atoms.contains(a),
                    other => return Err(format!("non-probabilistic literal {other:?}")),
                };
                if !ok {
                    return Err(format!("literal {} not satisfied", lit.op));
                }
            }
            Ok(())
        }
        (logic, w) => Err(format!("witness {w:?} does not match logic {logic}")),
    }
}

/// The equisatisfiable reduction to pairs whose literals mention each
/// placeholder exactly once: one fresh placeholder per literal occurrence
/// and argument position, with `Θ' = f[Θ]` for
/// `f(u) = { a_(lit,pos) | arg(lit,pos) ∈ u }`.
pub fn normalize_pair(pair: &OneStepPair) -> OneStepPair {
    let mut fresh = 0usize;
    let mut slot_var: Vec<Vec<usize>> = Vec::with_capacity(pair.gamma.len());
    for lit in &pair.gamma {
        let vars: Vec<usize> = lit
            .args
            .iter()
            .map(|_| {
                let v = fresh;
                fresh += 1;
                v
            })
            .collect();
        slot_var.push(vars);
    }
    let gamma: Vec<OsLiteral> = pair
        .gamma
        .iter()
        .zip(&slot_var)
        .map(|(lit, vars)| OsLiteral { op: lit.op.clone(), args: vars.clone() })
        .collect();
    let mut theta: Vec<BTreeSet<usize>> = Vec::new();
    for u in &pair.theta {
        let mut image = BTreeSet::new();
        for (lit, vars) in pair.gamma.iter().zip(&slot_var) {
            for (pos, &a) in lit.args.iter().enumerate() {
                if u.contains(&a) {
                    image.insert(vars[pos]);
                }
            }
        }
        if !theta.contains(&image) {
            theta.push(image);
        }
    }
    OneStepPair { num_vars: fresh, gamma, theta }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dia(a: usize) -> OsLiteral {
        OsLiteral {
            op: ModalOp { logic: Logic::Relational, kind: ModalKind::Diamond },
            args: vec![a],
        }
    }

    pub(crate) fn boxl(a: usize) -> OsLiteral {
        OsLiteral {
            op: ModalOp { logic: Logic::Relational, kind: ModalKind::Box },
            args: vec![a],
        }
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn normalize_pair_splits_shared_argument() {
        // gamma = {dia a, box a}, theta = {{a}}:
        // gamma' = {dia a_dia, box a_box}, theta' = {{a_dia, a_box}}.
        let pair = OneStepPair::new(1, vec![dia(0), boxl(0)], vec![set(&[0])]);
        let norm = normalize_pair(&pair);
        assert_eq!(norm.num_vars, 2);
        assert_eq!(norm.gamma[0].args, vec![0]);
        assert_eq!(norm.gamma[1].args, vec![1]);
        assert_eq!(norm.theta, vec![set(&[0, 1])]);
    }

    #[test]
    fn normalize_pair_empty_gamma() {
        let pair = OneStepPair::new(2, vec![], vec![set(&[0]), set(&[1])]);
        let norm = normalize_pair(&pair);
        assert_eq!(norm.num_vars, 0);
        // Both profiles map to the empty image, deduplicated.
        assert_eq!(norm.theta, vec![set(&[])]);
    }

    #[test]
    fn atom_consistency() {
        let atom = |n: &str| OsLiteral {
            op: ModalOp { logic: Logic::Relational, kind: ModalKind::Atom(n.into()) },
            args: vec![],
        };
        let negatom = |n: &str| OsLiteral {
            op: ModalOp { logic: Logic::Relational, kind: ModalKind::NegAtom(n.into()) },
            args: vec![],
        };
        assert!(atom_side_conditions(&[atom("p"), negatom("q")]).is_some());
        assert!(atom_side_conditions(&[atom("p"), negatom("p")]).is_none());
    }
}
