//! Graded (multigraph) one-step satisfiability.
//!
//! Searches multiplicity assignments `β: Θ → {0, ..., B}` where
//! `B = (max diamond index) + 1` (and `B = 1` without diamonds), checking
//! `p(β([[a_1]]), ...) > 0` for every diamond and
//! `p(β(complements)) ≤ 0` for every box, in exact integer arithmetic.
//! The enumeration prunes branches whose monotone optimistic/pessimistic
//! bounds already decide a constraint.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, Zero};

use crate::formula::ModalKind;
use crate::poly::Polynomial;
use crate::Error;

use super::{atom_side_conditions, OneStepPair, OsOutcome, OsWitness};

// Enumeration ceiling for per-profile multiplicities; indices beyond this
// would make the search space unreasonable for a desk-scale tool.
const MAX_BOUND: u64 = 1 << 16;

struct PolyLit<'a> {
    poly: &'a Polynomial,
    /// Per argument position: which theta indices count toward the measure.
    member: Vec<Vec<bool>>,
    is_diamond: bool,
}

pub fn oss_graded(pair: &OneStepPair) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(atoms) => atoms,
        None => return Ok(OsOutcome::Unsat),
    };
    let mut lits: Vec<PolyLit> = Vec::new();
    let mut max_index = BigInt::zero();
    for lit in &pair.gamma {
        match &lit.op.kind {
            ModalKind::DiaPoly(p) => {
                if p.graded_index() > max_index {
                    max_index = p.graded_index();
                }
                lits.push(make_lit(pair, p, &lit.args, true));
            }
            ModalKind::BoxPoly(p) => lits.push(make_lit(pair, p, &lit.args, false)),
            ModalKind::Atom(_) | ModalKind::NegAtom(_) => {}
            other => {
                return Err(Error::Contract(format!(
                    "non-graded literal {other:?} in graded backend"
                )))
            }
        }
    }
    let has_diamond = lits.iter().any(|l| l.is_diamond);
    let bound: BigInt = if has_diamond {
        max_index + 1
    } else {
        BigInt::from(1)
    };
    let bound: u64 = bound
        .try_into()
        .ok()
        .filter(|&b| b <= MAX_BOUND)
        .ok_or_else(|| Error::Budget("graded diamond index too large for enumeration".into()))?;
    search_multiplicities(pair, &lits, bound).map(|m| match m {
        Some(mult) => OsOutcome::Sat(OsWitness::Graded { mult, atoms }),
        None => OsOutcome::Unsat,
    })
}

fn make_lit<'a>(
    pair: &OneStepPair,
    poly: &'a Polynomial,
    args: &[usize],
    is_diamond: bool,
) -> PolyLit<'a> {
    let member = args
        .iter()
        .map(|&a| {
            pair.theta
                .iter()
                .map(|u| {
                    let inside = u.contains(&a);
                    if is_diamond {
                        inside
                    } else {
                        !inside
                    }
                })
                .collect()
        })
        .collect();
    PolyLit { poly, member, is_diamond }
}

/// Depth-first search over multiplicity vectors with monotone pruning:
/// since non-constant coefficients are non-negative, each polynomial is
/// monotone in all measures, so diamonds prune when even the optimistic
/// completion fails and boxes prune when the pessimistic one already
/// overshoots.
fn search_multiplicities(
    pair: &OneStepPair,
    lits: &[PolyLit],
    bound: u64,
) -> Result<Option<Vec<BigInt>>, Error> {
    let n = pair.theta.len();
    let mut beta = vec![0u64; n];

    fn measure(member: &[bool], beta: &[u64], upto: usize, rest_value: u64) -> BigRational {
        let mut acc: u64 = 0;
        let mut rest: u64 = 0;
        for (j, &m) in member.iter().enumerate() {
            if m {
                if j < upto {
                    acc += beta[j];
                } else {
                    rest += rest_value;
                }
            }
        }
        BigRational::from_u64(acc + rest).unwrap()
    }

    fn feasible(lits: &[PolyLit], beta: &[u64], upto: usize, bound: u64) -> bool {
        for lit in lits {
            if lit.is_diamond {
                // Optimistic completion: all remaining profiles at the cap.
                let args: Vec<BigRational> = lit
                    .member
                    .iter()
                    .map(|mem| measure(mem, beta, upto, bound))
                    .collect();
                if lit.poly.eval(&args) <= BigRational::zero() {
                    return false;
                }
            } else {
                // Pessimistic completion: remaining profiles contribute zero.
                let args: Vec<BigRational> = lit
                    .member
                    .iter()
                    .map(|mem| measure(mem, beta, upto, 0))
                    .collect();
                if lit.poly.eval(&args) > BigRational::zero() {
                    return false;
                }
            }
        }
        true
    }

    fn rec(lits: &[PolyLit], beta: &mut Vec<u64>, i: usize, bound: u64) -> bool {
        let n = beta.len();
        if !feasible(lits, beta, i, bound) {
            return false;
        }
        if i == n {
            return true;
        }
        for v in 0..=bound {
            beta[i] = v;
            if rec(lits, beta, i + 1, bound) {
                return true;
            }
        }
        beta[i] = 0;
        false
    }

    if rec(lits, &mut beta, 0, bound) {
        Ok(Some(beta.into_iter().map(BigInt::from).collect()))
    } else {
        Ok(None)
    }
}
