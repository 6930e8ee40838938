//! Probabilistic one-step satisfiability.
//!
//! Searches supports `S ⊆ Θ` of size at most `max(1, |V|)` (the one-step
//! polysize model property bound). Per support, feasibility of
//! `{ d ≥ 0, Σd = 1 } ∪ γ-constraints` is decided exactly:
//!
//! * all-linear constraint systems go through rational Fourier–Motzkin
//!   elimination with strict-inequality bookkeeping, so linear pairs always
//!   get an exact verdict and an exact rational witness;
//! * systems with a nonlinear polynomial are attacked by branch-and-prune
//!   interval search over the simplex. Candidate points are certified by
//!   exact rational re-evaluation of every constraint, so a `Sat` answer is
//!   always exact; a failed search reports `UnsatAtResolution(ε)` instead of
//!   plain unsat.



use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::formula::ModalKind;
use crate::poly::Polynomial;
use crate::Error;

use super::{atom_side_conditions, OneStepPair, OsOptions, OsOutcome, OsWitness};

/// A polynomial constraint over per-argument measures. `complemented`
/// argument positions read `1 - t` instead of `t`.
/// Diamonds demand `p(t) > 0` (strict), boxes demand `p(s) ≤ 0` over the
/// complemented measures `s = 1 - t`.
struct MeasureConstraint<'a> {
    poly: &'a Polynomial,
    /// Per argument position, membership of each Θ-profile in the measure.
    member: Vec<Vec<bool>>,
    complemented: bool,
}

pub fn oss_probabilistic(pair: &OneStepPair, opts: &OsOptions) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(atoms) => atoms,
        None => return Ok(OsOutcome::Unsat),
    };
    let mut constraints: Vec<MeasureConstraint> = Vec::new();
    for lit in &pair.gamma {
        match &lit.op.kind {
            ModalKind::DiaPoly(p) => constraints.push(MeasureConstraint {
                poly: p,
                member: membership(pair, &lit.args),
                complemented: false,
            }),
            ModalKind::BoxPoly(p) => constraints.push(MeasureConstraint {
                poly: p,
                member: membership(pair, &lit.args),
                complemented: true,
            }),
            ModalKind::Atom(_) | ModalKind::NegAtom(_) => {}
            other => {
                return Err(Error::Contract(format!(
                    "non-probabilistic literal {other:?} in probabilistic backend"
                )))
            }
        }
    }
    if pair.theta.is_empty() {
        // No distribution exists over an empty profile set: D(∅) = ∅.
        return Ok(OsOutcome::Unsat);
    }

    let linear = constraints.iter().all(|c| c.poly.is_linear());
    let max_support = pair.num_vars.max(1).min(pair.theta.len());
    let mut supports: Vec<Vec<usize>> = Vec::new();
    enumerate_supports(pair.theta.len(), max_support, &mut supports);

    let mut any_unresolved = false;
    for support in &supports {
        if linear {
            if let Some(weights) = linear_feasible(pair, &constraints, support) {
                return Ok(OsOutcome::Sat(OsWitness::Probabilistic { weight: weights, atoms }));
            }
        } else {
            match branch_and_prune(pair, &constraints, support, &opts.eps) {
                BnbResult::Sat(weights) => {
                    return Ok(OsOutcome::Sat(OsWitness::Probabilistic { weight: weights, atoms }))
                }
                BnbResult::Exhausted => any_unresolved = true,
                BnbResult::AllPruned => {}
            }
        }
    }
    if linear {
        Ok(OsOutcome::Unsat)
    } else {
        // The nonlinear search never claims plain unsatisfiability, even when
        // every box was pruned by rigorous interval bounds.
        let _ = any_unresolved;
        Ok(OsOutcome::UnsatAtResolution(opts.eps.clone()))
    }
}

fn membership(pair: &OneStepPair, args: &[usize]) -> Vec<Vec<bool>> {
    args.iter()
        .map(|&a| pair.theta.iter().map(|u| u.contains(&a)).collect())
        .collect()
}

fn enumerate_supports(n: usize, max_size: usize, out: &mut Vec<Vec<usize>>) {
    // Ascending by size, lexicographic within a size: the first hit yields a
    // minimal-support witness.
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    for size in 1..=max_size {
        rec(0, n, size, &mut Vec::new(), out);
    }
}

// ---------------------------------------------------------------------------
// Linear path: Fourier–Motzkin with strictness bookkeeping.
// ---------------------------------------------------------------------------

/// `sum(coeffs · y) + cst  >= 0`, or `> 0` when `strict`.
#[derive(Debug, Clone)]
struct LinIneq {
    coeffs: Vec<BigRational>,
    cst: BigRational,
    strict: bool,
}

impl LinIneq {
    fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = self.cst.clone();
        for (c, y) in self.coeffs.iter().zip(point) {
            acc += c * y;
        }
        acc
    }

}

/// Builds the linear system for a support and runs Fourier–Motzkin. Returns
/// an exact witness distribution over the full Θ on success.
fn linear_feasible(
    pair: &OneStepPair,
    constraints: &[MeasureConstraint],
    support: &[usize],
) -> Option<Vec<BigRational>> {
    let m = support.len();
    let mut ineqs: Vec<LinIneq> = Vec::new();
    for j in 0..m {
        let mut coeffs = vec![BigRational::zero(); m];
        coeffs[j] = BigRational::one();
        ineqs.push(LinIneq { coeffs, cst: BigRational::zero(), strict: false });
    }
    // Σ y = 1 as a pair of inequalities.
    ineqs.push(LinIneq {
        coeffs: vec![BigRational::one(); m],
        cst: -BigRational::one(),
        strict: false,
    });
    ineqs.push(LinIneq {
        coeffs: vec![-BigRational::one(); m],
        cst: BigRational::one(),
        strict: false,
    });
    for c in constraints {
        ineqs.push(linearize(c, support));
    }
    let point = fm_solve(m, ineqs)?;
    let mut weights = vec![BigRational::zero(); pair.theta.len()];
    for (j, &idx) in support.iter().enumerate() {
        weights[idx] = point[j].clone();
    }
    Some(weights)
}

/// Converts a linear measure constraint into an inequality over support
/// weights. For a diamond `p(t) > 0` directly; for a box the condition
/// `p(1-t) ≤ 0` becomes `Σ c_i t_i - c_0 - Σ c_i ≥ 0`.
fn linearize(c: &MeasureConstraint, support: &[usize]) -> LinIneq {
    let m = support.len();
    let arity = c.poly.arity();
    let mut coeffs = vec![BigRational::zero(); m];
    let c0 = c.poly.constant_coeff();
    let mut cst;
    let lin: Vec<BigRational> = (0..arity).map(|i| c.poly.linear_coeff(i)).collect();
    if !c.complemented {
        // p(t) > 0: coefficient of y_j is Σ_i c_i [j ∈ member_i].
        cst = c0;
        for (i, ci) in lin.iter().enumerate() {
            for (j, &idx) in support.iter().enumerate() {
                if c.member[i][idx] {
                    coeffs[j] += ci;
                }
            }
        }
        LinIneq { coeffs, cst, strict: true }
    } else {
        // p(s) ≤ 0 with s_i = 1 - t_i: Σ_i c_i t_i - c0 - Σ c_i ≥ 0.
        cst = -c0;
        for (i, ci) in lin.iter().enumerate() {
            cst -= ci;
            for (j, &idx) in support.iter().enumerate() {
                if c.member[i][idx] {
                    coeffs[j] += ci;
                }
            }
        }
        LinIneq { coeffs, cst, strict: false }
    }
}

/// Fourier–Motzkin elimination with witness back-substitution. Strictness
/// propagates through combinations: a derived inequality is strict iff
/// either parent is.
fn fm_solve(num_vars: usize, mut ineqs: Vec<LinIneq>) -> Option<Vec<BigRational>> {
    // For back-substitution, remember per eliminated variable its lower and
    // upper bounds expressed over the earlier variables.
    struct Bounds {
        lowers: Vec<LinIneq>, // x >= expr (strict: >)
        uppers: Vec<LinIneq>, // x <= expr (strict: <)
    }
    let mut trail: Vec<Bounds> = Vec::new();

    for var in (0..num_vars).rev() {
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        let mut rest = Vec::new();
        for mut iq in ineqs {
            let a = iq.coeffs[var].clone();
            iq.coeffs.truncate(var);
            if a.is_zero() {
                rest.push(iq);
            } else if a.is_positive() {
                // a·x + e ≥ 0  ⟺  x ≥ -e/a.
                let inv = BigRational::one() / a;
                lowers.push(LinIneq {
                    coeffs: iq.coeffs.iter().map(|c| -(c * &inv)).collect(),
                    cst: -(&iq.cst * &inv),
                    strict: iq.strict,
                });
            } else {
                // a·x + e ≥ 0 with a < 0  ⟺  x ≤ -e/a.
                let inv = BigRational::one() / a;
                uppers.push(LinIneq {
                    coeffs: iq.coeffs.iter().map(|c| -(c * &inv)).collect(),
                    cst: -(&iq.cst * &inv),
                    strict: iq.strict,
                });
            }
        }
        // Combine: every lower ≤ upper pair projects to upper - lower ≥ 0.
        let mut projected = rest;
        for lo in &lowers {
            for up in &uppers {
                let coeffs: Vec<BigRational> = up
                    .coeffs
                    .iter()
                    .zip(&lo.coeffs)
                    .map(|(u, l)| u - l)
                    .collect();
                projected.push(LinIneq {
                    coeffs,
                    cst: &up.cst - &lo.cst,
                    strict: lo.strict || up.strict,
                });
            }
        }
        trail.push(Bounds { lowers, uppers });
        ineqs = projected;
    }

    // Ground check.
    for iq in &ineqs {
        debug_assert!(iq.coeffs.is_empty());
        let ok = if iq.strict {
            iq.cst.is_positive()
        } else {
            !iq.cst.is_negative()
        };
        if !ok {
            return None;
        }
    }

    // Back-substitute, assigning variables in ascending order.
    let mut point: Vec<BigRational> = Vec::new();
    for var in 0..num_vars {
        let bounds = &trail[num_vars - 1 - var];
        let mut best_lo: Option<(BigRational, bool)> = None;
        for lo in &bounds.lowers {
            let v = lo.eval(&point);
            if best_lo.as_ref().map_or(true, |(b, bs)| v > *b || (v == *b && lo.strict && !bs)) {
                best_lo = Some((v, lo.strict));
            }
        }
        let mut best_up: Option<(BigRational, bool)> = None;
        for up in &bounds.uppers {
            let v = up.eval(&point);
            if best_up.as_ref().map_or(true, |(b, bs)| v < *b || (v == *b && up.strict && !bs)) {
                best_up = Some((v, up.strict));
            }
        }
        let value = match (best_lo, best_up) {
            (None, None) => BigRational::zero(),
            (Some((lo, _)), None) => lo + BigRational::one(),
            (None, Some((up, _))) => up - BigRational::one(),
            (Some((lo, ls)), Some((up, us))) => {
                if lo == up {
                    debug_assert!(!ls && !us, "strict bounds collapsed; projection unsound");
                    lo
                } else {
                    (&lo + &up) / BigRational::from_integer(2.into())
                }
            }
        };
        point.push(value);
    }
    Some(point)
}

// ---------------------------------------------------------------------------
// Nonlinear path: branch and prune over the simplex.
// ---------------------------------------------------------------------------

enum BnbResult {
    Sat(Vec<BigRational>),
    /// Some boxes hit the resolution limit without a certificate.
    Exhausted,
    /// Every box was pruned by rigorous interval bounds.
    AllPruned,
}

fn branch_and_prune(
    pair: &OneStepPair,
    constraints: &[MeasureConstraint],
    support: &[usize],
    eps: &BigRational,
) -> BnbResult {
    let m = support.len();
    let one = BigRational::one();
    let zero = BigRational::zero();
    let mut stack: Vec<(Vec<BigRational>, Vec<BigRational>)> =
        vec![(vec![zero.clone(); m], vec![one.clone(); m])];
    let mut unresolved = false;

    while let Some((lo, hi)) = stack.pop() {
        // Simplex pruning: the box must admit Σy = 1.
        let sum_lo: BigRational = lo.iter().cloned().sum();
        let sum_hi: BigRational = hi.iter().cloned().sum();
        if sum_lo > one || sum_hi < one {
            continue;
        }
        // Constraint pruning via interval evaluation.
        let mut pruned = false;
        for c in constraints {
            let (arg_lo, arg_hi) = measure_intervals(c, support, &lo, &hi);
            let (p_lo, p_hi) = c.poly.eval_interval(&arg_lo, &arg_hi);
            if c.complemented {
                // Need p ≤ 0 somewhere in the box.
                if p_lo.is_positive() {
                    pruned = true;
                    break;
                }
            } else {
                // Need p > 0 somewhere in the box.
                if !p_hi.is_positive() {
                    pruned = true;
                    break;
                }
            }
        }
        if pruned {
            continue;
        }
        // Candidate: normalized midpoint, certified exactly.
        let mid: Vec<BigRational> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (l + h) / BigRational::from_integer(2.into()))
            .collect();
        let total: BigRational = mid.iter().cloned().sum();
        if total.is_positive() {
            let cand: Vec<BigRational> = mid.iter().map(|v| v / &total).collect();
            if certify(pair, constraints, support, &cand) {
                let mut weights = vec![BigRational::zero(); pair.theta.len()];
                for (j, &idx) in support.iter().enumerate() {
                    weights[idx] = cand[j].clone();
                }
                return BnbResult::Sat(weights);
            }
        }
        // Split or give up at resolution.
        let (widest, width) = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| h - l)
            .enumerate()
            .max_by(|(_, a), (_, b)| a.cmp(b))
            .expect("nonempty box");
        if width < *eps {
            unresolved = true;
            continue;
        }
        let midpoint = (&lo[widest] + &hi[widest]) / BigRational::from_integer(2.into());
        let mut hi_left = hi.clone();
        hi_left[widest] = midpoint.clone();
        let mut lo_right = lo.clone();
        lo_right[widest] = midpoint;
        stack.push((lo, hi_left));
        stack.push((lo_right, hi));
    }
    if unresolved {
        BnbResult::Exhausted
    } else {
        BnbResult::AllPruned
    }
}

/// Per-argument measure intervals for a constraint over the box, using
/// `s = 1 - t` for complemented positions, clipped into `[0, 1]`.
fn measure_intervals(
    c: &MeasureConstraint,
    support: &[usize],
    lo: &[BigRational],
    hi: &[BigRational],
) -> (Vec<BigRational>, Vec<BigRational>) {
    let one = BigRational::one();
    let zero = BigRational::zero();
    let mut arg_lo = Vec::with_capacity(c.member.len());
    let mut arg_hi = Vec::with_capacity(c.member.len());
    for mem in &c.member {
        let mut t_lo = BigRational::zero();
        let mut t_hi = BigRational::zero();
        for (j, &idx) in support.iter().enumerate() {
            if mem[idx] {
                t_lo += &lo[j];
                t_hi += &hi[j];
            }
        }
        if t_hi > one {
            t_hi = one.clone();
        }
        if c.complemented {
            let s_lo = (&one - &t_hi).max(zero.clone());
            let s_hi = (&one - &t_lo).max(zero.clone());
            arg_lo.push(s_lo);
            arg_hi.push(s_hi);
        } else {
            arg_lo.push(t_lo);
            arg_hi.push(t_hi);
        }
    }
    (arg_lo, arg_hi)
}

/// Exact rational certification of a candidate distribution.
fn certify(
    pair: &OneStepPair,
    constraints: &[MeasureConstraint],
    support: &[usize],
    cand: &[BigRational],
) -> bool {
    let _ = pair;
    if cand.iter().any(|v| v.is_negative()) {
        return false;
    }
    let total: BigRational = cand.iter().cloned().sum();
    if !total.is_one() {
        return false;
    }
    for c in constraints {
        let args: Vec<BigRational> = c
            .member
            .iter()
            .map(|mem| {
                let t: BigRational = support
                    .iter()
                    .enumerate()
                    .filter(|(_, &idx)| mem[idx])
                    .map(|(j, _)| cand[j].clone())
                    .sum();
                if c.complemented {
                    BigRational::one() - t
                } else {
                    t
                }
            })
            .collect();
        let v = c.poly.eval(&args);
        let ok = if c.complemented {
            !v.is_positive()
        } else {
            v.is_positive()
        };
        if !ok {
            return false;
        }
    }
    true
}
