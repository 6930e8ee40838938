//! Brute-force one-step oracles, used only in tests and the self-check
//! subcommand. Each oracle decides satisfiability by a route independent of
//! the production backend it checks:
//!
//! * relational — enumerate every subset of Θ together with the forced atom
//!   set and evaluate all liftings directly;
//! * graded — enumerate multiplicity vectors up to a caller-supplied cap
//!   (default twice the backend's bound, which validates the `index + 1`
//!   truncation);
//! * probabilistic (linear only) — exact rational vertex enumeration of the
//!   nonstrict relaxation; the centroid of its vertices is a relative
//!   interior point, so checking the strict constraints there is complete.
use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::formula::{Logic, LogicSpec, ModalKind};
use crate::Error;

use super::{
    atom_side_conditions, validate_witness, OneStepPair, OsOutcome, OsWitness,
};

const MAX_V: usize = 8;
const MAX_THETA: usize = 12;

/// Decides a one-step pair by brute force. `graded_bound` caps the
/// multiplicity enumeration; it defaults to `2 * ((max diamond index) + 1)`.
pub fn oss_brute(
    pair: &OneStepPair,
    spec: &LogicSpec,
    graded_bound: Option<u64>,
) -> Result<OsOutcome, Error> {
    if pair.num_vars > MAX_V || pair.theta.len() > MAX_THETA {
        return Err(Error::Budget(format!(
            "brute oracle limited to |V| <= {MAX_V}, |Theta| <= {MAX_THETA}"
        )));
    }
    if !spec.is_fusion() {
        return brute_component(pair, spec.components()[0], graded_bound);
    }
    let parts = pair.partition(spec)?;
    let mut witnesses = Vec::new();
    for (i, gamma) in parts.into_iter().enumerate() {
        let sub = OneStepPair {
            num_vars: pair.num_vars,
            gamma,
            theta: pair.theta.clone(),
        };
        match brute_component(&sub, spec.components()[i], graded_bound)? {
            OsOutcome::Sat(w) => witnesses.push(w),
            other => return Ok(other),
        }
    }
    Ok(OsOutcome::Sat(OsWitness::Fusion(witnesses)))
}

fn brute_component(
    pair: &OneStepPair,
    logic: Logic,
    graded_bound: Option<u64>,
) -> Result<OsOutcome, Error> {
    match logic {
        Logic::Relational => brute_relational(pair),
        Logic::Graded => brute_graded(pair, graded_bound),
        Logic::Probabilistic => brute_prob_linear(pair),
    }
}

fn brute_relational(pair: &OneStepPair) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(a) => a,
        None => return Ok(OsOutcome::Unsat),
    };
    let n = pair.theta.len();
    let spec = LogicSpec::single(Logic::Relational);
    for mask in 0u32..(1u32 << n) {
        let chosen: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let w = OsWitness::Relational { chosen, atoms: atoms.clone() };
        if validate_witness(pair, &w, &spec).is_ok() {
            return Ok(OsOutcome::Sat(w));
        }
    }
    Ok(OsOutcome::Unsat)
}

fn brute_graded(pair: &OneStepPair, bound: Option<u64>) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(a) => a,
        None => return Ok(OsOutcome::Unsat),
    };
    let mut max_index: u64 = 0;
    let mut has_diamond = false;
    for lit in &pair.gamma {
        if let ModalKind::DiaPoly(p) = &lit.op.kind {
            has_diamond = true;
            let idx: u64 = p
                .graded_index()
                .try_into()
                .map_err(|_| Error::Budget("graded index too large for brute oracle".into()))?;
            max_index = max_index.max(idx);
        }
    }
    let default_bound = if has_diamond { 2 * (max_index + 1) } else { 2 };
    let bound = bound.unwrap_or(default_bound);
    if bound > 64 {
        return Err(Error::Budget("graded brute bound too large".into()));
    }

    // Literal data: per argument position, theta membership (complemented
    // for boxes), updated incrementally during the enumeration.
    struct Lit {
        poly: crate::poly::Polynomial,
        member: Vec<Vec<bool>>,
        is_diamond: bool,
    }
    let mut lits: Vec<Lit> = Vec::new();
    for l in &pair.gamma {
        match &l.op.kind {
            ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) => {
                let dia = matches!(l.op.kind, ModalKind::DiaPoly(_));
                lits.push(Lit {
                    poly: p.clone(),
                    member: l
                        .args
                        .iter()
                        .map(|&a| {
                            pair.theta
                                .iter()
                                .map(|u| if dia { u.contains(&a) } else { !u.contains(&a) })
                                .collect()
                        })
                        .collect(),
                    is_diamond: dia,
                });
            }
            _ => {}
        }
    }

    let n = pair.theta.len();
    let mut beta = vec![0u64; n];
    // Running measures per (literal, argument position).
    let mut measures: Vec<Vec<u64>> = lits.iter().map(|l| vec![0; l.member.len()]).collect();

    fn leaf_ok(lits: &[Lit], measures: &[Vec<u64>]) -> bool {
        for (l, ms) in lits.iter().zip(measures) {
            let args: Vec<BigRational> = ms
                .iter()
                .map(|&m| BigRational::from_integer(BigInt::from(m)))
                .collect();
            let v = l.poly.eval(&args);
            let ok = if l.is_diamond {
                v.is_positive()
            } else {
                !v.is_positive()
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn rec(
        i: usize,
        n: usize,
        bound: u64,
        lits: &[Lit],
        beta: &mut Vec<u64>,
        measures: &mut Vec<Vec<u64>>,
    ) -> bool {
        if i == n {
            return leaf_ok(lits, measures);
        }
        for v in 0..=bound {
            beta[i] = v;
            for (l, ms) in lits.iter().zip(measures.iter_mut()) {
                for (pos, mem) in l.member.iter().enumerate() {
                    if mem[i] {
                        ms[pos] += v;
                    }
                }
            }
            if rec(i + 1, n, bound, lits, beta, measures) {
                return true;
            }
            for (l, ms) in lits.iter().zip(measures.iter_mut()) {
                for (pos, mem) in l.member.iter().enumerate() {
                    if mem[i] {
                        ms[pos] -= v;
                    }
                }
            }
        }
        beta[i] = 0;
        false
    }

    if rec(0, n, bound, &lits, &mut beta, &mut measures) {
        Ok(OsOutcome::Sat(OsWitness::Graded {
            mult: beta.into_iter().map(BigInt::from).collect(),
            atoms,
        }))
    } else {
        Ok(OsOutcome::Unsat)
    }
}

/// Exact rational Gaussian elimination; `None` when the system is singular
/// or inconsistent.
fn solve_square(mut mat: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = mat[col][col].clone();
        for c in col..n {
            mat[col][c] /= &p;
        }
        rhs[col] /= &p;
        for r in 0..n {
            if r != col && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in col..n {
                    let v = &mat[col][c] * &factor;
                    mat[r][c] -= v;
                }
                let v = &rhs[col] * &factor;
                rhs[r] -= v;
            }
        }
    }
    Some(rhs)
}

/// Brute probabilistic decision for linear pairs: enumerate the vertices of
/// the nonstrict relaxation polytope (inside the simplex), then test all
/// constraints exactly at the vertex centroid. The centroid lies in the
/// relative interior, and for every strict constraint `p > 0` with
/// `p ≥ 0` on the polytope, positivity at any vertex forces positivity at
/// the centroid — so the centroid check is complete.
fn brute_prob_linear(pair: &OneStepPair) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(a) => a,
        None => return Ok(OsOutcome::Unsat),
    };
    let m = pair.theta.len();
    if m == 0 {
        return Ok(OsOutcome::Unsat);
    }

    // Linear constraints over the full weight vector: (coeffs, cst, strict)
    // meaning Σ c·y + cst ≥ 0 (> 0 when strict).
    let mut rows: Vec<(Vec<BigRational>, BigRational, bool)> = Vec::new();
    for j in 0..m {
        let mut c = vec![BigRational::zero(); m];
        c[j] = BigRational::one();
        rows.push((c, BigRational::zero(), false));
    }
    for lit in &pair.gamma {
        match &lit.op.kind {
            ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) => {
                if !p.is_linear() {
                    return Err(Error::Contract(
                        "probabilistic brute oracle handles linear pairs only".into(),
                    ));
                }
                let dia = matches!(lit.op.kind, ModalKind::DiaPoly(_));
                let c0 = p.constant_coeff();
                let mut coeffs = vec![BigRational::zero(); m];
                let mut cst;
                if dia {
                    cst = c0;
                    for (i, &a) in lit.args.iter().enumerate() {
                        let ci = p.linear_coeff(i);
                        for (j, u) in pair.theta.iter().enumerate() {
                            if u.contains(&a) {
                                coeffs[j] += &ci;
                            }
                        }
                    }
                } else {
                    cst = -c0;
                    for (i, &a) in lit.args.iter().enumerate() {
                        let ci = p.linear_coeff(i);
                        cst -= &ci;
                        for (j, u) in pair.theta.iter().enumerate() {
                            if u.contains(&a) {
                                coeffs[j] += &ci;
                            }
                        }
                    }
                }
                rows.push((coeffs, cst, dia));
            }
            _ => {}
        }
    }

    // Candidate vertices: choose m-1 rows active (= 0) plus Σ y = 1.
    let mut vertices: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    let row_count = rows.len();
    let mut active = vec![0usize; m.saturating_sub(1)];
    enumerate_combinations(row_count, m.saturating_sub(1), &mut active, &mut |combo| {
        let mut mat: Vec<Vec<BigRational>> = Vec::with_capacity(m);
        let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
        mat.push(vec![BigRational::one(); m]);
        rhs.push(BigRational::one());
        for &r in combo {
            mat.push(rows[r].0.clone());
            rhs.push(-rows[r].1.clone());
        }
        if let Some(point) = solve_square(mat, rhs) {
            let feasible = rows.iter().all(|(c, cst, _)| {
                let mut acc = cst.clone();
                for (ci, yi) in c.iter().zip(&point) {
                    acc += ci * yi;
                }
                !acc.is_negative()
            });
            if feasible {
                vertices.insert(point);
            }
        }
    });

    if vertices.is_empty() {
        return Ok(OsOutcome::Unsat);
    }
    let count = BigRational::from_integer(BigInt::from(vertices.len()));
    let mut centroid = vec![BigRational::zero(); m];
    for v in &vertices {
        for (c, vi) in centroid.iter_mut().zip(v) {
            *c += vi;
        }
    }
    for c in centroid.iter_mut() {
        *c /= &count;
    }
    let ok = rows.iter().all(|(c, cst, strict)| {
        let mut acc = cst.clone();
        for (ci, yi) in c.iter().zip(&centroid) {
            acc += ci * yi;
        }
        if *strict {
            acc.is_positive()
        } else {
            !acc.is_negative()
        }
    });
    if ok {
        Ok(OsOutcome::Sat(OsWitness::Probabilistic { weight: centroid, atoms }))
    } else {
        Ok(OsOutcome::Unsat)
    }
}

fn enumerate_combinations(
    n: usize,
    k: usize,
    buf: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    fn rec(start: usize, n: usize, left: usize, buf: &mut Vec<usize>, pos: usize, f: &mut impl FnMut(&[usize])) {
        if left == 0 {
            f(&buf[..pos]);
            return;
        }
        for i in start..n {
            buf[pos] = i;
            rec(i + 1, n, left - 1, buf, pos + 1, f);
        }
    }
    if k == 0 {
        f(&[]);
        return;
    }
    if k > n {
        return;
    }
    rec(0, n, k, buf, 0, f);
}
