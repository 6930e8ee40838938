//! Relational one-step satisfiability.
//!
//! `(γ, Θ)` is satisfiable over `P(-) × P(P)` iff the atom literals are
//! jointly consistent and for each `dia a ∈ γ` there is a profile `u ∈ Θ`
//! with `a ∈ u` that also contains `b` for every `box b ∈ γ`. Runs in
//! `O(size(γ) · |V| · |Θ|)`.

use std::collections::BTreeSet;

use crate::formula::ModalKind;
use crate::Error;

use super::{atom_side_conditions, OneStepPair, OsOutcome, OsWitness};

pub fn oss_relational(pair: &OneStepPair) -> Result<OsOutcome, Error> {
    let atoms = match atom_side_conditions(&pair.gamma) {
        Some(atoms) => atoms,
        None => return Ok(OsOutcome::Unsat),
    };
    let boxes: Vec<usize> = pair
        .gamma
        .iter()
        .filter(|l| matches!(l.op.kind, ModalKind::Box))
        .map(|l| l.args[0])
        .collect();
    let diamonds: Vec<usize> = pair
        .gamma
        .iter()
        .filter(|l| matches!(l.op.kind, ModalKind::Diamond))
        .map(|l| l.args[0])
        .collect();
    for lit in &pair.gamma {
        match lit.op.kind {
            ModalKind::Diamond | ModalKind::Box | ModalKind::Atom(_) | ModalKind::NegAtom(_) => {}
            _ => {
                return Err(Error::Contract(format!(
                    "non-relational literal {} in relational backend",
                    lit.op
                )))
            }
        }
    }

    let mut chosen = BTreeSet::new();
    for &a in &diamonds {
        let u = pair
            .theta
            .iter()
            .position(|u| u.contains(&a) && boxes.iter().all(|b| u.contains(b)));
        match u {
            Some(i) => {
                chosen.insert(i);
            }
            None => return Ok(OsOutcome::Unsat),
        }
    }
    // Boxes over the chosen set hold by construction; with no diamonds the
    // empty successor set satisfies every box vacuously.
    Ok(OsOutcome::Sat(OsWitness::Relational { chosen, atoms }))
}
