//! The nondeterministic tracking parity automaton over choice and selection
//! letters.
//!
//! Letters encode steps through a prospective model: a choice letter picks
//! one disjunct per disjunction for a propositional step; a selection letter
//! names the modal-literal argument slots tracked across a modal step.
//! Letters are never materialized globally (there are exponentially many);
//! [`relevant_letters`] enumerates the quotient that matters for one node
//! label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::closure::{ClosureTable, FKind, FormulaId};
use crate::Error;

/// One tracked argument position of a modal literal. For unary operators
/// this is just the literal itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub lit: FormulaId,
    pub arg: u8,
}

/// A letter of the tracking alphabet, in canonical (ordered) representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// Maps each relevant disjunction to `false` (left) or `true` (right).
    Choice(BTreeMap<FormulaId, bool>),
    /// The set of tracked modal argument slots.
    Selection(BTreeSet<Slot>),
}

impl Letter {
    pub fn is_choice(&self) -> bool {
        matches!(self, Letter::Choice(_))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Choice(m) => {
                write!(f, "tau{{")?;
                for (i, (d, right)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}", d, if *right { "R" } else { "L" })?;
                }
                write!(f, "}}")
            }
            Letter::Selection(s) => {
                write!(f, "kappa{{")?;
                for (i, slot) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}.{}", slot.lit, slot.arg)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// The tracking automaton `A_χ`: states are the closure elements; a choice
/// letter processes all propositional connectives at once while modal
/// literals stutter, and a selection letter steps selected modal literals to
/// their arguments. Priorities come from the closure table.
pub struct TrackingNpa<'a> {
    pub table: &'a ClosureTable,
}

impl<'a> TrackingNpa<'a> {
    pub fn new(table: &'a ClosureTable) -> TrackingNpa<'a> {
        TrackingNpa { table }
    }

    pub fn num_states(&self) -> usize {
        self.table.n0()
    }

    pub fn priority(&self, psi: FormulaId) -> u32 {
        self.table.priority[psi as usize]
    }

    pub fn initial(&self) -> FormulaId {
        self.table.chi_id()
    }

    /// The transition relation. Nondeterminism arises only at conjunctions
    /// (both conjuncts are tracked) and at selected multi-argument modal
    /// literals (each selected slot is tracked).
    pub fn delta(&self, psi: FormulaId, letter: &Letter) -> Vec<FormulaId> {
        match letter {
            Letter::Choice(tau) => match self.table.kind(psi) {
                FKind::Top | FKind::Bot => vec![],
                FKind::Or(l, r) => {
                    let right = *tau
                        .get(&psi)
                        .expect("choice letter undefined on a disjunction of the label");
                    vec![if right { *r } else { *l }]
                }
                FKind::And(l, r) => vec![*l, *r],
                FKind::Fix { unfold, .. } => vec![*unfold],
                FKind::Modal { .. } => vec![psi],
            },
            Letter::Selection(kappa) => match self.table.kind(psi) {
                FKind::Modal { args } => args
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| kappa.contains(&Slot { lit: psi, arg: *i as u8 }))
                    .map(|(_, &a)| a)
                    .collect(),
                _ => vec![],
            },
        }
    }

    /// Disjunctions occurring in a label.
    pub fn label_disjunctions(&self, label: &[FormulaId]) -> Vec<FormulaId> {
        label
            .iter()
            .copied()
            .filter(|&id| matches!(self.table.kind(id), FKind::Or(..)))
            .collect()
    }

    /// Argument slots of the modal literals occurring in a label.
    pub fn label_slots(&self, label: &[FormulaId]) -> Vec<Slot> {
        let mut slots = Vec::new();
        for &id in label {
            if let FKind::Modal { args } = self.table.kind(id) {
                for i in 0..args.len() {
                    slots.push(Slot { lit: id, arg: i as u8 });
                }
            }
        }
        slots
    }

    /// Enumerates the letter quotient relevant for a node label: choice
    /// functions restricted to the label's disjunctions and selections
    /// restricted to the label's modal argument slots, both in canonical
    /// order. Transitions of label formulae depend only on this restriction.
    pub fn relevant_letters(&self, label: &[FormulaId]) -> Result<(Vec<Letter>, Vec<Letter>), Error> {
        let disjunctions = self.label_disjunctions(label);
        let slots = self.label_slots(label);
        const MAX_BITS: usize = 16;
        if disjunctions.len() > MAX_BITS || slots.len() > MAX_BITS {
            return Err(Error::Budget(format!(
                "letter quotient too large: {} disjunctions, {} slots",
                disjunctions.len(),
                slots.len()
            )));
        }
        let mut choices = Vec::with_capacity(1 << disjunctions.len());
        for mask in 0u32..(1u32 << disjunctions.len()) {
            let map: BTreeMap<FormulaId, bool> = disjunctions
                .iter()
                .enumerate()
                .map(|(i, &d)| (d, mask & (1 << i) != 0))
                .collect();
            choices.push(Letter::Choice(map));
        }
        let mut selections = Vec::with_capacity(1 << slots.len());
        for mask in 0u32..(1u32 << slots.len()) {
            let set: BTreeSet<Slot> = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &s)| s)
                .collect();
            selections.push(Letter::Selection(set));
        }
        Ok((choices, selections))
    }

    /// Plain-text dump of the transition structure restricted to the
    /// letters relevant per state label `{state}` itself (for --dump-npa).
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "tracking automaton: {} states", self.num_states());
        for id in self.table.all_ids() {
            let _ = writeln!(
                out,
                "state {} prio {} : {}",
                id,
                self.priority(id),
                self.table.formula(id)
            );
            let label = [id];
            if let Ok((choices, selections)) = self.relevant_letters(&label) {
                for letter in choices.iter().chain(&selections) {
                    let succ = self.delta(id, letter);
                    let succ: Vec<String> = succ.iter().map(|s| s.to_string()).collect();
                    let _ = writeln!(out, "  {} -> {{{}}}", letter, succ.join(","));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::fl_closure;
    use crate::formula::{normalize, Formula, Logic, LogicSpec};
    use crate::parse::parse;

    fn table(text: &str) -> ClosureTable {
        let spec = LogicSpec::single(Logic::Relational);
        fl_closure(&normalize(&parse(text, &spec).unwrap()))
    }

    #[test]
    fn choice_picks_disjunct() {
        let t = table("mu X. (p | dia X)");
        let npa = TrackingNpa::new(&t);
        let chi = t.chi.clone();
        let disj = Formula::or(
            Formula::atom(Logic::Relational, "p"),
            Formula::diamond(chi),
        );
        let disj_id = t.id_of(&disj).unwrap();
        let p_id = t.id_of(&Formula::atom(Logic::Relational, "p")).unwrap();
        let tau = Letter::Choice([(disj_id, false)].into());
        assert_eq!(npa.delta(disj_id, &tau), vec![p_id]);
    }

    #[test]
    fn modal_literal_tracked_only_through_selection() {
        let t = table("mu X. (p | dia X)");
        let npa = TrackingNpa::new(&t);
        let dia_chi = t.id_of(&Formula::diamond(t.chi.clone())).unwrap();
        let chi_id = t.chi_id();
        let kappa = Letter::Selection([Slot { lit: dia_chi, arg: 0 }].into());
        assert_eq!(npa.delta(dia_chi, &kappa), vec![chi_id]);
        let empty = Letter::Selection(BTreeSet::new());
        assert!(npa.delta(dia_chi, &empty).is_empty());
    }

    #[test]
    fn fixpoint_literal_tracks_to_unfolding() {
        let t = table("mu X. (p | dia X)");
        let npa = TrackingNpa::new(&t);
        let tau = Letter::Choice(BTreeMap::new());
        let unfolding = Formula::or(
            Formula::atom(Logic::Relational, "p"),
            Formula::diamond(t.chi.clone()),
        );
        assert_eq!(
            npa.delta(t.chi_id(), &tau),
            vec![t.id_of(&unfolding).unwrap()]
        );
    }

    #[test]
    fn modal_stuttering_under_choices() {
        let t = table("mu X. (p | dia X)");
        let npa = TrackingNpa::new(&t);
        let dia_chi = t.id_of(&Formula::diamond(t.chi.clone())).unwrap();
        let tau = Letter::Choice(BTreeMap::new());
        assert_eq!(npa.delta(dia_chi, &tau), vec![dia_chi]);
    }

    #[test]
    fn relevant_letter_counts() {
        let t = table("mu X. (p | dia X)");
        let npa = TrackingNpa::new(&t);
        let disj = Formula::or(
            Formula::atom(Logic::Relational, "p"),
            Formula::diamond(t.chi.clone()),
        );
        let label = vec![
            t.id_of(&disj).unwrap(),
            t.id_of(&Formula::diamond(t.chi.clone())).unwrap(),
        ];
        let (choices, selections) = npa.relevant_letters(&label).unwrap();
        assert_eq!(choices.len(), 2);
        assert_eq!(selections.len(), 2);
        // No disjunctions: a single empty-restriction choice.
        let (choices, selections) = npa.relevant_letters(&[t.chi_id()]).unwrap();
        assert_eq!(choices.len(), 1);
        assert_eq!(selections.len(), 1);
        // Empty label.
        let (choices, selections) = npa.relevant_letters(&[]).unwrap();
        assert_eq!(choices.len(), 1);
        assert_eq!(selections.len(), 1);
    }

    #[test]
    fn priorities_one_except_fixpoints() {
        let t = table("nu X. mu Y. (p & dia X) | dia Y");
        let npa = TrackingNpa::new(&t);
        for id in t.all_ids() {
            match t.kind(id) {
                FKind::Fix { var, is_mu, .. } => {
                    let expect = if *is_mu { 2 * t.ad[var] } else { 2 * t.ad[var] - 1 };
                    assert_eq!(npa.priority(id), expect);
                }
                _ => assert_eq!(npa.priority(id), 1),
            }
        }
    }

    #[test]
    fn quotient_soundness_under_full_letters() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = table("nu X. mu Y. (p & dia X) | (dia Y | box p)");
        let npa = TrackingNpa::new(&t);
        let all: Vec<FormulaId> = t.all_ids().collect();
        let all_disj = npa.label_disjunctions(&all);
        let all_slots = npa.label_slots(&all);
        for _ in 0..200 {
            // A random label and two random full letters agreeing on its
            // relevant restriction.
            let label: Vec<FormulaId> = all
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let base: BTreeMap<FormulaId, bool> =
                all_disj.iter().map(|&d| (d, rng.gen_bool(0.5))).collect();
            let mut other = base.clone();
            let label_disj = npa.label_disjunctions(&label);
            for (&d, v) in other.iter_mut() {
                if !label_disj.contains(&d) && rng.gen_bool(0.5) {
                    *v = !*v;
                }
            }
            for &psi in &label {
                assert_eq!(
                    npa.delta(psi, &Letter::Choice(base.clone())),
                    npa.delta(psi, &Letter::Choice(other.clone()))
                );
            }
            // Same for selections: agreement on label slots.
            let label_slots: BTreeSet<Slot> = npa.label_slots(&label).into_iter().collect();
            let base_sel: BTreeSet<Slot> = all_slots
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let mut other_sel = base_sel.clone();
            for &s in &all_slots {
                if !label_slots.contains(&s) && rng.gen_bool(0.5) {
                    if !other_sel.remove(&s) {
                        other_sel.insert(s);
                    }
                }
            }
            for &psi in &label {
                assert_eq!(
                    npa.delta(psi, &Letter::Selection(base_sel.clone())),
                    npa.delta(psi, &Letter::Selection(other_sel.clone()))
                );
            }
        }
    }
}
