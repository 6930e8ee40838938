//! Model checking games: a parity-game characterization of formula
//! satisfaction on a concrete model, used at desk scale to cross-check the
//! Kleene model checker.
//!
//! Nodes are pairs of a state and a closure formula, plus challenge nodes
//! holding one subset of states per modal argument position. The existential
//! player owns disjunctions, fixpoint literals, modal literals and ⊥; the
//! universal player owns conjunctions and ⊤ and challenges modal moves.

use std::collections::{BTreeSet, HashMap};

use crate::closure::{ClosureTable, FKind, FormulaId};
use crate::games::semantics::Coalgebra;
use crate::games::{ParityGame, Player};
use crate::Error;

pub struct McGame {
    pub game: ParityGame,
    /// Node id of `(state, formula)`.
    pub pair_node: HashMap<(usize, FormulaId), usize>,
}

/// Builds the model checking game for all pairs `(state, closure formula)`.
/// `cap` bounds the number of game nodes (the challenge nodes are
/// exponential in the state count).
pub fn build_mc_game(model: &Coalgebra, table: &ClosureTable, cap: usize) -> Result<McGame, Error> {
    let n_states = model.num_states;
    let mut game = ParityGame::default();
    let mut pair_node = HashMap::new();

    // Formula nodes first, so their ids are dense and predictable.
    for x in 0..n_states {
        for id in table.all_ids() {
            let owner = match table.kind(id) {
                FKind::Or(..) | FKind::Modal { .. } | FKind::Fix { .. } | FKind::Bot => {
                    Player::Exists
                }
                FKind::And(..) | FKind::Top => Player::Forall,
            };
            let priority = table.priority[id as usize] - 1;
            let v = game.add_node(owner, priority);
            pair_node.insert((x, id), v);
        }
    }

    for x in 0..n_states {
        for id in table.all_ids() {
            let v = pair_node[&(x, id)];
            match table.kind(id).clone() {
                FKind::Top | FKind::Bot => {}
                FKind::And(l, r) | FKind::Or(l, r) => {
                    game.add_move(v, pair_node[&(x, l)]);
                    game.add_move(v, pair_node[&(x, r)]);
                }
                FKind::Fix { unfold, .. } => {
                    game.add_move(v, pair_node[&(x, unfold)]);
                }
                FKind::Modal { args } => {
                    let op = table.modal_op(id).expect("modal literal").clone();
                    let arity = args.len();
                    if n_states * arity > 16 {
                        return Err(Error::Budget(
                            "model checking game: challenge tuple space too large".into(),
                        ));
                    }
                    // Enumerate argument-set tuples with ξ(x) in the lifting.
                    let subsets: Vec<BTreeSet<usize>> = (0..(1usize << n_states))
                        .map(|mask| (0..n_states).filter(|&s| mask & (1 << s) != 0).collect())
                        .collect();
                    let mut tuple = vec![0usize; arity];
                    loop {
                        let sets: Vec<&BTreeSet<usize>> =
                            tuple.iter().map(|&m| &subsets[m]).collect();
                        if model.modal_holds(x, &op, &sets) {
                            let challenge = game.add_node(Player::Forall, 0);
                            game.add_move(v, challenge);
                            for (i, &mask) in tuple.iter().enumerate() {
                                for y in subsets[mask].iter() {
                                    game.add_move(challenge, pair_node[&(*y, args[i])]);
                                }
                            }
                        }
                        // Next tuple in mixed radix.
                        let mut pos = 0;
                        loop {
                            if pos == arity {
                                break;
                            }
                            tuple[pos] += 1;
                            if tuple[pos] < subsets.len() {
                                break;
                            }
                            tuple[pos] = 0;
                            pos += 1;
                        }
                        if pos == arity {
                            break;
                        }
                        if game.len() > cap {
                            return Err(Error::Budget(
                                "model checking game exceeded node cap".into(),
                            ));
                        }
                    }
                }
            }
            if game.len() > cap {
                return Err(Error::Budget("model checking game exceeded node cap".into()));
            }
        }
    }
    Ok(McGame { game, pair_node })
}
