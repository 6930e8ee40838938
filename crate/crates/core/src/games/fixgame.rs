//! Fixpoint games for nested fixpoints of monotone set functions.
//!
//! For `E = η_m X_m. ... η_1 X_1. f(X_1, ..., X_m)` over a finite universe
//! (with `η_l = μ` for odd `l`), the existential player wins an element `q`
//! of the game below iff `q` lies in the nested fixpoint. The game
//! materializes every argument tuple, so it is a desk-scale test oracle
//! only; the engine evaluates the fixpoint by iteration instead.

use std::collections::BTreeSet;

use crate::games::{ParityGame, Player};
use crate::Error;

/// Builds the fixpoint game. Returns the game and the node ids of the
/// universe elements. `f` is the monotone set function; `depth` is `m`.
pub fn build_fixpoint_game(
    f: &dyn Fn(&[BTreeSet<usize>]) -> BTreeSet<usize>,
    universe: usize,
    depth: usize,
) -> Result<(ParityGame, Vec<usize>), Error> {
    let subsets_bits = universe
        .checked_mul(depth)
        .filter(|&b| b <= 20)
        .ok_or_else(|| Error::Budget("fixpoint game: tuple space too large".into()))?;
    let _ = subsets_bits;
    let n_subsets = 1usize << universe;

    let mut game = ParityGame::default();
    let element_nodes: Vec<usize> = (0..universe)
        .map(|_| game.add_node(Player::Exists, 0))
        .collect();

    let subsets: Vec<BTreeSet<usize>> = (0..n_subsets)
        .map(|mask| (0..universe).filter(|&q| mask & (1 << q) != 0).collect())
        .collect();

    // Every tuple (A_1, ..., A_m) of subsets, in mixed radix.
    let mut tuple_masks = vec![0usize; depth];
    loop {
        let tuple: Vec<BTreeSet<usize>> = tuple_masks
            .iter()
            .map(|&m| subsets[m].clone())
            .collect();
        let image = f(&tuple);
        if !image.is_empty() {
            let tuple_node = game.add_node(Player::Forall, 0);
            for &q in &image {
                game.add_move(element_nodes[q], tuple_node);
            }
            // The universal player challenges q' ∈ A_l, triggering priority l.
            for (l_idx, mask) in tuple_masks.iter().enumerate() {
                let l = (l_idx + 1) as u32;
                for q in subsets[*mask].iter() {
                    let via = game.add_node(Player::Forall, l);
                    game.add_move(tuple_node, via);
                    game.add_move(via, element_nodes[*q]);
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == depth {
                break;
            }
            tuple_masks[pos] += 1;
            if tuple_masks[pos] < n_subsets {
                break;
            }
            tuple_masks[pos] = 0;
            pos += 1;
        }
        if pos == depth {
            break;
        }
    }
    Ok((game, element_nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::zielonka_solve;

    #[test]
    fn constant_full_function_wins_everywhere() {
        let universe = 3;
        let f = |_: &[BTreeSet<usize>]| (0..universe).collect::<BTreeSet<usize>>();
        let (game, nodes) = build_fixpoint_game(&f, universe, 2).unwrap();
        let sol = zielonka_solve(&game);
        for &v in &nodes {
            assert_eq!(sol.winner[v], Player::Exists);
        }
    }

    #[test]
    fn constant_empty_function_loses_everywhere() {
        let f = |_: &[BTreeSet<usize>]| BTreeSet::new();
        let (game, nodes) = build_fixpoint_game(&f, 3, 2).unwrap();
        let sol = zielonka_solve(&game);
        for &v in &nodes {
            assert_eq!(sol.winner[v], Player::Forall);
        }
    }

    #[test]
    fn mu_level_requires_wellfounded_support() {
        // depth 1 (μ): f(X) = X has least fixpoint ∅, so everyone loses;
        // f(X) = X ∪ {0} has least fixpoint {0}.
        let f_id = |x: &[BTreeSet<usize>]| x[0].clone();
        let (game, nodes) = build_fixpoint_game(&f_id, 2, 1).unwrap();
        let sol = zielonka_solve(&game);
        assert!(nodes.iter().all(|&v| sol.winner[v] == Player::Forall));

        let f_seed = |x: &[BTreeSet<usize>]| {
            let mut s = x[0].clone();
            s.insert(0);
            s
        };
        let (game, nodes) = build_fixpoint_game(&f_seed, 2, 1).unwrap();
        let sol = zielonka_solve(&game);
        assert_eq!(sol.winner[nodes[0]], Player::Exists);
        assert_eq!(sol.winner[nodes[1]], Player::Forall);
    }

    #[test]
    fn nu_level_keeps_self_supporting_sets() {
        // depth 2, f(X1, X2) = X2 ∩ {0}: E = νX2.μX1.f = {0}.
        let f = |x: &[BTreeSet<usize>]| {
            let mut s = BTreeSet::new();
            if x[1].contains(&0) {
                s.insert(0);
            }
            s
        };
        let (game, nodes) = build_fixpoint_game(&f, 2, 2).unwrap();
        let sol = zielonka_solve(&game);
        assert_eq!(sol.winner[nodes[0]], Player::Exists);
        assert_eq!(sol.winner[nodes[1]], Player::Forall);
    }
}
