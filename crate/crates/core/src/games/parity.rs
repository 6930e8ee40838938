//! Parity game solving: Zielonka's algorithm with positional strategy
//! extraction, a strategy checker, and an independently written
//! McNaughton-style recursion used as a test oracle.
//!
//! Convention: the existential player wins an infinite play iff the highest
//! priority visited infinitely often is even; a player stuck at their own
//! node loses.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    /// The player that likes priority `p` (even favors the existential one).
    pub fn of_priority(p: u32) -> Player {
        if p % 2 == 0 {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

#[derive(Debug, Clone)]
pub struct PgNode {
    pub owner: Player,
    pub priority: u32,
    pub moves: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ParityGame {
    pub nodes: Vec<PgNode>,
}

impl ParityGame {
    pub fn add_node(&mut self, owner: Player, priority: u32) -> usize {
        self.nodes.push(PgNode { owner, priority, moves: Vec::new() });
        self.nodes.len() - 1
    }

    pub fn add_move(&mut self, from: usize, to: usize) {
        self.nodes[from].moves.push(to);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// Positional strategy for the existential player on her winning region.
    pub strategy_exists: Vec<Option<usize>>,
    /// Positional strategy for the universal player on his winning region.
    pub strategy_forall: Vec<Option<usize>>,
}

/// Solves a parity game with Zielonka's recursive algorithm, returning the
/// partition into winning regions and positional winning strategies.
pub fn zielonka_solve(game: &ParityGame) -> Solution {
    // Totalize: a stuck node becomes a self-loop with a priority losing for
    // its owner. No play continues past a stuck node, so this is faithful.
    let n = game.len();
    let mut g = game.clone();
    let mut stuck = vec![false; n];
    for (i, node) in g.nodes.iter_mut().enumerate() {
        if node.moves.is_empty() {
            stuck[i] = true;
            node.moves.push(i);
            node.priority = match node.owner {
                Player::Exists => 1,
                Player::Forall => 2,
            };
        }
    }
    // Predecessor lists for attractor computation.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in g.nodes.iter().enumerate() {
        for &m in &node.moves {
            preds[m].push(i);
        }
    }

    let mut strategy: Vec<Option<usize>> = vec![None; n];
    let alive: Vec<bool> = vec![true; n];
    let winner = solve_rec(&g, &preds, alive, &mut strategy);

    let mut strategy_exists = vec![None; n];
    let mut strategy_forall = vec![None; n];
    for i in 0..n {
        if stuck[i] {
            continue;
        }
        match (winner[i], g.nodes[i].owner) {
            (Player::Exists, Player::Exists) => strategy_exists[i] = strategy[i],
            (Player::Forall, Player::Forall) => strategy_forall[i] = strategy[i],
            _ => {}
        }
    }
    Solution { winner, strategy_exists, strategy_forall }
}

/// Attractor of `target` for `player` within `alive`; records the pulling
/// move for `player`-owned nodes into `strategy` (not overwriting entries
/// for nodes already in `target`).
fn attractor(
    g: &ParityGame,
    preds: &[Vec<usize>],
    alive: &[bool],
    target: &[bool],
    player: Player,
    strategy: &mut [Option<usize>],
) -> Vec<bool> {
    let n = g.len();
    let mut attr = target.to_vec();
    // Count of alive successors not yet known to be in the attractor; every
    // attractor member (including the initial target) is dequeued exactly
    // once and decrements its predecessors then.
    let mut out_count = vec![0usize; n];
    for i in 0..n {
        if alive[i] {
            out_count[i] = g.nodes[i].moves.iter().filter(|&&m| alive[m]).count();
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| alive[i] && attr[i]).collect();
    while let Some(v) = queue.pop_front() {
        for &p in &preds[v] {
            if !alive[p] || attr[p] {
                continue;
            }
            match g.nodes[p].owner == player {
                true => {
                    attr[p] = true;
                    if strategy[p].is_none() {
                        strategy[p] = Some(v);
                    }
                    queue.push_back(p);
                }
                false => {
                    out_count[p] -= 1;
                    if out_count[p] == 0 {
                        attr[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
    }
    attr
}

fn solve_rec(
    g: &ParityGame,
    preds: &[Vec<usize>],
    alive: Vec<bool>,
    strategy: &mut Vec<Option<usize>>,
) -> Vec<Player> {
    let n = g.len();
    let mut winner = vec![Player::Forall; n];
    if !alive.iter().any(|&a| a) {
        return winner;
    }
    let top = (0..n)
        .filter(|&i| alive[i])
        .map(|i| g.nodes[i].priority)
        .max()
        .unwrap();
    let player = Player::of_priority(top);

    let mut target = vec![false; n];
    for i in 0..n {
        if alive[i] && g.nodes[i].priority == top {
            target[i] = true;
        }
    }
    let mut attr_strategy: Vec<Option<usize>> = vec![None; n];
    let attr = attractor(g, preds, &alive, &target, player, &mut attr_strategy);

    let mut sub_alive = alive.clone();
    for i in 0..n {
        if attr[i] {
            sub_alive[i] = false;
        }
    }
    let mut sub_strategy: Vec<Option<usize>> = vec![None; n];
    let sub_winner = solve_rec(g, preds, sub_alive.clone(), &mut sub_strategy);

    let opp = player.opponent();
    let opp_nonempty = (0..n).any(|i| sub_alive[i] && sub_winner[i] == opp);
    if !opp_nonempty {
        // `player` wins everything alive: subgame strategy inside, attractor
        // strategy in A \ Z, and any alive move for top-priority nodes.
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            winner[i] = player;
            if g.nodes[i].owner != player {
                continue;
            }
            strategy[i] = if sub_alive[i] {
                sub_strategy[i]
            } else if target[i] {
                g.nodes[i].moves.iter().copied().find(|&m| alive[m])
            } else {
                attr_strategy[i]
            };
        }
        winner
    } else {
        // The opponent's subgame region extends; recurse on the rest.
        let mut opp_target = vec![false; n];
        for i in 0..n {
            if sub_alive[i] && sub_winner[i] == opp {
                opp_target[i] = true;
            }
        }
        let mut opp_attr_strategy: Vec<Option<usize>> = vec![None; n];
        let opp_attr = attractor(g, preds, &alive, &opp_target, opp, &mut opp_attr_strategy);
        let mut rest_alive = alive.clone();
        for i in 0..n {
            if opp_attr[i] {
                rest_alive[i] = false;
            }
        }
        let mut rest_strategy: Vec<Option<usize>> = vec![None; n];
        let rest_winner = solve_rec(g, preds, rest_alive.clone(), &mut rest_strategy);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if rest_alive[i] {
                winner[i] = rest_winner[i];
                if g.nodes[i].owner == winner[i] {
                    strategy[i] = rest_strategy[i];
                }
            } else {
                // opp_attr region, won by the opponent.
                winner[i] = opp;
                if g.nodes[i].owner == opp {
                    strategy[i] = if opp_target[i] {
                        sub_strategy[i]
                    } else {
                        opp_attr_strategy[i]
                    };
                }
            }
        }
        winner
    }
}

/// Verifies the returned strategies: within each winning region, following
/// the winner's strategy (opponent unconstrained) never leaves the region,
/// never gets the winner stuck, and every cycle in the restricted graph has
/// the winner's parity. Panics on violation; intended for tests.
pub fn verify_strategies(game: &ParityGame, sol: &Solution) {
    for player in [Player::Exists, Player::Forall] {
        let strat = match player {
            Player::Exists => &sol.strategy_exists,
            Player::Forall => &sol.strategy_forall,
        };
        let region: Vec<bool> = sol.winner.iter().map(|&w| w == player).collect();
        // Restricted successor lists.
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); game.len()];
        for (i, node) in game.nodes.iter().enumerate() {
            if !region[i] {
                continue;
            }
            if node.owner == player {
                if let Some(m) = strat[i] {
                    assert!(region[m], "strategy of {player:?} leaves region at {i}");
                    succ[i].push(m);
                } else {
                    assert!(
                        node.moves.is_empty(),
                        "missing strategy for {player:?} at node {i}"
                    );
                    // Stuck at one's own node: losing. Must not be in region.
                    panic!("{player:?} declared winning but stuck at {i}");
                }
            } else {
                for &m in &node.moves {
                    assert!(region[m], "opponent escapes region of {player:?} at {i}");
                    succ[i].push(m);
                }
                // An opponent stuck inside the region is fine (it loses).
            }
        }
        // No cycle in the restricted graph may have the opponent's parity as
        // its maximum.
        let bad_parity = match player {
            Player::Exists => 1,
            Player::Forall => 0,
        };
        let priorities: Vec<u32> = game.nodes.iter().map(|n| n.priority).collect();
        assert!(
            !has_cycle_with_max_parity(&succ, &priorities, &region, bad_parity),
            "strategy of {player:?} admits a cycle of losing parity"
        );
    }
}

/// True iff the graph restricted to `region` has a cycle whose maximum
/// priority has parity `parity`.
pub fn has_cycle_with_max_parity(
    succ: &[Vec<usize>],
    priority: &[u32],
    region: &[bool],
    parity: u32,
) -> bool {
    let n = succ.len();
    let mut prios: Vec<u32> = (0..n)
        .filter(|&i| region[i])
        .map(|i| priority[i])
        .filter(|p| p % 2 == parity)
        .collect();
    prios.sort_unstable();
    prios.dedup();
    for &p in prios.iter().rev() {
        // Subgraph of nodes with priority <= p; look for a cycle through a
        // priority-p node.
        let sub: Vec<bool> = (0..n).map(|i| region[i] && priority[i] <= p).collect();
        let sccs = tarjan_scc(succ, &sub);
        for comp in &sccs {
            let cyclic = comp.len() > 1
                || (comp.len() == 1 && succ[comp[0]].iter().any(|&m| m == comp[0] && sub[m]));
            if cyclic && comp.iter().any(|&v| priority[v] == p) {
                return true;
            }
        }
    }
    false
}

/// Tarjan SCCs over the subgraph induced by `alive` (iterative).
pub fn tarjan_scc(succ: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    // Iterative DFS: (node, child position).
    for root in 0..n {
        if !alive[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let mut advanced = false;
            while *ci < succ[v].len() {
                let w = succ[v][*ci];
                *ci += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    call.push((w, 0));
                    advanced = true;
                    break;
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            }
            if advanced {
                continue;
            }
            // Post-visit.
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                sccs.push(comp);
            }
            call.pop();
            if let Some(&mut (parent, _)) = call.last_mut() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    sccs
}

/// Independent McNaughton-style recursion (winners only), coded separately
/// from [`zielonka_solve`] to serve as an oracle in tests.
pub fn mcnaughton_oracle(game: &ParityGame) -> Vec<Player> {
    fn attr(
        moves: &[Vec<usize>],
        owner: &[Player],
        alive: &[bool],
        start: Vec<bool>,
        player: Player,
    ) -> Vec<bool> {
        let n = moves.len();
        let mut a = start;
        loop {
            let mut changed = false;
            for v in 0..n {
                if !alive[v] || a[v] {
                    continue;
                }
                let in_moves: Vec<usize> = moves[v].iter().copied().filter(|&m| alive[m]).collect();
                let pulled = if owner[v] == player {
                    in_moves.iter().any(|&m| a[m])
                } else {
                    !in_moves.is_empty() && in_moves.iter().all(|&m| a[m])
                };
                if pulled {
                    a[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return a;
            }
        }
    }

    fn go(moves: &[Vec<usize>], owner: &[Player], prio: &[u32], alive: Vec<bool>) -> Vec<Player> {
        let n = moves.len();
        let mut res = vec![Player::Forall; n];
        if !alive.iter().any(|&a| a) {
            return res;
        }
        // Stuck nodes lose for their owner; fold them in as base targets.
        let stuck_e: Vec<bool> = (0..n)
            .map(|v| {
                alive[v]
                    && owner[v] == Player::Exists
                    && !moves[v].iter().any(|&m| alive[m])
            })
            .collect();
        let stuck_a: Vec<bool> = (0..n)
            .map(|v| {
                alive[v]
                    && owner[v] == Player::Forall
                    && !moves[v].iter().any(|&m| alive[m])
            })
            .collect();
        if stuck_e.iter().any(|&b| b) {
            let region = attr(moves, owner, &alive, stuck_e, Player::Forall);
            let mut rest = alive.clone();
            for v in 0..n {
                if region[v] {
                    rest[v] = false;
                }
            }
            let sub = go(moves, owner, prio, rest.clone());
            for v in 0..n {
                if alive[v] {
                    res[v] = if region[v] { Player::Forall } else { sub[v] };
                }
            }
            return res;
        }
        if stuck_a.iter().any(|&b| b) {
            let region = attr(moves, owner, &alive, stuck_a, Player::Exists);
            let mut rest = alive.clone();
            for v in 0..n {
                if region[v] {
                    rest[v] = false;
                }
            }
            let sub = go(moves, owner, prio, rest.clone());
            for v in 0..n {
                if alive[v] {
                    res[v] = if region[v] { Player::Exists } else { sub[v] };
                }
            }
            return res;
        }

        let top = (0..n).filter(|&v| alive[v]).map(|v| prio[v]).max().unwrap();
        let player = Player::of_priority(top);
        let opp = player.opponent();
        let z: Vec<bool> = (0..n).map(|v| alive[v] && prio[v] == top).collect();
        let a = attr(moves, owner, &alive, z, player);
        let mut rest = alive.clone();
        for v in 0..n {
            if a[v] {
                rest[v] = false;
            }
        }
        let sub = go(moves, owner, prio, rest.clone());
        let opp_region: Vec<bool> = (0..n).map(|v| rest[v] && sub[v] == opp).collect();
        if !opp_region.iter().any(|&b| b) {
            for v in 0..n {
                if alive[v] {
                    res[v] = player;
                }
            }
            res
        } else {
            let b = attr(moves, owner, &alive, opp_region, opp);
            let mut rest2 = alive.clone();
            for v in 0..n {
                if b[v] {
                    rest2[v] = false;
                }
            }
            let sub2 = go(moves, owner, prio, rest2.clone());
            for v in 0..n {
                if alive[v] {
                    res[v] = if b[v] { opp } else { sub2[v] };
                }
            }
            res
        }
    }

    let moves: Vec<Vec<usize>> = game.nodes.iter().map(|n| n.moves.clone()).collect();
    let owner: Vec<Player> = game.nodes.iter().map(|n| n.owner).collect();
    let prio: Vec<u32> = game.nodes.iter().map(|n| n.priority).collect();
    go(&moves, &owner, &prio, vec![true; game.len()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stuck_existential_node_loses() {
        let mut g = ParityGame::default();
        g.add_node(Player::Exists, 4);
        let sol = zielonka_solve(&g);
        assert_eq!(sol.winner[0], Player::Forall);
    }

    #[test]
    fn universal_self_loop_even_priority_wins_for_exists() {
        let mut g = ParityGame::default();
        let v = g.add_node(Player::Forall, 2);
        g.add_move(v, v);
        let sol = zielonka_solve(&g);
        assert_eq!(sol.winner[v], Player::Exists);
    }

    #[test]
    fn simple_choice_game() {
        // Exists chooses between an odd self-loop and an even self-loop.
        let mut g = ParityGame::default();
        let start = g.add_node(Player::Exists, 0);
        let bad = g.add_node(Player::Exists, 1);
        let good = g.add_node(Player::Exists, 2);
        g.add_move(start, bad);
        g.add_move(start, good);
        g.add_move(bad, bad);
        g.add_move(good, good);
        let sol = zielonka_solve(&g);
        assert_eq!(sol.winner[start], Player::Exists);
        assert_eq!(sol.winner[bad], Player::Forall);
        assert_eq!(sol.strategy_exists[start], Some(good));
        verify_strategies(&g, &sol);
    }

    #[test]
    fn matches_oracle_on_random_games() {
        use crate::gen::random_parity_game;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_parity_game(&mut rng, 50, 5);
            let sol = zielonka_solve(&g);
            let oracle = mcnaughton_oracle(&g);
            assert_eq!(sol.winner, oracle);
            verify_strategies(&g, &sol);
        }
    }

    #[test]
    fn random_play_simulation_never_loses_in_region() {
        use crate::gen::random_parity_game;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let g = random_parity_game(&mut rng, 12, 4);
            let sol = zielonka_solve(&g);
            for start in 0..g.len() {
                let winner = sol.winner[start];
                let strat = match winner {
                    Player::Exists => &sol.strategy_exists,
                    Player::Forall => &sol.strategy_forall,
                };
                // 45 random plays of length <= 4 * |G| per node: over ten
                // thousand plays across the sampled games.
                for _ in 0..45 {
                    let mut v = start;
                    let mut trace = vec![v];
                    loop {
                        if trace.len() > 4 * g.len() {
                            break;
                        }
                        let node = &g.nodes[v];
                        let next = if node.owner == winner {
                            match strat[v] {
                                Some(m) => m,
                                None => break, // terminal for opponent-owned stuckness
                            }
                        } else if node.moves.is_empty() {
                            break;
                        } else {
                            node.moves[rng.gen_range(0..node.moves.len())]
                        };
                        v = next;
                        trace.push(v);
                    }
                    // The play never leaves the winning region.
                    assert!(trace.iter().all(|&t| sol.winner[t] == winner));
                    // If it ended stuck, the stuck node belongs to the loser.
                    let last = *trace.last().unwrap();
                    if g.nodes[last].moves.is_empty() {
                        assert_ne!(g.nodes[last].owner, winner);
                    }
                }
            }
        }
    }
}
