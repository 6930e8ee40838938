//! Determinization pipeline: parity → Büchi → Safra trees → complement.
//!
//! The deterministic automaton is built lazily: a caller feeds letters one
//! at a time and states are interned on demand, since the tracking alphabet
//! is exponential and only letters relevant to reached labels are ever
//! used. Exact lasso-word membership oracles for the nondeterministic and
//! deterministic automata make complementation testable.

use std::collections::{HashMap, VecDeque};

use crate::closure::FormulaId;
use crate::games::parity::{has_cycle_with_max_parity, tarjan_scc};
use crate::tracking::{Letter, TrackingNpa};

/// An explicit nondeterministic parity automaton over a small abstract
/// alphabet (used by tests and the determinization property suites).
#[derive(Debug, Clone)]
pub struct Npa {
    pub num_states: usize,
    pub num_letters: usize,
    pub initial: usize,
    /// State priorities, all >= 1.
    pub priority: Vec<u32>,
    /// `delta[state][letter]` = successor list.
    pub delta: Vec<Vec<Vec<usize>>>,
}

/// An explicit nondeterministic Büchi automaton.
#[derive(Debug, Clone)]
pub struct ExplicitNba {
    pub num_states: usize,
    pub num_letters: usize,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    pub delta: Vec<Vec<Vec<usize>>>,
}

/// Equivalent Büchi automaton via level commitment: states are pairs of an
/// NPA state and an even level; levels never increase along a run, a state
/// is accepting when its priority equals its level, and a transition into
/// `(q, l)` requires `priority(q) <= l`. Committing below the eventual
/// maximal even priority of a run is harmless (levels may drop at any
/// time), and the top level dominates all priorities, so the language is
/// preserved.
pub fn parity_to_buchi(npa: &Npa) -> ExplicitNba {
    let max_pri = npa.priority.iter().copied().max().unwrap_or(1).max(1);
    let top = 2 * max_pri.div_ceil(2);
    let levels: Vec<u32> = (1..=top / 2).map(|i| 2 * i).collect();
    let nl = levels.len();
    let enc = |state: usize, level_idx: usize| state * nl + level_idx;

    let num_states = npa.num_states * nl;
    let mut accepting = vec![false; num_states];
    for s in 0..npa.num_states {
        for (li, &l) in levels.iter().enumerate() {
            accepting[enc(s, li)] = npa.priority[s] == l;
        }
    }
    let mut delta = vec![vec![Vec::new(); npa.num_letters]; num_states];
    for s in 0..npa.num_states {
        for a in 0..npa.num_letters {
            for &t in &npa.delta[s][a] {
                for li in 0..nl {
                    for lj in 0..=li {
                        if npa.priority[t] <= levels[lj] {
                            delta[enc(s, li)][a].push(enc(t, lj));
                        }
                    }
                }
            }
        }
    }
    ExplicitNba {
        num_states,
        num_letters: npa.num_letters,
        initial: vec![enc(npa.initial, nl - 1)],
        accepting,
        delta,
    }
}

// ---------------------------------------------------------------------------
// Safra trees.
// ---------------------------------------------------------------------------

/// A node of a Safra tree: a persistent name, a set of Büchi states, and an
/// ordered list of children (older first). Invariants: sibling labels are
/// disjoint, the union of children labels is strictly contained in the
/// parent label, and names increase from parents to children and from older
/// to younger siblings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SafraNode {
    pub name: u32,
    pub label: Vec<usize>,
    pub children: Vec<SafraNode>,
}

/// A Safra tree; `None` is the empty (dead) tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SafraTree {
    pub root: Option<SafraNode>,
}

impl SafraTree {
    pub fn initial(initial_states: &[usize]) -> SafraTree {
        let mut label: Vec<usize> = initial_states.to_vec();
        label.sort_unstable();
        label.dedup();
        if label.is_empty() {
            SafraTree { root: None }
        } else {
            SafraTree {
                root: Some(SafraNode { name: 1, label, children: Vec::new() }),
            }
        }
    }

    /// Union of Büchi states in the root (the macrostate).
    pub fn root_states(&self) -> &[usize] {
        self.root.as_ref().map(|r| r.label.as_slice()).unwrap_or(&[])
    }
}

/// One deterministic transition step of the Safra construction, returning
/// the successor tree and the raw transition priority:
///
/// * `1` when nothing notable happened;
/// * `2(M - i) + 2` when the smallest event name `i` turned green (its label
///   equals its children's union; descendants removed);
/// * `2(M - i) + 3` when the smallest event name `i` died.
///
/// `M` bounds the number of live nodes (the Büchi state count), so raw
/// priorities lie in `{1, ..., 2M + 1}`. Deaths of nodes spawned within the
/// same step are not events; such a node never carried history.
pub fn safra_step(
    tree: &SafraTree,
    mut succ: impl FnMut(usize) -> Vec<usize>,
    accepting: impl Fn(usize) -> bool,
    nba_size: usize,
) -> (SafraTree, u32) {
    let m = nba_size as u32;
    let root = match &tree.root {
        None => return (SafraTree { root: None }, 1),
        Some(r) => r,
    };

    // Working representation with bookkeeping flags.
    #[derive(Clone)]
    struct WNode {
        name: u32,
        label: Vec<usize>,
        children: Vec<WNode>,
        newborn: bool,
    }
    fn import(n: &SafraNode) -> WNode {
        WNode {
            name: n.name,
            label: n.label.clone(),
            children: n.children.iter().map(import).collect(),
            newborn: false,
        }
    }
    let mut w = import(root);

    // 1. Powerset update.
    fn update(n: &mut WNode, succ: &mut impl FnMut(usize) -> Vec<usize>) {
        let mut next: Vec<usize> = n.label.iter().flat_map(|&q| succ(q)).collect();
        next.sort_unstable();
        next.dedup();
        n.label = next;
        for c in &mut n.children {
            update(c, succ);
        }
    }
    update(&mut w, &mut succ);

    // 2. Spawn: youngest child with the accepting part, fresh names in
    // pre-order so the construction is deterministic.
    fn max_name(n: &WNode) -> u32 {
        n.children.iter().map(max_name).fold(n.name, u32::max)
    }
    let mut fresh = max_name(&w) + 1;
    fn spawn(n: &mut WNode, accepting: &impl Fn(usize) -> bool, fresh: &mut u32) {
        let acc: Vec<usize> = n.label.iter().copied().filter(|&q| accepting(q)).collect();
        if !acc.is_empty() {
            n.children.push(WNode {
                name: *fresh,
                label: acc,
                children: Vec::new(),
                newborn: true,
            });
            *fresh += 1;
        }
        let last = n.children.len().saturating_sub(1);
        for c in n.children.iter_mut().take(last) {
            spawn(c, accepting, fresh);
        }
    }
    // Note: spawn before recursing into the new child is avoided by only
    // recursing into pre-existing children (the freshly spawned child is
    // the last one and contains no accepting-history of its own yet).
    spawn(&mut w, &accepting, &mut fresh);

    // 3. Horizontal merge: states claimed by older siblings disappear from
    // younger siblings and their subtrees.
    fn remove_states(n: &mut WNode, banned: &[usize]) {
        n.label.retain(|q| !banned.contains(q));
        for c in &mut n.children {
            remove_states(c, banned);
        }
    }
    fn hmerge(n: &mut WNode) {
        let mut seen: Vec<usize> = Vec::new();
        for c in &mut n.children {
            remove_states(c, &seen);
            seen.extend(c.label.iter().copied());
            hmerge(c);
        }
    }
    hmerge(&mut w);

    // 4. Kill empty nodes; 5. vertical merge (green) — collecting events.
    let mut dead: Vec<u32> = Vec::new();
    let mut green: Vec<u32> = Vec::new();
    fn sweep(n: &mut WNode, dead: &mut Vec<u32>, green: &mut Vec<u32>) {
        // Remove empty children (and their subtrees) first.
        n.children.retain_mut(|c| {
            if c.label.is_empty() {
                collect_names(c, dead);
                false
            } else {
                true
            }
        });
        // Vertical merge at this node?
        let union: usize = n.children.iter().map(|c| c.label.len()).sum();
        if !n.children.is_empty() && union == n.label.len() {
            // Sibling labels are disjoint subsets of the parent, so equal
            // cardinality means equal union.
            for c in &n.children {
                collect_names(c, dead);
            }
            n.children.clear();
            if !n.newborn {
                green.push(n.name);
            }
        } else {
            for c in &mut n.children {
                sweep(c, dead, green);
            }
        }
    }
    fn collect_names(n: &WNode, dead: &mut Vec<u32>) {
        if !n.newborn {
            dead.push(n.name);
        }
        for c in &n.children {
            collect_names(c, dead);
        }
    }
    let whole_tree_died = {
        if w.label.is_empty() {
            collect_names(&w, &mut dead);
            true
        } else {
            sweep(&mut w, &mut dead, &mut green);
            false
        }
    };

    // 6. Priority from the smallest event name.
    let min_dead = dead.iter().copied().min();
    let min_green = green.iter().copied().min();
    let priority = match (min_dead, min_green) {
        (None, None) => 1,
        (Some(d), None) => 2 * (m - d) + 3,
        (None, Some(g)) => 2 * (m - g) + 2,
        (Some(d), Some(g)) => {
            if d <= g {
                2 * (m - d) + 3
            } else {
                2 * (m - g) + 2
            }
        }
    };

    if whole_tree_died {
        return (SafraTree { root: None }, priority);
    }

    // 7. Compaction: order-preserving rename onto {1..#nodes}.
    fn collect_live(n: &WNode, names: &mut Vec<u32>) {
        names.push(n.name);
        for c in &n.children {
            collect_live(c, names);
        }
    }
    let mut names = Vec::new();
    collect_live(&w, &mut names);
    names.sort_unstable();
    let rename: HashMap<u32, u32> = names
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i as u32 + 1))
        .collect();
    fn export(n: &WNode, rename: &HashMap<u32, u32>) -> SafraNode {
        SafraNode {
            name: rename[&n.name],
            label: n.label.clone(),
            children: n.children.iter().map(|c| export(c, rename)).collect(),
        }
    }
    let out = export(&w, &rename);
    debug_assert!(out.label.len() <= nba_size);
    (SafraTree { root: Some(out) }, priority)
}

// ---------------------------------------------------------------------------
// The lazily built deterministic parity automaton.
// ---------------------------------------------------------------------------

/// A deterministic parity automaton state: the Safra tree together with the
/// priority of the transition that entered it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DpaState {
    pub tree: SafraTree,
    pub raw_priority: u32,
}

/// Lazily expanded DPA. `shift` is the complementation offset added to all
/// raw priorities (`0` before, `1` after complementation).
#[derive(Debug, Clone)]
pub struct Dpa {
    pub states: Vec<DpaState>,
    index: HashMap<DpaState, usize>,
    pub initial: usize,
    pub shift: u32,
}

impl Dpa {
    pub fn new(initial_states: &[usize]) -> Dpa {
        let init = DpaState { tree: SafraTree::initial(initial_states), raw_priority: 1 };
        Dpa {
            states: vec![init.clone()],
            index: [(init, 0)].into_iter().collect(),
            initial: 0,
            shift: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priority(&self, s: usize) -> u32 {
        self.states[s].raw_priority + self.shift
    }

    /// Complementation by shifting every priority up by one.
    pub fn complement(mut self) -> Dpa {
        self.shift += 1;
        self
    }

    /// Performs one deterministic step, interning the successor state.
    pub fn step_with(
        &mut self,
        from: usize,
        succ: impl FnMut(usize) -> Vec<usize>,
        accepting: impl Fn(usize) -> bool,
        nba_size: usize,
    ) -> usize {
        let (tree, raw) = safra_step(&self.states[from].tree, succ, accepting, nba_size);
        let state = DpaState { tree, raw_priority: raw };
        if let Some(&id) = self.index.get(&state) {
            return id;
        }
        let id = self.states.len();
        self.index.insert(state.clone(), id);
        self.states.push(state);
        id
    }
}

/// Cached runner for a DPA over an explicit Büchi automaton.
pub struct ExplicitDpa {
    pub dpa: Dpa,
    pub nba: ExplicitNba,
    cache: Vec<HashMap<usize, usize>>,
}

impl ExplicitDpa {
    pub fn determinize(nba: ExplicitNba) -> ExplicitDpa {
        let dpa = Dpa::new(&nba.initial);
        ExplicitDpa { dpa, nba, cache: vec![HashMap::new()] }
    }

    pub fn complement(mut self) -> ExplicitDpa {
        self.dpa = self.dpa.complement();
        self
    }

    pub fn step(&mut self, from: usize, letter: usize) -> usize {
        if let Some(&t) = self.cache[from].get(&letter) {
            return t;
        }
        let nba = &self.nba;
        let to = self.dpa.step_with(
            from,
            |q| nba.delta[q][letter].clone(),
            |q| nba.accepting[q],
            nba.num_states,
        );
        while self.cache.len() < self.dpa.len() {
            self.cache.push(HashMap::new());
        }
        self.cache[from].insert(letter, to);
        to
    }

    /// Exact acceptance of the lasso word `prefix · period^ω`: run until the
    /// deterministic state repeats at a period boundary and inspect the
    /// maximal priority on the closing cycle.
    pub fn accepts_lasso(&mut self, prefix: &[usize], period: &[usize]) -> bool {
        assert!(!period.is_empty());
        let mut state = self.dpa.initial;
        for &a in prefix {
            state = self.step(state, a);
        }
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut segments: Vec<Vec<u32>> = Vec::new();
        seen.insert(state, 0);
        loop {
            let mut prios = Vec::with_capacity(period.len());
            for &a in period {
                state = self.step(state, a);
                prios.push(self.dpa.priority(state));
            }
            segments.push(prios);
            if let Some(&first) = seen.get(&state) {
                // Cycle covers segments first..end.
                let max = segments[first..]
                    .iter()
                    .flat_map(|s| s.iter().copied())
                    .max()
                    .unwrap();
                return max % 2 == 0;
            }
            seen.insert(state, segments.len());
        }
    }
}

// ---------------------------------------------------------------------------
// Lasso oracles on the nondeterministic automata.
// ---------------------------------------------------------------------------

/// Product of a lasso word with a successor relation: nodes are
/// `(position, state)`, positions wrap back to the period start.
fn lasso_product(
    num_states: usize,
    initial: &[usize],
    prefix_len: usize,
    total_len: usize,
    mut succ: impl FnMut(usize, usize) -> Vec<usize>, // (position, state) -> successors
) -> (Vec<Vec<usize>>, Vec<bool>) {
    let nodes = total_len * num_states;
    let enc = |pos: usize, q: usize| pos * num_states + q;
    let next_pos = |pos: usize| if pos + 1 < total_len { pos + 1 } else { prefix_len };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut reach = vec![false; nodes];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in initial {
        let v = enc(0, q);
        if !reach[v] {
            reach[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let pos = v / num_states;
        let q = v % num_states;
        let np = next_pos(pos);
        for t in succ(pos, q) {
            let w = enc(np, t);
            adj[v].push(w);
            if !reach[w] {
                reach[w] = true;
                queue.push_back(w);
            }
        }
    }
    (adj, reach)
}

/// Does the nondeterministic parity automaton accept `prefix · period^ω`?
/// Decided exactly via the reachable product graph: acceptance holds iff
/// some reachable cycle has an even maximal priority.
pub fn npa_accepts_lasso(npa: &Npa, prefix: &[usize], period: &[usize]) -> bool {
    assert!(!period.is_empty());
    let word: Vec<usize> = prefix.iter().chain(period).copied().collect();
    let (adj, reach) = lasso_product(
        npa.num_states,
        &[npa.initial],
        prefix.len(),
        word.len(),
        |pos, q| npa.delta[q][word[pos]].clone(),
    );
    let prios: Vec<u32> = (0..adj.len()).map(|v| npa.priority[v % npa.num_states]).collect();
    has_cycle_with_max_parity(&adj, &prios, &reach, 0)
}

/// Büchi variant of the lasso oracle: some reachable cycle contains an
/// accepting state.
pub fn nba_accepts_lasso(nba: &ExplicitNba, prefix: &[usize], period: &[usize]) -> bool {
    assert!(!period.is_empty());
    let word: Vec<usize> = prefix.iter().chain(period).copied().collect();
    let (adj, reach) = lasso_product(
        nba.num_states,
        &nba.initial,
        prefix.len(),
        word.len(),
        |pos, q| nba.delta[q][word[pos]].clone(),
    );
    for comp in tarjan_scc(&adj, &reach) {
        let cyclic =
            comp.len() > 1 || (comp.len() == 1 && adj[comp[0]].iter().any(|&m| m == comp[0]));
        if cyclic && comp.iter().any(|&v| nba.accepting[v % nba.num_states]) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Tracking instantiation: the Büchi view of A_χ over tracking letters.
// ---------------------------------------------------------------------------

/// The Büchi automaton of the tracking NPA, with states `(formula, level)`
/// encoded densely. Transitions are computed on demand per letter.
pub struct TrackingBuchi<'a> {
    pub npa: TrackingNpa<'a>,
    levels: Vec<u32>,
}

impl<'a> TrackingBuchi<'a> {
    pub fn new(npa: TrackingNpa<'a>) -> TrackingBuchi<'a> {
        let max_pri = npa
            .table
            .priority
            .iter()
            .copied()
            .max()
            .unwrap_or(1)
            .max(1);
        let top = 2 * max_pri.div_ceil(2);
        let levels: Vec<u32> = (1..=top / 2).map(|i| 2 * i).collect();
        TrackingBuchi { npa, levels }
    }

    pub fn num_states(&self) -> usize {
        self.npa.num_states() * self.levels.len()
    }

    pub fn initial(&self) -> usize {
        // (χ, top level).
        self.npa.initial() as usize * self.levels.len() + (self.levels.len() - 1)
    }

    pub fn accepting(&self, s: usize) -> bool {
        let nl = self.levels.len();
        let q = (s / nl) as FormulaId;
        let level = self.levels[s % nl];
        self.npa.priority(q) == level
    }

    pub fn successors(&self, s: usize, letter: &Letter) -> Vec<usize> {
        let nl = self.levels.len();
        let q = (s / nl) as FormulaId;
        let li = s % nl;
        let mut out = Vec::new();
        for t in self.npa.delta(q, letter) {
            for lj in 0..=li {
                if self.npa.priority(t) <= self.levels[lj] {
                    out.push(t as usize * nl + lj);
                }
            }
        }
        out
    }

    /// Projects a set of Büchi states to the formula label (for `l^A`).
    pub fn project_label(&self, states: &[usize]) -> Vec<FormulaId> {
        let nl = self.levels.len();
        let mut out: Vec<FormulaId> = states.iter().map(|&s| (s / nl) as FormulaId).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_state_npa(priority: u32) -> Npa {
        Npa {
            num_states: 1,
            num_letters: 1,
            initial: 0,
            priority: vec![priority],
            delta: vec![vec![vec![0]]],
        }
    }

    #[test]
    fn even_self_loop_accepts() {
        let npa = single_state_npa(2);
        assert!(npa_accepts_lasso(&npa, &[], &[0]));
        let nba = parity_to_buchi(&npa);
        assert!(nba_accepts_lasso(&nba, &[], &[0]));
        let mut dpa = ExplicitDpa::determinize(nba);
        assert!(dpa.accepts_lasso(&[], &[0]));
    }

    #[test]
    fn odd_self_loop_rejects() {
        let npa = single_state_npa(1);
        assert!(!npa_accepts_lasso(&npa, &[], &[0]));
        let nba = parity_to_buchi(&npa);
        assert!(!nba_accepts_lasso(&nba, &[], &[0]));
        let mut dpa = ExplicitDpa::determinize(nba);
        assert!(!dpa.accepts_lasso(&[], &[0]));
    }

    #[test]
    fn alternating_cycle_takes_maximum() {
        // Two states with priorities 1 and 2 on a cycle: the maximum seen
        // infinitely often is 2, so the cycle word is accepted.
        let npa = Npa {
            num_states: 2,
            num_letters: 1,
            initial: 0,
            priority: vec![1, 2],
            delta: vec![vec![vec![1]], vec![vec![0]]],
        };
        assert!(npa_accepts_lasso(&npa, &[], &[0, 0]));
        let nba = parity_to_buchi(&npa);
        assert!(nba_accepts_lasso(&nba, &[], &[0, 0]));
        let mut dpa = ExplicitDpa::determinize(nba);
        assert!(dpa.accepts_lasso(&[], &[0, 0]));
    }

    /// NBA for "finitely many a's" over {a=0, b=1}.
    fn finitely_many_a() -> ExplicitNba {
        ExplicitNba {
            num_states: 2,
            num_letters: 2,
            initial: vec![0],
            accepting: vec![false, true],
            delta: vec![
                vec![vec![0], vec![0, 1]],
                vec![vec![], vec![1]],
            ],
        }
    }

    #[test]
    fn determinize_finitely_many_a() {
        let mut dpa = ExplicitDpa::determinize(finitely_many_a());
        assert!(!dpa.accepts_lasso(&[], &[0]));
        assert!(dpa.accepts_lasso(&[], &[1]));
        assert!(dpa.accepts_lasso(&[0, 0, 0], &[1]));
        assert!(!dpa.accepts_lasso(&[1, 1], &[1, 0]));
    }

    #[test]
    fn determinize_empty_language() {
        let nba = ExplicitNba {
            num_states: 1,
            num_letters: 2,
            initial: vec![0],
            accepting: vec![false],
            delta: vec![vec![vec![0], vec![0]]],
        };
        let mut dpa = ExplicitDpa::determinize(nba);
        for period in [vec![0], vec![1], vec![0, 1], vec![1, 1, 0]] {
            assert!(!dpa.accepts_lasso(&[], &period));
        }
    }

    #[test]
    fn accepting_sink_reachable_on_a() {
        // One accepting sink reachable on letter a; accepts a·x^ω for any x.
        let nba = ExplicitNba {
            num_states: 2,
            num_letters: 2,
            initial: vec![0],
            accepting: vec![false, true],
            delta: vec![
                vec![vec![1], vec![0]],
                vec![vec![1], vec![1]],
            ],
        };
        let mut dpa = ExplicitDpa::determinize(nba);
        assert!(dpa.accepts_lasso(&[0], &[0]));
        assert!(dpa.accepts_lasso(&[0], &[1]));
        assert!(dpa.accepts_lasso(&[0], &[1, 0]));
        assert!(!dpa.accepts_lasso(&[1], &[1]));
    }

    #[test]
    fn complement_shifts_priorities_and_flips_language() {
        let npa = single_state_npa(2);
        let nba = parity_to_buchi(&npa);
        let mut dpa = ExplicitDpa::determinize(nba);
        assert!(dpa.accepts_lasso(&[], &[0]));
        let mut comp = ExplicitDpa {
            dpa: dpa.dpa.clone().complement(),
            nba: dpa.nba.clone(),
            cache: vec![HashMap::new(); dpa.dpa.len()],
        };
        assert!(!comp.accepts_lasso(&[], &[0]));
        for s in 0..comp.dpa.len() {
            assert_eq!(comp.dpa.priority(s), dpa.dpa.priority(s) + 1);
        }
    }

    #[test]
    fn random_npa_complement_agreement() {
        use crate::gen::{random_lasso, random_npa};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let npa = random_npa(&mut rng, 5, 2, 4);
            let nba = parity_to_buchi(&npa);
            let mut dpa = ExplicitDpa::determinize(nba.clone());
            let mut comp = ExplicitDpa::determinize(nba).complement();
            for _ in 0..100 {
                let (prefix, period) = random_lasso(&mut rng, npa.num_letters, 6);
                let by_npa = npa_accepts_lasso(&npa, &prefix, &period);
                let by_nba = nba_accepts_lasso(&dpa.nba, &prefix, &period);
                assert_eq!(by_npa, by_nba, "parity->Buchi mismatch");
                let by_dpa = dpa.accepts_lasso(&prefix, &period);
                assert_eq!(by_npa, by_dpa, "determinization mismatch");
                let by_comp = comp.accepts_lasso(&prefix, &period);
                assert_eq!(by_npa, !by_comp, "complement mismatch");
            }
        }
    }
}
