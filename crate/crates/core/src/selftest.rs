//! Randomized property suites and the brute-force relational model oracle.
//!
//! These back the `selftest` and `oracle` subcommands and the acceptance
//! tests. All randomness comes from a seeded ChaCha generator, so a given
//! seed reproduces a run exactly.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::determinize::{npa_accepts_lasso, parity_to_buchi, ExplicitDpa};
use crate::engine::{run_formula, EngineOptions, Verdict};
use crate::formula::{normalize, Formula, Logic, LogicSpec};
use crate::games::{
    build_fixpoint_game, build_mc_game, semantics_eval, zielonka_solve, Coalgebra, CoalgebraPart,
    Player, Valuation,
};
use crate::gen::{
    random_formula, random_lasso, random_npa, random_pair, random_rel_model, FormulaGenConfig,
    PairGenConfig,
};
use crate::onestep::{oss_brute, oss_solve, validate_witness, OsOptions, OsOutcome, OsWitness};

/// Outcome of one suite: number of checks run and descriptions of failures.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "suite {}: {}/{} passed",
            self.name,
            self.cases - self.failures.len(),
            self.cases
        )
    }
}

/// Determinization complement property: for random NPAs and random lasso
/// words, acceptance by the complemented determinization equals rejection
/// by the NPA — exactly.
pub fn suite_determinize(seed: u64, npas: usize, lassos_per: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0;
    for i in 0..npas {
        let npa = random_npa(&mut rng, 6, 3, 4);
        let nba = parity_to_buchi(&npa);
        let mut comp = ExplicitDpa::determinize(nba).complement();
        for j in 0..lassos_per {
            cases += 1;
            let (prefix, period) = random_lasso(&mut rng, npa.num_letters, 8);
            let by_npa = npa_accepts_lasso(&npa, &prefix, &period);
            let by_comp = comp.accepts_lasso(&prefix, &period);
            if by_npa == by_comp {
                failures.push(format!(
                    "npa {i} lasso {j}: npa={by_npa}, complement={by_comp} (must differ)"
                ));
            }
        }
    }
    SuiteReport { name: "determinize".into(), cases, failures }
}

/// One-step backend against the brute oracle: verdict equality on random
/// pairs, every satisfying witness validated independently; the graded
/// oracle runs with the doubled bound, validating the index+1 truncation.
pub fn suite_onestep(seed: u64, logic: Logic, cases: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let spec = LogicSpec::single(logic);
    let mut cfg = PairGenConfig::new(logic);
    if logic == Logic::Graded {
        // Keep the doubled-bound oracle enumerable.
        cfg.max_theta = 6;
        cfg.max_literals = 3;
    }
    if logic == Logic::Probabilistic {
        cfg.max_literals = 3;
    }
    let opts = OsOptions::default();
    for i in 0..cases {
        let pair = random_pair(&mut rng, &cfg);
        let fast = match oss_solve(&pair, &spec, &opts) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("case {i}: backend error {e}"));
                continue;
            }
        };
        let slow = match oss_brute(&pair, &spec, None) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("case {i}: oracle error {e}"));
                continue;
            }
        };
        match (&fast, &slow) {
            (OsOutcome::Sat(w), OsOutcome::Sat(_)) => {
                if let Err(e) = validate_witness(&pair, w, &spec) {
                    failures.push(format!("case {i}: backend witness invalid: {e}"));
                }
                if logic == Logic::Probabilistic && w.support_size() > pair.num_vars.max(1) {
                    failures.push(format!(
                        "case {i}: probabilistic witness support {} exceeds |V| = {}",
                        w.support_size(),
                        pair.num_vars
                    ));
                }
            }
            (OsOutcome::Unsat, OsOutcome::Unsat) => {}
            (f, s) => failures.push(format!("case {i}: backend={f}, oracle={s}")),
        }
        // Monotonicity in Theta: enlarging the profile set preserves
        // satisfiability.
        if fast.is_sat() && pair.theta.len() < cfg.max_theta {
            let mut bigger = pair.clone();
            let extra: BTreeSet<usize> = (0..pair.num_vars).collect();
            if !bigger.theta.contains(&extra) {
                bigger.theta.push(extra);
                match oss_solve(&bigger, &spec, &opts) {
                    Ok(o) if o.is_sat() => {}
                    Ok(_) => failures.push(format!("case {i}: SAT lost under larger Theta")),
                    Err(e) => failures.push(format!("case {i}: error on larger Theta: {e}")),
                }
            }
        }
    }
    SuiteReport {
        name: format!("onestep-{}", LogicSpec::single(logic)),
        cases,
        failures,
    }
}

/// A random monotone set function over `P({0..n})^depth`, represented as a
/// positive DNF per element.
pub struct MonotoneFn {
    pub universe: usize,
    pub depth: usize,
    /// Per element: clauses of required memberships (level index, element).
    pub clauses: Vec<Vec<Vec<(usize, usize)>>>,
}

impl MonotoneFn {
    pub fn random(rng: &mut impl Rng, universe: usize, depth: usize) -> MonotoneFn {
        let clauses = (0..universe)
            .map(|_| {
                let n_clauses = rng.gen_range(0..=2usize);
                (0..n_clauses)
                    .map(|_| {
                        let n_lits = rng.gen_range(0..=2usize);
                        (0..n_lits)
                            .map(|_| (rng.gen_range(0..depth), rng.gen_range(0..universe)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MonotoneFn { universe, depth, clauses }
    }

    pub fn eval(&self, args: &[BTreeSet<usize>]) -> BTreeSet<usize> {
        (0..self.universe)
            .filter(|&q| {
                self.clauses[q]
                    .iter()
                    .any(|clause| clause.iter().all(|&(l, e)| args[l].contains(&e)))
            })
            .collect()
    }
}

/// Naive nested fixpoint evaluation with innermost-first restarts — the
/// engine's evaluation strategy in isolation, μ at odd levels.
pub fn nested_fixpoint_naive(
    f: &dyn Fn(&[BTreeSet<usize>]) -> BTreeSet<usize>,
    universe: usize,
    depth: usize,
) -> BTreeSet<usize> {
    fn level(
        f: &dyn Fn(&[BTreeSet<usize>]) -> BTreeSet<usize>,
        env: &mut Vec<BTreeSet<usize>>,
        l: usize,
        universe: usize,
    ) -> BTreeSet<usize> {
        if l == 0 {
            return f(env);
        }
        let mut x: BTreeSet<usize> = if l % 2 == 1 {
            BTreeSet::new()
        } else {
            (0..universe).collect()
        };
        loop {
            env[l - 1] = x.clone();
            let next = level(f, env, l - 1, universe);
            if next == x {
                return x;
            }
            x = next;
        }
    }
    let mut env = vec![BTreeSet::new(); depth];
    level(f, &mut env, depth, universe)
}

/// Nested fixpoint evaluation against the fixpoint game solved by Zielonka.
pub fn suite_fixpoint_game(seed: u64, cases: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..cases {
        let universe = rng.gen_range(2..=4usize);
        let depth = rng.gen_range(1..=3usize);
        let f = MonotoneFn::random(&mut rng, universe, depth);
        let by_iteration = nested_fixpoint_naive(&|x| f.eval(x), universe, depth);
        let (game, nodes) = match build_fixpoint_game(&|x| f.eval(x), universe, depth) {
            Ok(g) => g,
            Err(e) => {
                failures.push(format!("case {i}: game build failed: {e}"));
                continue;
            }
        };
        let sol = zielonka_solve(&game);
        let by_game: BTreeSet<usize> = (0..universe)
            .filter(|&q| sol.winner[nodes[q]] == Player::Exists)
            .collect();
        if by_iteration != by_game {
            failures.push(format!(
                "case {i} (n={universe}, depth={depth}): iteration {by_iteration:?} vs game {by_game:?}"
            ));
        }
    }
    SuiteReport { name: "fixpoint-game".into(), cases, failures }
}

/// Model checking game winners against the Kleene semantics on random
/// relational formulas and models.
pub fn suite_mcgame(seed: u64, formulas: usize, models_per: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0;
    let cfg = FormulaGenConfig::relational(10);
    let atoms = vec!["p".to_string(), "q".to_string()];
    for i in 0..formulas {
        let chi = normalize(&random_formula(&mut rng, &cfg));
        let table = crate::closure::fl_closure(&chi);
        for j in 0..models_per {
            let model = random_rel_model(&mut rng, 4, &atoms);
            let mc = match build_mc_game(&model, &table, 2_000_000) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("formula {i} model {j}: {e}"));
                    continue;
                }
            };
            let sol = zielonka_solve(&mc.game);
            for id in table.all_ids() {
                let ext = semantics_eval(&model, table.formula(id), &Valuation::new());
                for x in 0..model.num_states {
                    cases += 1;
                    let won = sol.winner[mc.pair_node[&(x, id)]] == Player::Exists;
                    if won != ext.contains(&x) {
                        failures.push(format!(
                            "formula {i} model {j} state {x}: game={won}, semantics={} for {}",
                            ext.contains(&x),
                            table.formula(id)
                        ));
                    }
                }
            }
        }
    }
    SuiteReport { name: "mcgame".into(), cases, failures }
}

/// Brute-force relational model search: enumerates all models with up to
/// `max_states` states over the atoms occurring in the formula (canonical
/// order) and returns the first one with a satisfying state as root.
pub fn relational_oracle(chi: &Formula, max_states: usize) -> Option<Coalgebra> {
    let atoms: Vec<String> = collect_atoms(chi).into_iter().collect();
    let a = atoms.len();
    for n in 1..=max_states {
        // Per state: an atom subset (2^a) and a successor subset (2^n).
        let per_state = (1usize << a) * (1usize << n);
        let total = per_state.checked_pow(n as u32)?;
        for code in 0..total {
            let mut c = code;
            let mut succ = Vec::with_capacity(n);
            let mut atom_sets = Vec::with_capacity(n);
            for _ in 0..n {
                let s = c % per_state;
                c /= per_state;
                let atom_mask = s / (1 << n);
                let succ_mask = s % (1 << n);
                succ.push(
                    (0..n)
                        .filter(|&t| succ_mask & (1 << t) != 0)
                        .collect::<BTreeSet<_>>(),
                );
                atom_sets.push(
                    (0..a)
                        .filter(|&k| atom_mask & (1 << k) != 0)
                        .map(|k| atoms[k].clone())
                        .collect::<BTreeSet<_>>(),
                );
            }
            let model = Coalgebra {
                num_states: n,
                root: 0,
                parts: vec![CoalgebraPart::Relational { succ, atoms: atom_sets }],
            };
            let ext = semantics_eval(&model, chi, &Valuation::new());
            if let Some(&root) = ext.iter().next() {
                let mut m = model;
                m.root = root;
                return Some(m);
            }
        }
    }
    None
}

fn collect_atoms(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(f: &Formula, out: &mut BTreeSet<String>) {
        match f {
            Formula::Modal(op, args) => {
                match &op.kind {
                    crate::formula::ModalKind::Atom(a)
                    | crate::formula::ModalKind::NegAtom(a) => {
                        out.insert(a.clone());
                    }
                    _ => {}
                }
                args.iter().for_each(|x| walk(x, out));
            }
            Formula::And(l, r) | Formula::Or(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            Formula::Mu(_, b) | Formula::Nu(_, b) | Formula::Not(b) => walk(b, out),
            _ => {}
        }
    }
    walk(f, &mut out);
    out
}

/// Solver against the relational oracle: if the oracle finds a model within
/// the bound the solver must say SAT, and if the solver says UNSAT the
/// oracle must find nothing. Every SAT verdict must carry a verified model.
pub fn suite_solver_vs_oracle(
    seed: u64,
    cases: usize,
    max_len: usize,
    oracle_states: usize,
) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let cfg = FormulaGenConfig::relational(max_len);
    for i in 0..cases {
        let chi = normalize(&random_formula(&mut rng, &cfg));
        let spec = LogicSpec::single(Logic::Relational);
        let result = match run_formula(
            &chi,
            spec,
            EngineOptions { verify: true, ..Default::default() },
        ) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("case {i} ({chi}): engine error {e}"));
                continue;
            }
        };
        let found = relational_oracle(&chi, oracle_states);
        match (result.verdict, &found) {
            (Verdict::Sat, _) => {
                if result.model.is_none() {
                    failures.push(format!("case {i} ({chi}): SAT without model"));
                }
            }
            (Verdict::Unsat, Some(_)) => {
                failures.push(format!(
                    "case {i} ({chi}): solver UNSAT but oracle found a model"
                ));
            }
            (Verdict::Unsat, None) => {}
            (Verdict::Unknown, _) => {
                failures.push(format!("case {i} ({chi}): unexpected UNKNOWN"));
            }
        }
    }
    SuiteReport { name: "solver-vs-oracle".into(), cases, failures }
}

/// Round-trip equisatisfiability of the one-step pair normalization,
/// checked on both sides by the brute oracle.
pub fn suite_normalize_pair(seed: u64, cases: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..cases {
        let logic = match i % 3 {
            0 => Logic::Relational,
            1 => Logic::Graded,
            _ => Logic::Probabilistic,
        };
        let mut cfg = PairGenConfig::new(logic);
        cfg.max_theta = 5;
        cfg.max_literals = 3;
        let pair = random_pair(&mut rng, &cfg);
        let norm = crate::onestep::normalize_pair(&pair);
        if norm.num_vars > 8 || norm.theta.len() > 12 {
            continue;
        }
        let spec = LogicSpec::single(logic);
        let a = oss_brute(&pair, &spec, None);
        let b = oss_brute(&norm, &spec, None);
        match (a, b) {
            (Ok(x), Ok(y)) => {
                if x.is_sat() != y.is_sat() {
                    failures.push(format!(
                        "case {i}: normalization changed satisfiability ({x} vs {y})"
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                failures.push(format!("case {i}: oracle error {e}"));
            }
        }
    }
    SuiteReport { name: "normalize-pair".into(), cases, failures }
}

/// One-step polysize model property check for a witness.
pub fn witness_support_ok(pair_vars: usize, w: &OsWitness) -> bool {
    w.support_size() <= pair_vars.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinize_suite_small() {
        let r = suite_determinize(1, 4, 50);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn onestep_suites_small() {
        for logic in [Logic::Relational, Logic::Graded, Logic::Probabilistic] {
            let r = suite_onestep(2, logic, 60);
            assert!(r.passed(), "{:?}", r.failures);
        }
    }

    #[test]
    fn fixpoint_game_suite_small() {
        let r = suite_fixpoint_game(3, 10);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn mcgame_suite_small() {
        let r = suite_mcgame(4, 3, 2);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn oracle_finds_single_state_model() {
        let spec = LogicSpec::single(Logic::Relational);
        let chi = normalize(&crate::parse::parse("mu X. (p | dia X)", &spec).unwrap());
        let m = relational_oracle(&chi, 1).expect("model with one state");
        assert_eq!(m.num_states, 1);
    }

    #[test]
    fn oracle_reports_none_for_mu_diamond() {
        let spec = LogicSpec::single(Logic::Relational);
        let chi = normalize(&crate::parse::parse("mu X. dia X", &spec).unwrap());
        assert!(relational_oracle(&chi, 3).is_none());
    }

    #[test]
    fn oracle_finds_fairness_witness() {
        let spec = LogicSpec::single(Logic::Relational);
        let chi =
            normalize(&crate::parse::parse("nu X. mu Y. ((p & dia X) | dia Y)", &spec).unwrap());
        let m = relational_oracle(&chi, 2).expect("fairness model within two states");
        assert!(m.num_states <= 2);
    }

    #[test]
    fn solver_vs_oracle_small() {
        let r = suite_solver_vs_oracle(5, 25, 10, 3);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn normalize_pair_suite_small() {
        let r = suite_normalize_pair(6, 60);
        assert!(r.passed(), "{:?}", r.failures);
    }
}
