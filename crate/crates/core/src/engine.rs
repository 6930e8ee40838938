//! The global caching satisfiability engine.
//!
//! The co-determinized tracking automaton is expanded node by node from its
//! initial state; after (optionally, every few) expansion steps the winning
//! regions of the underlying satisfiability game are computed as nested
//! fixpoints `E_Q` / `A_Q` of the one-step propagation operators `f_Q` /
//! `g_Q` over the expanded node set, and the run stops as soon as the
//! initial node is decided. Both operators grow monotonically with `Q`, so
//! early verdicts agree with the final one.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::closure::{fl_closure, ClosureTable, FormulaId};
use crate::determinize::{Dpa, TrackingBuchi};
use crate::formula::{Formula, LogicSpec};
use crate::games::Coalgebra;
use crate::onestep::{oss_solve, OneStepPair, OsLiteral, OsOptions, OsOutcome};
use crate::tracking::{Letter, TrackingNpa};
use crate::Error;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => write!(f, "SAT"),
            Verdict::Unsat => write!(f, "UNSAT"),
            Verdict::Unknown => write!(f, "UNKNOWN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    Fifo,
    /// Smallest label first (ties by node id).
    LabelSize,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Run the propagation fixpoints every N expansions; 0 = final only.
    pub solve_every: usize,
    pub expansion_order: ExpansionOrder,
    /// Cap on expanded nodes; exceeding it yields an UNKNOWN verdict.
    pub max_nodes: usize,
    pub os_options: OsOptions,
    /// Extract a model on SAT and verify it against the Kleene semantics.
    pub verify: bool,
    /// Additionally check every pseudo-extension membership (slower).
    pub deep_verify: bool,
    /// Extract a model on SAT even without verification.
    pub extract_model: bool,
}

impl Default for EngineOptions {
    fn default() -> EngineOptions {
        EngineOptions {
            solve_every: 0,
            expansion_order: ExpansionOrder::Fifo,
            max_nodes: 100_000,
            os_options: OsOptions::default(),
            verify: false,
            deep_verify: false,
            extract_model: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    /// |F|: size of the Fischer–Ladner closure.
    pub closure_size: usize,
    /// Alternation depth k of the target formula.
    pub alternation_depth: u32,
    pub expanded_nodes: usize,
    pub discovered_nodes: usize,
    pub backend_calls: usize,
    /// Evaluations of the one-step propagation operators.
    pub fixpoint_sweeps: usize,
    /// Label-evolution equations checked during expansion (all must hold).
    pub label_checks: usize,
    pub wall: Duration,
}

#[derive(Debug)]
pub struct RunResult {
    pub verdict: Verdict,
    pub stats: RunStats,
    pub model: Option<Coalgebra>,
    /// True when some probabilistic nonlinear query came back undecided;
    /// UNSAT verdicts are downgraded to UNKNOWN in that case.
    pub incomplete_backend: bool,
}

/// Stage log of the last existential solve: per winning node the
/// approximant snapshot it was first derived with, for strategy extraction.
#[derive(Debug, Clone, Default)]
pub struct StageLog {
    pub levels: usize,
    /// Compressed fixpoint level of each node (its priority's image).
    pub node_level: HashMap<NodeId, usize>,
    pub records: HashMap<NodeId, StageRecord>,
}

#[derive(Debug, Clone)]
pub struct StageRecord {
    /// Per-level μ iteration counters (outermost last; ν slots stay 0).
    pub sig: Vec<u64>,
    /// Approximant vector at the deriving evaluation, indexed by level - 1.
    pub env: Vec<BTreeSet<NodeId>>,
}

enum OutcomeKind {
    Sat,
    Unsat,
    Incomplete,
}

pub struct Engine {
    table: ClosureTable,
    logic: LogicSpec,
    opts: EngineOptions,
    dpa: Dpa,
    /// Per DPA node: the projected formula label, sorted.
    labels: Vec<Vec<FormulaId>>,
    label_ids: Vec<u32>,
    label_intern: HashMap<Vec<FormulaId>, u32>,
    choice_succ: Vec<Option<Vec<(Letter, NodeId)>>>,
    sel_succ: Vec<Option<Vec<(Letter, NodeId)>>>,
    bot_in_label: Vec<bool>,
    expanded: Vec<NodeId>,
    in_q: Vec<bool>,
    frontier: VecDeque<NodeId>,
    in_u: Vec<bool>,
    oss_memo: HashMap<(u32, Vec<u32>), OutcomeKind>,
    pub stats: RunStats,
    poisoned: bool,
}

impl Engine {
    /// Builds the engine for a normalized formula.
    pub fn new(chi: &Formula, logic: LogicSpec, opts: EngineOptions) -> Result<Engine, Error> {
        assert!(chi.is_closed() && chi.is_clean() && !chi.contains_not());
        let table = fl_closure(chi);
        let (dpa, init_label) = {
            let buchi = TrackingBuchi::new(TrackingNpa::new(&table));
            let dpa = Dpa::new(&[buchi.initial()]).complement();
            let init_label = buchi.project_label(dpa.states[0].tree.root_states());
            (dpa, init_label)
        };
        let mut engine = Engine {
            table,
            logic,
            opts,
            dpa,
            labels: vec![init_label],
            label_ids: Vec::new(),
            label_intern: HashMap::new(),
            choice_succ: vec![None],
            sel_succ: vec![None],
            bot_in_label: Vec::new(),
            expanded: Vec::new(),
            in_q: vec![false],
            frontier: VecDeque::from([0]),
            in_u: vec![true],
            oss_memo: HashMap::new(),
            stats: RunStats::default(),
            poisoned: false,
        };
        engine.stats.closure_size = engine.table.n0();
        engine.stats.alternation_depth = engine.table.k;
        engine.register_node(0);
        engine.stats.discovered_nodes = 1;
        Ok(engine)
    }

    fn register_node(&mut self, node: NodeId) {
        let label = &self.labels[node];
        let bot = self
            .table
            .id_of(&Formula::Bot)
            .map(|b| label.contains(&b))
            .unwrap_or(false);
        while self.bot_in_label.len() <= node {
            self.bot_in_label.push(false);
        }
        self.bot_in_label[node] = bot;
        while self.label_ids.len() <= node {
            self.label_ids.push(0);
        }
        let next = self.label_intern.len() as u32;
        let id = *self.label_intern.entry(label.clone()).or_insert(next);
        self.label_ids[node] = id;
    }

    pub fn table(&self) -> &ClosureTable {
        &self.table
    }

    pub fn logic(&self) -> &LogicSpec {
        &self.logic
    }

    pub fn os_options(&self) -> &OsOptions {
        &self.opts.os_options
    }

    pub fn initial(&self) -> NodeId {
        self.dpa.initial
    }

    pub fn label(&self, node: NodeId) -> &[FormulaId] {
        &self.labels[node]
    }

    pub fn node_priority(&self, node: NodeId) -> u32 {
        self.dpa.priority(node)
    }

    pub fn num_nodes(&self) -> usize {
        self.dpa.len()
    }

    pub fn expanded_nodes(&self) -> &[NodeId] {
        &self.expanded
    }

    pub fn is_expanded(&self, node: NodeId) -> bool {
        self.in_q[node]
    }

    pub fn choice_successors(&self, node: NodeId) -> &[(Letter, NodeId)] {
        self.choice_succ[node].as_deref().unwrap_or(&[])
    }

    pub fn selection_successors(&self, node: NodeId) -> &[(Letter, NodeId)] {
        self.sel_succ[node].as_deref().unwrap_or(&[])
    }

    /// Deterministic transition with label-evolution checking; interns the
    /// successor node.
    fn dpa_step(&mut self, from: NodeId, letter: &Letter) -> Result<NodeId, Error> {
        let to = {
            let Engine { table, dpa, .. } = self;
            let buchi = TrackingBuchi::new(TrackingNpa::new(table));
            dpa.step_with(
                from,
                |s| buchi.successors(s, letter),
                |s| buchi.accepting(s),
                buchi.num_states(),
            )
        };
        while self.labels.len() < self.dpa.len() {
            let idx = self.labels.len();
            let buchi = TrackingBuchi::new(TrackingNpa::new(&self.table));
            let l = buchi.project_label(self.dpa.states[idx].tree.root_states());
            self.labels.push(l);
            self.choice_succ.push(None);
            self.sel_succ.push(None);
            self.in_q.push(false);
            self.in_u.push(false);
            self.stats.discovered_nodes += 1;
            self.register_node(idx);
        }
        // Label evolution: the macrostate label must equal the transition
        // image of the source label, checked on every expanded transition.
        let npa = TrackingNpa::new(&self.table);
        let mut expected: Vec<FormulaId> = self.labels[from]
            .iter()
            .flat_map(|&psi| npa.delta(psi, letter))
            .collect();
        expected.sort_unstable();
        expected.dedup();
        if expected != self.labels[to] {
            return Err(Error::Internal(format!(
                "label evolution violated: {:?} --{letter}--> {:?}, expected {:?}",
                self.labels[from], self.labels[to], expected
            )));
        }
        self.stats.label_checks += 1;
        Ok(to)
    }

    /// Expands one frontier node: computes all relevant choice and selection
    /// successors, adding new nodes to the frontier.
    pub fn expand(&mut self, node: NodeId) -> Result<(), Error> {
        assert!(self.in_u[node], "expanding a non-frontier node");
        self.in_u[node] = false;
        self.in_q[node] = true;
        self.expanded.push(node);

        let label = self.labels[node].clone();
        let (choices, selections) = {
            let npa = TrackingNpa::new(&self.table);
            npa.relevant_letters(&label)?
        };

        let mut cs = Vec::with_capacity(choices.len());
        for tau in choices {
            let to = self.dpa_step(node, &tau)?;
            cs.push((tau, to));
            self.discover(to);
        }
        self.choice_succ[node] = Some(cs);

        let mut ss = Vec::with_capacity(selections.len());
        for kappa in selections {
            let to = self.dpa_step(node, &kappa)?;
            ss.push((kappa, to));
            self.discover(to);
        }
        self.sel_succ[node] = Some(ss);
        self.stats.expanded_nodes = self.expanded.len();
        Ok(())
    }

    fn discover(&mut self, node: NodeId) {
        if !self.in_q[node] && !self.in_u[node] {
            self.in_u[node] = true;
            self.frontier.push_back(node);
        }
    }

    fn pop_frontier(&mut self) -> Option<NodeId> {
        match self.opts.expansion_order {
            ExpansionOrder::Fifo => self.frontier.pop_front(),
            ExpansionOrder::LabelSize => {
                let best = self
                    .frontier
                    .iter()
                    .copied()
                    .min_by_key(|&n| (self.labels[n].len(), n))?;
                let pos = self.frontier.iter().position(|&n| n == best).unwrap();
                self.frontier.remove(pos)
            }
        }
    }

    /// The one-step pair of a node: γ = modal literals of the label over the
    /// placeholder set V = their argument formulae; Θ = the given successor
    /// labels, read as subsets of V.
    pub fn one_step_pair(&self, node: NodeId, theta_labels: &[&[FormulaId]]) -> OneStepPair {
        let mut vars: Vec<FormulaId> = Vec::new();
        let mut gamma: Vec<OsLiteral> = Vec::new();
        for &psi in &self.labels[node] {
            if let crate::closure::FKind::Modal { args } = self.table.kind(psi) {
                let op = self.table.modal_op(psi).unwrap().clone();
                let arg_idx: Vec<usize> = args
                    .iter()
                    .map(|&a| {
                        if let Some(i) = vars.iter().position(|&v| v == a) {
                            i
                        } else {
                            vars.push(a);
                            vars.len() - 1
                        }
                    })
                    .collect();
                gamma.push(OsLiteral { op, args: arg_idx });
            }
        }
        let mut theta: Vec<BTreeSet<usize>> = Vec::new();
        for l in theta_labels {
            let profile: BTreeSet<usize> = l
                .iter()
                .filter_map(|f| vars.iter().position(|v| v == f))
                .collect();
            if !theta.contains(&profile) {
                theta.push(profile);
            }
        }
        OneStepPair::new(vars.len(), gamma, theta)
    }

    fn oss_outcome(&mut self, node: NodeId, theta_nodes: &[NodeId]) -> Result<&OutcomeKind, Error> {
        let mut theta_ids: Vec<u32> = theta_nodes.iter().map(|&n| self.label_ids[n]).collect();
        theta_ids.sort_unstable();
        theta_ids.dedup();
        let key = (self.label_ids[node], theta_ids);
        if !self.oss_memo.contains_key(&key) {
            let theta_labels: Vec<&[FormulaId]> =
                theta_nodes.iter().map(|&n| self.labels[n].as_slice()).collect();
            let pair = self.one_step_pair(node, &theta_labels);
            self.stats.backend_calls += 1;
            let outcome = oss_solve(&pair, &self.logic, &self.opts.os_options)?;
            let kind = match outcome {
                OsOutcome::Sat(_) => OutcomeKind::Sat,
                OsOutcome::Unsat => OutcomeKind::Unsat,
                OsOutcome::UnsatAtResolution(_) => {
                    self.poisoned = true;
                    OutcomeKind::Incomplete
                }
            };
            self.oss_memo.insert(key.clone(), kind);
        }
        Ok(&self.oss_memo[&key])
    }

    /// Order- and parity-preserving compression of the priorities present
    /// among expanded nodes onto a small initial segment, keeping the nested
    /// fixpoint depth proportional to the number of parity alternations
    /// actually present.
    fn compress_priorities(&self) -> (HashMap<u32, usize>, usize) {
        let mut present: Vec<u32> = self.expanded.iter().map(|&n| self.dpa.priority(n)).collect();
        present.sort_unstable();
        present.dedup();
        let mut map = HashMap::new();
        let mut last: Option<(u32, usize)> = None;
        for p in present {
            let c = match last {
                None => {
                    if p % 2 == 0 {
                        2
                    } else {
                        1
                    }
                }
                Some((lp, lc)) => {
                    if lp % 2 == p % 2 {
                        lc + 2
                    } else {
                        lc + 1
                    }
                }
            };
            map.insert(p, c);
            last = Some((p, c));
        }
        let levels = last.map(|(_, c)| c).unwrap_or(0);
        (map, levels)
    }

    /// `f_Q`: a node propagates one-step satisfiability when its label is
    /// consistent (no ⊥), some propositional step stays in `X`, and its
    /// one-step pair over the selected successors within `X` is satisfiable.
    fn f_q(
        &mut self,
        env: &[BTreeSet<NodeId>],
        node_level: &HashMap<NodeId, usize>,
    ) -> Result<BTreeSet<NodeId>, Error> {
        self.stats.fixpoint_sweeps += 1;
        let mut out = BTreeSet::new();
        let nodes = self.expanded.clone();
        for q in nodes {
            let x = &env[node_level[&q] - 1];
            if self.bot_in_label[q] {
                continue;
            }
            let has_choice = self
                .choice_successors(q)
                .iter()
                .any(|(_, t)| x.contains(t));
            if !has_choice {
                continue;
            }
            let theta: Vec<NodeId> = self
                .selection_successors(q)
                .iter()
                .filter(|(_, t)| x.contains(t))
                .map(|(_, t)| *t)
                .collect();
            if matches!(self.oss_outcome(q, &theta)?, OutcomeKind::Sat) {
                out.insert(q);
            }
        }
        Ok(out)
    }

    /// `g_Q`: the dual propagation, with complements taken over all of
    /// `D_χ` — unexpanded successors count as outside `X`.
    fn g_q(
        &mut self,
        env: &[BTreeSet<NodeId>],
        node_level: &HashMap<NodeId, usize>,
    ) -> Result<BTreeSet<NodeId>, Error> {
        self.stats.fixpoint_sweeps += 1;
        let mut out = BTreeSet::new();
        let nodes = self.expanded.clone();
        for q in nodes {
            let x = &env[node_level[&q] - 1];
            if self.bot_in_label[q] {
                out.insert(q);
                continue;
            }
            let all_choices = self
                .choice_successors(q)
                .iter()
                .all(|(_, t)| x.contains(t));
            if all_choices {
                out.insert(q);
                continue;
            }
            let theta: Vec<NodeId> = self
                .selection_successors(q)
                .iter()
                .filter(|(_, t)| !x.contains(t))
                .map(|(_, t)| *t)
                .collect();
            if matches!(self.oss_outcome(q, &theta)?, OutcomeKind::Unsat) {
                out.insert(q);
            }
        }
        Ok(out)
    }

    /// Nested fixpoint solver by naive Kleene iteration with innermost-first
    /// restarts. `exists_side` selects `E_Q` (μ at odd levels, operator
    /// `f_Q`) vs. `A_Q` (flipped binders, `g_Q`). ν-level results are
    /// memoized per outer context; a second pass with a warm memo re-derives
    /// every winning node under exact inner solutions, which is the
    /// recording pass for strategy extraction.
    fn nested_solve(
        &mut self,
        exists_side: bool,
        record: Option<&mut StageLog>,
    ) -> Result<BTreeSet<NodeId>, Error> {
        let (map, levels) = self.compress_priorities();
        let node_level: HashMap<NodeId, usize> = self
            .expanded
            .iter()
            .map(|&n| (n, map[&self.dpa.priority(n)]))
            .collect();
        if levels == 0 {
            return Ok(BTreeSet::new());
        }
        let full: BTreeSet<NodeId> = self.expanded.iter().copied().collect();
        let mut ctx = NestedCtx {
            exists_side,
            levels,
            env: vec![BTreeSet::new(); levels],
            full,
            node_level,
            nu_memo: HashMap::new(),
            mu_counters: vec![0; levels],
            recording: None,
        };
        // Pass 1: plain solve, warming the ν memo.
        let result = self.nested_level(&mut ctx, levels)?;
        if let Some(log) = record {
            // Pass 2: identical run; every ν loop now starts at its exact
            // solution, so recorded approximants are valid stages.
            let top = ctx.levels;
            ctx.env = vec![BTreeSet::new(); top];
            ctx.mu_counters = vec![0; top];
            ctx.recording = Some(HashMap::new());
            let replay = self.nested_level(&mut ctx, top)?;
            if replay != result {
                return Err(Error::Internal("recording pass diverged from solve".into()));
            }
            log.levels = ctx.levels;
            log.node_level = ctx.node_level.clone();
            log.records = ctx.recording.take().unwrap();
        }
        Ok(result)
    }

    fn nested_level(
        &mut self,
        ctx: &mut NestedCtx,
        level: usize,
    ) -> Result<BTreeSet<NodeId>, Error> {
        if level == 0 {
            let result = if ctx.exists_side {
                self.f_q(&ctx.env, &ctx.node_level)?
            } else {
                self.g_q(&ctx.env, &ctx.node_level)?
            };
            if let Some(rec) = ctx.recording.as_mut() {
                for &q in &result {
                    rec.entry(q).or_insert_with(|| StageRecord {
                        sig: ctx.mu_counters.clone(),
                        env: ctx.env.clone(),
                    });
                }
            }
            return Ok(result);
        }
        // μ at odd levels on the existential side, flipped on the dual side.
        let is_mu = (level % 2 == 1) == ctx.exists_side;
        if is_mu {
            ctx.mu_counters[level - 1] = 0;
            let mut x = BTreeSet::new();
            loop {
                ctx.env[level - 1] = x.clone();
                let next = self.nested_level(ctx, level - 1)?;
                if next == x {
                    return Ok(x);
                }
                ctx.mu_counters[level - 1] += 1;
                x = next;
            }
        } else {
            let outer_key: Vec<Vec<NodeId>> = (level..ctx.levels)
                .map(|l| ctx.env[l].iter().copied().collect())
                .collect();
            if ctx.recording.is_none() {
                if let Some(hit) = ctx.nu_memo.get(&(level, outer_key.clone())) {
                    ctx.env[level - 1] = hit.clone();
                    return Ok(hit.clone());
                }
            }
            let mut x = match ctx.nu_memo.get(&(level, outer_key.clone())) {
                Some(hit) => hit.clone(),
                None => ctx.full.clone(),
            };
            loop {
                ctx.env[level - 1] = x.clone();
                let next = self.nested_level(ctx, level - 1)?;
                if next == x {
                    ctx.nu_memo.insert((level, outer_key), x.clone());
                    return Ok(x);
                }
                x = next;
            }
        }
    }

    /// `E_Q` with a stage log for strategy extraction.
    pub fn solve_exists(&mut self) -> Result<(BTreeSet<NodeId>, StageLog), Error> {
        let mut log = StageLog::default();
        let e = self.nested_solve(true, Some(&mut log))?;
        Ok((e, log))
    }

    /// `A_Q` (no stage log; only the existential side feeds extraction).
    pub fn solve_forall(&mut self) -> Result<BTreeSet<NodeId>, Error> {
        self.nested_solve(false, None)
    }

    /// Expands everything within the node budget, without solving.
    pub fn expand_all(&mut self) -> Result<(), Error> {
        while let Some(q) = self.pop_frontier() {
            if self.expanded.len() >= self.opts.max_nodes {
                return Err(Error::Budget(format!(
                    "node budget of {} exhausted",
                    self.opts.max_nodes
                )));
            }
            self.expand(q)?;
        }
        Ok(())
    }

    pub fn poisoned(&self) -> bool {
        self.poisoned
    }

    /// The full decision loop: expansion with optional intermediate solving,
    /// then a final solve; on SAT, model extraction and verification per the
    /// options.
    pub fn run(&mut self) -> Result<RunResult, Error> {
        let start = Instant::now();
        let mut budget_exhausted = false;
        let mut steps = 0usize;
        let mut verdict: Option<(Verdict, Option<StageLog>)> = None;

        while let Some(q) = self.pop_frontier() {
            if self.expanded.len() >= self.opts.max_nodes {
                self.frontier.push_front(q);
                budget_exhausted = true;
                break;
            }
            self.expand(q)?;
            steps += 1;
            if self.opts.solve_every > 0 && steps % self.opts.solve_every == 0 {
                let (e, log) = self.solve_exists()?;
                if e.contains(&self.initial()) {
                    verdict = Some((Verdict::Sat, Some(log)));
                    break;
                }
                let a = self.solve_forall()?;
                if a.contains(&self.initial()) {
                    verdict = Some((Verdict::Unsat, None));
                    break;
                }
            }
        }

        let (mut final_verdict, log) = match verdict {
            Some((v, log)) => (v, log),
            None => {
                let (e, log) = self.solve_exists()?;
                if e.contains(&self.initial()) {
                    (Verdict::Sat, Some(log))
                } else {
                    let a = self.solve_forall()?;
                    if a.contains(&self.initial()) {
                        (Verdict::Unsat, None)
                    } else {
                        (Verdict::Unknown, None)
                    }
                }
            }
        };

        if final_verdict == Verdict::Unknown && !budget_exhausted && !self.poisoned {
            // After full expansion the two regions partition the reachable
            // nodes; reaching this point indicates a bug.
            return Err(Error::Internal(
                "initial node in neither winning region after full expansion".into(),
            ));
        }
        if final_verdict == Verdict::Unsat && self.poisoned {
            // Incomplete nonlinear answers may only downgrade, never flip.
            final_verdict = Verdict::Unknown;
        }

        let mut model = None;
        if final_verdict == Verdict::Sat && (self.opts.verify || self.opts.extract_model) {
            let log = log.expect("SAT verdict carries a stage log");
            let built = crate::model::extract_and_build(self, &log)?;
            if self.opts.verify {
                let ok =
                    crate::model::verify_truth(&built, &self.table.chi, self.opts.deep_verify);
                if !ok {
                    return Err(Error::Internal("extracted model fails verification".into()));
                }
            }
            model = Some(built);
        }

        self.stats.wall = start.elapsed();
        Ok(RunResult {
            verdict: final_verdict,
            stats: self.stats.clone(),
            model,
            incomplete_backend: self.poisoned,
        })
    }

    /// Plain-text dump of the expanded part of the automaton (--dump-dpa).
    pub fn dump_dpa(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "co-determinized tracking automaton: {} expanded / {} discovered",
            self.expanded.len(),
            self.num_nodes()
        );
        for &q in &self.expanded {
            let label: Vec<String> = self.labels[q]
                .iter()
                .map(|&f| self.table.formula(f).to_string())
                .collect();
            let _ = writeln!(
                out,
                "node {} prio {} label {{{}}}",
                q,
                self.node_priority(q),
                label.join(", ")
            );
            for (letter, to) in self.choice_successors(q) {
                let _ = writeln!(out, "  {letter} -> {to}");
            }
            for (letter, to) in self.selection_successors(q) {
                let _ = writeln!(out, "  {letter} -> {to}");
            }
        }
        out
    }
}

struct NestedCtx {
    exists_side: bool,
    levels: usize,
    env: Vec<BTreeSet<NodeId>>,
    full: BTreeSet<NodeId>,
    node_level: HashMap<NodeId, usize>,
    nu_memo: HashMap<(usize, Vec<Vec<NodeId>>), BTreeSet<NodeId>>,
    mu_counters: Vec<u64>,
    recording: Option<HashMap<NodeId, StageRecord>>,
}

/// Convenience wrapper: normalize, build and run.
pub fn run_formula(
    chi: &Formula,
    logic: LogicSpec,
    opts: EngineOptions,
) -> Result<RunResult, Error> {
    let normalized = crate::formula::normalize(chi);
    let mut engine = Engine::new(&normalized, logic, opts)?;
    engine.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::normalize;
    use crate::parse::parse;

    fn run(text: &str, logic: &str) -> RunResult {
        run_opts(text, logic, EngineOptions { verify: true, ..Default::default() })
    }

    fn run_opts(text: &str, logic: &str, opts: EngineOptions) -> RunResult {
        let spec = LogicSpec::parse(logic).unwrap();
        let f = parse(text, &spec).unwrap();
        run_formula(&f, spec, opts).unwrap()
    }

    #[test]
    fn afp_diamond_is_sat_with_verified_model() {
        let r = run("mu X. (p | dia X)", "rel");
        assert_eq!(r.verdict, Verdict::Sat);
        assert!(r.model.is_some());
    }

    #[test]
    fn mu_diamond_is_unsat() {
        let r = run("mu X. dia X", "rel");
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn nu_diamond_is_sat() {
        let r = run("nu X. dia X", "rel");
        assert_eq!(r.verdict, Verdict::Sat);
    }

    #[test]
    fn graded_infinite_tree_is_sat() {
        let r = run("nu X. (a & <1> X)", "graded");
        assert_eq!(r.verdict, Verdict::Sat);
    }

    #[test]
    fn expansion_of_initial_node_discovers_successors() {
        let spec = LogicSpec::parse("rel").unwrap();
        let f = normalize(&parse("mu X. (p | dia X)", &spec).unwrap());
        let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
        let init = e.initial();
        e.expand(init).unwrap();
        assert!(!e.choice_successors(init).is_empty());
        // {chi} holds no modal literals, so the only selection is empty.
        assert_eq!(e.selection_successors(init).len(), 1);
    }

    #[test]
    fn empty_modal_label_gets_empty_selection_successor() {
        let spec = LogicSpec::parse("rel").unwrap();
        let f = normalize(&parse("true", &spec).unwrap());
        let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
        let init = e.initial();
        e.expand(init).unwrap();
        let ss = e.selection_successors(init);
        assert_eq!(ss.len(), 1);
        let (_, t) = &ss[0];
        assert!(e.label(*t).is_empty());
    }

    #[test]
    fn early_and_final_solving_agree_on_small_corpus() {
        for (text, logic) in [
            ("mu X. (p | dia X)", "rel"),
            ("mu X. dia X", "rel"),
            ("nu X. (p & dia X)", "rel"),
            ("nu X. mu Y. ((p & dia X) | dia Y)", "rel"),
        ] {
            let base = run_opts(text, logic, EngineOptions::default());
            let early = run_opts(
                text,
                logic,
                EngineOptions { solve_every: 1, ..Default::default() },
            );
            assert_eq!(base.verdict, early.verdict, "{text}");
        }
    }

    #[test]
    fn determinacy_partition_after_full_expansion() {
        for (text, logic) in [
            ("mu X. (p | dia X)", "rel"),
            ("mu X. dia X", "rel"),
            ("nu X. box (mu Y. p | dia Y)", "rel"),
        ] {
            let spec = LogicSpec::parse(logic).unwrap();
            let f = normalize(&parse(text, &spec).unwrap());
            let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
            e.expand_all().unwrap();
            let (win_e, _) = e.solve_exists().unwrap();
            let win_a = e.solve_forall().unwrap();
            let expanded: BTreeSet<NodeId> = e.expanded_nodes().iter().copied().collect();
            let union: BTreeSet<NodeId> = win_e.union(&win_a).copied().collect();
            assert_eq!(union, expanded, "{text}: E and A must partition Q");
            assert!(win_e.is_disjoint(&win_a), "{text}: E and A overlap");
        }
    }

    #[test]
    fn f_and_g_are_monotone_in_each_argument() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let spec = LogicSpec::parse("rel").unwrap();
        let f = normalize(&parse("nu X. mu Y. ((p & dia X) | dia Y)", &spec).unwrap());
        let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
        e.expand_all().unwrap();
        let (map, levels) = e.compress_priorities();
        let node_level: HashMap<NodeId, usize> = e
            .expanded
            .iter()
            .map(|&n| (n, map[&e.dpa.priority(n)]))
            .collect();
        let nodes: Vec<NodeId> = e.expanded.clone();
        for _ in 0..30 {
            let mut small: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); levels];
            let mut large: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); levels];
            for l in 0..levels {
                for &n in &nodes {
                    if rng.gen_bool(0.4) {
                        small[l].insert(n);
                    }
                }
                large[l] = small[l].clone();
                for &n in &nodes {
                    if rng.gen_bool(0.3) {
                        large[l].insert(n);
                    }
                }
            }
            let fs = e.f_q(&small, &node_level).unwrap();
            let fl = e.f_q(&large, &node_level).unwrap();
            assert!(fs.is_subset(&fl), "f_Q not monotone");
            let gs = e.g_q(&small, &node_level).unwrap();
            let gl = e.g_q(&large, &node_level).unwrap();
            assert!(gs.is_subset(&gl), "g_Q not monotone in X");
        }
    }

    #[test]
    fn bot_label_is_immediately_in_g() {
        let spec = LogicSpec::parse("rel").unwrap();
        let f = normalize(&parse("p & false", &spec).unwrap());
        let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
        e.expand_all().unwrap();
        let bot = e.table.id_of(&Formula::Bot).unwrap();
        let (map, levels) = e.compress_priorities();
        let node_level: HashMap<NodeId, usize> = e
            .expanded
            .iter()
            .map(|&n| (n, map[&e.dpa.priority(n)]))
            .collect();
        let empty: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); levels];
        let g0 = e.g_q(&empty, &node_level).unwrap();
        let with_bot: Vec<NodeId> = e
            .expanded
            .iter()
            .copied()
            .filter(|&n| e.label(n).contains(&bot))
            .collect();
        assert!(!with_bot.is_empty());
        for n in with_bot {
            assert!(g0.contains(&n));
            // Expansion still records successors; only propagation kills
            // inconsistent nodes.
            assert!(!e.choice_successors(n).is_empty());
            assert!(!e.selection_successors(n).is_empty());
        }
    }

    #[test]
    fn budget_exhaustion_reports_unknown() {
        let spec = LogicSpec::parse("rel").unwrap();
        let f = parse("nu X. mu Y. ((p & dia X) | dia Y)", &spec).unwrap();
        let r = run_formula(
            &f,
            spec,
            EngineOptions { max_nodes: 1, ..Default::default() },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
    }

    #[test]
    fn engine_solver_agrees_with_naive_nested_iteration() {
        use std::cell::RefCell;
        for (text, logic) in [
            ("mu X. (p | dia X)", "rel"),
            ("nu X. mu Y. ((p & dia X) | dia Y)", "rel"),
            ("nu X. box (mu Y. X | dia Y)", "rel"),
            ("nu X. (a & <1> X)", "graded"),
        ] {
            let spec = LogicSpec::parse(logic).unwrap();
            let f = normalize(&parse(text, &spec).unwrap());
            let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
            e.expand_all().unwrap();
            let (by_engine, _) = e.solve_exists().unwrap();
            let (map, levels) = e.compress_priorities();
            let node_level: HashMap<NodeId, usize> = e
                .expanded
                .iter()
                .map(|&n| (n, map[&e.dpa.priority(n)]))
                .collect();
            let nodes: Vec<NodeId> = e.expanded.clone();
            let dense: HashMap<NodeId, usize> =
                nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
            let cell = RefCell::new(&mut e);
            let f_dense = |env: &[BTreeSet<usize>]| -> BTreeSet<usize> {
                let env_nodes: Vec<BTreeSet<NodeId>> = env
                    .iter()
                    .map(|s| s.iter().map(|&i| nodes[i]).collect())
                    .collect();
                let out = cell
                    .borrow_mut()
                    .f_q(&env_nodes, &node_level)
                    .unwrap();
                out.iter().map(|n| dense[n]).collect()
            };
            let by_naive =
                crate::selftest::nested_fixpoint_naive(&f_dense, nodes.len(), levels);
            let by_naive_nodes: BTreeSet<NodeId> =
                by_naive.iter().map(|&i| nodes[i]).collect();
            assert_eq!(by_engine, by_naive_nodes, "{text}: memoized vs naive solver");
        }
    }

    #[test]
    fn complemented_priorities_within_bound() {
        // After complementation every node priority lies in
        // {2, ..., 2*M + 2} for M = |F| * max(k, 1) (the Büchi state count).
        for (text, logic) in [
            ("mu X. (p | dia X)", "rel"),
            ("nu X. mu Y. ((p & dia X) | dia Y)", "rel"),
            ("nu X. mu Y. nu Z. ((p & dia X) | (q & dia Y) | dia Z)", "rel"),
            ("p & dia q", "rel"),
        ] {
            let spec = LogicSpec::parse(logic).unwrap();
            let f = normalize(&parse(text, &spec).unwrap());
            let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
            e.expand_all().unwrap();
            let m = e.table.n0() as u32 * e.table.k.max(1);
            for &q in e.expanded_nodes() {
                let p = e.node_priority(q);
                assert!(
                    (2..=2 * m + 2).contains(&p),
                    "{text}: priority {p} outside [2, {}]",
                    2 * m + 2
                );
            }
        }
    }

    #[test]
    fn label_size_expansion_order_agrees() {
        for (text, logic, expect) in [
            ("mu X. (p | dia X)", "rel", Verdict::Sat),
            ("mu X. dia X", "rel", Verdict::Unsat),
        ] {
            let r = run_opts(
                text,
                logic,
                EngineOptions {
                    expansion_order: ExpansionOrder::LabelSize,
                    ..Default::default()
                },
            );
            assert_eq!(r.verdict, expect, "{text}");
        }
    }

    #[test]
    fn stage_log_signatures_decrease_along_mu_justifications() {
        for (text, logic) in [
            ("nu X. mu Y. ((p & dia X) | dia Y)", "rel"),
            ("mu X. nu Y. ((p & dia X) | (q & dia Y))", "rel"),
            ("nu X. mu Y. nu Z. ((p & dia X) | (q & dia Y) | dia Z)", "rel"),
            ("mu X. (X | p)", "rel"),
            ("nu X. (a & <1> X)", "graded"),
        ] {
            let spec = LogicSpec::parse(logic).unwrap();
            let f = normalize(&parse(text, &spec).unwrap());
            let mut e = Engine::new(&f, spec, EngineOptions::default()).unwrap();
            e.expand_all().unwrap();
            let (win_e, log) = e.solve_exists().unwrap();
            for (&q, rec) in &log.records {
                if !win_e.contains(&q) {
                    continue;
                }
                let level = log.node_level[&q];
                // μ level iff the level is odd (existential side).
                if level % 2 == 1 {
                    for q2 in rec.env[level - 1].iter() {
                        let rec2 = log.records.get(q2).expect("justified node recorded");
                        // Compare counters outermost-first.
                        let a: Vec<u64> = rec2.sig.iter().rev().copied().collect();
                        let b: Vec<u64> = rec.sig.iter().rev().copied().collect();
                        assert!(a < b, "{text}: signature not decreasing: {a:?} vs {b:?}");
                    }
                }
            }
        }
    }
}
