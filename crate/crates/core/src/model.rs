//! Model extraction from a satisfiable verdict.
//!
//! From the stage log of the winning fixpoint, a positional strategy
//! (one choice letter plus a selection set per node) is read off; following
//! it from the initial node yields a pre-tableau, whose parity check makes
//! it a tableau. State nodes (nodes whose label already carries all modal
//! literals of their local path) carry a coherent coalgebra structure built
//! from one-step witnesses; the truth lemma is then verified by direct
//! Kleene evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num::rational::BigRational;
use num::Signed;
use num::Zero;

use crate::closure::{FKind, FormulaId};
use crate::engine::{Engine, NodeId, StageLog};
use crate::formula::{Formula, Logic, LogicSpec};
use crate::games::parity::has_cycle_with_max_parity;
use crate::games::{semantics_eval, Coalgebra, CoalgebraPart, Valuation};
use crate::onestep::{oss_solve, OsOutcome, OsWitness};
use crate::tracking::Letter;
use crate::Error;

/// Per-node strategy data: the unique propositional choice and the admitted
/// modal selections.
#[derive(Debug, Clone)]
pub struct Strategy {
    pub tau: HashMap<NodeId, (Letter, NodeId)>,
    pub xi: HashMap<NodeId, Vec<(Letter, NodeId)>>,
}

/// Extracts the positional strategy from the stage log: per winning node
/// `q`, with `Y` the approximant vector recorded at its stage, `τ_q` is the
/// first choice letter with `δ(q,τ) ∈ Y_{Ω(q)}` in canonical letter order,
/// and `Ξ_q` collects the relevant selections staying in `Y_{Ω(q)}`.
pub fn extract_strategy(engine: &Engine, log: &StageLog) -> Result<Strategy, Error> {
    if !log.records.contains_key(&engine.initial()) {
        return Err(Error::Contract(
            "strategy extraction requires the initial node to be winning".into(),
        ));
    }
    let mut tau = HashMap::new();
    let mut xi = HashMap::new();
    for (&q, rec) in &log.records {
        let level = log.node_level[&q];
        let y = &rec.env[level - 1];
        let choice = engine
            .choice_successors(q)
            .iter()
            .find(|(_, t)| y.contains(t))
            .cloned()
            .ok_or_else(|| {
                Error::Internal(format!("winning node {q} lacks a choice into its stage"))
            })?;
        let sels: Vec<(Letter, NodeId)> = engine
            .selection_successors(q)
            .iter()
            .filter(|(_, t)| y.contains(t))
            .cloned()
            .collect();
        tau.insert(q, choice);
        xi.insert(q, sels);
    }
    Ok(Strategy { tau, xi })
}

/// A pre-tableau: the sub-automaton reachable from the initial node under
/// the strategy, with one choice edge and a set of selection edges per node.
#[derive(Debug, Clone)]
pub struct PreTableau {
    pub nodes: Vec<NodeId>,
    pub tau: HashMap<NodeId, (Letter, NodeId)>,
    pub xi: HashMap<NodeId, Vec<(Letter, NodeId)>>,
}

impl PreTableau {
    pub fn selection_targets(&self, q: NodeId) -> Vec<NodeId> {
        self.xi[&q].iter().map(|(_, t)| *t).collect()
    }
}

/// Builds the pre-tableau reachable from the initial node and asserts the
/// four pre-tableau conditions. A violation is an internal error (it would
/// indicate a strategy-extraction bug), never silently ignored.
pub fn build_pretableau(engine: &mut Engine, strategy: &Strategy) -> Result<PreTableau, Error> {
    let root = engine.initial();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut queue = VecDeque::from([root]);
    seen.insert(root);
    let mut tau = HashMap::new();
    let mut xi = HashMap::new();
    while let Some(q) = queue.pop_front() {
        let t = strategy
            .tau
            .get(&q)
            .cloned()
            .ok_or_else(|| Error::Internal(format!("reachable node {q} has no strategy")))?;
        let s = strategy.xi.get(&q).cloned().unwrap_or_default();
        for (_, succ) in std::iter::once(&t).chain(&s) {
            if seen.insert(*succ) {
                queue.push_back(*succ);
            }
        }
        tau.insert(q, t);
        xi.insert(q, s);
    }
    let nodes: Vec<NodeId> = seen.into_iter().collect();

    // Condition 4: consistent label; exactly one choice holds by
    // construction.
    let bot = engine.table().id_of(&Formula::Bot);
    for &q in &nodes {
        if let Some(b) = bot {
            if engine.label(q).contains(&b) {
                return Err(Error::Internal(format!("pre-tableau node {q} contains bottom")));
            }
        }
    }
    // Condition 2: edges restrict the transition function (all edges come
    // from the cached successor lists; spot-check the choice edges).
    for (&q, (letter, t)) in &tau {
        let hit = engine
            .choice_successors(q)
            .iter()
            .any(|(l, s)| l == letter && s == t);
        if !hit {
            return Err(Error::Internal(format!("choice edge of {q} is not a transition")));
        }
    }
    // Condition 3: one-step satisfiability of every node's pair.
    for &q in &nodes {
        let theta: Vec<NodeId> = xi[&q].iter().map(|(_, t)| *t).collect();
        let theta_labels: Vec<&[FormulaId]> = theta.iter().map(|&t| engine.label(t)).collect();
        let pair = engine.one_step_pair(q, &theta_labels);
        match oss_solve(&pair, engine.logic(), engine.os_options())? {
            OsOutcome::Sat(_) => {}
            other => {
                return Err(Error::Internal(format!(
                    "pre-tableau condition 3 fails at {q}: {other}"
                )))
            }
        }
    }
    Ok(PreTableau { nodes, tau, xi })
}

/// Tableau check: every infinite path of the pre-tableau must be accepted
/// by the co-determinized tracking automaton; for a deterministic automaton
/// this is equivalent to every reachable cycle having an even maximal
/// priority. Acyclic parts pass vacuously.
pub fn verify_tableau(engine: &Engine, pt: &PreTableau) -> bool {
    let n = engine.num_nodes();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut region = vec![false; n];
    for &q in &pt.nodes {
        region[q] = true;
        let (_, t) = &pt.tau[&q];
        succ[q].push(*t);
        for (_, t) in &pt.xi[&q] {
            succ[q].push(*t);
        }
    }
    let priorities: Vec<u32> = (0..n).map(|i| engine.node_priority(i)).collect();
    !has_cycle_with_max_parity(&succ, &priorities, &region, 1)
}

/// The cumulative labeling and state-node structure of a pre-tableau.
pub struct StateNodeMap {
    /// Carrier: the state nodes in ascending node order.
    pub states: Vec<NodeId>,
    /// `⌈q⌉`: first state node on the local path of `q`.
    pub collapse: HashMap<NodeId, NodeId>,
    /// Cumulative label: all formulae on the local path of a node.
    pub cumulative: HashMap<NodeId, BTreeSet<FormulaId>>,
}

/// Computes cumulative labels along the unique local (choice) paths, the
/// state nodes, and the collapse map. Modal literals only accumulate along
/// local paths, so every local path reaches a state node within one lap of
/// its cycle.
pub fn state_nodes(engine: &Engine, pt: &PreTableau) -> Result<StateNodeMap, Error> {
    let is_modal = |f: FormulaId| matches!(engine.table().kind(f), FKind::Modal { .. });
    let mut cumulative: HashMap<NodeId, BTreeSet<FormulaId>> = HashMap::new();
    for &q in &pt.nodes {
        let mut seen_path: Vec<NodeId> = Vec::new();
        let mut cur = q;
        let mut acc: BTreeSet<FormulaId> = BTreeSet::new();
        loop {
            if seen_path.contains(&cur) {
                break;
            }
            seen_path.push(cur);
            acc.extend(engine.label(cur).iter().copied());
            cur = pt.tau[&cur].1;
        }
        cumulative.insert(q, acc);
    }
    let mut state_set: BTreeSet<NodeId> = BTreeSet::new();
    for &q in &pt.nodes {
        let label_modal: BTreeSet<FormulaId> = engine
            .label(q)
            .iter()
            .copied()
            .filter(|&f| is_modal(f))
            .collect();
        let cum_modal: BTreeSet<FormulaId> = cumulative[&q]
            .iter()
            .copied()
            .filter(|&f| is_modal(f))
            .collect();
        if label_modal == cum_modal {
            state_set.insert(q);
        }
    }
    let mut collapse = HashMap::new();
    for &q in &pt.nodes {
        let mut cur = q;
        let mut steps = 0;
        loop {
            if state_set.contains(&cur) {
                collapse.insert(q, cur);
                break;
            }
            cur = pt.tau[&cur].1;
            steps += 1;
            if steps > pt.nodes.len() + 1 {
                return Err(Error::Internal(format!(
                    "no state node on the local path of {q}"
                )));
            }
        }
    }
    Ok(StateNodeMap {
        states: state_set.into_iter().collect(),
        collapse,
        cumulative,
    })
}

#[derive(Debug, Clone)]
pub struct StateDetail {
    pub node: NodeId,
    /// |V| of the node's one-step pair.
    pub num_vars: usize,
    /// Number of modal literals in the node's label.
    pub gamma_len: usize,
}

/// The full extraction result, including the data the verification passes
/// and the acceptance checks inspect.
pub struct Extraction {
    pub model: Coalgebra,
    pub pre_tableau: PreTableau,
    pub state_map: StateNodeMap,
    pub details: Vec<StateDetail>,
}

/// Builds the coherent coalgebra on the state nodes of a verified tableau:
/// per state node, a backend witness for its one-step pair is mapped along
/// `u ↦ ⌈h(u)⌉`, where the section `h` picks for each successor label the
/// least pre-tableau successor carrying it. Graded and probabilistic
/// weights merge additively under the image map (the functors take image
/// measures). Coherence is asserted pointwise before returning.
pub fn build_coherent_coalgebra(
    engine: &mut Engine,
    pt: &PreTableau,
    map: &StateNodeMap,
) -> Result<(Coalgebra, Vec<StateDetail>), Error> {
    let states = &map.states;
    let state_index: HashMap<NodeId, usize> =
        states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let logics: Vec<Logic> = engine.logic().components().to_vec();
    let n = states.len();

    let mut parts: Vec<CoalgebraPart> = logics
        .iter()
        .map(|l| match l {
            Logic::Relational => CoalgebraPart::Relational {
                succ: vec![BTreeSet::new(); n],
                atoms: vec![BTreeSet::new(); n],
            },
            Logic::Graded => CoalgebraPart::Graded {
                weight: vec![BTreeMap::new(); n],
                atoms: vec![BTreeSet::new(); n],
            },
            Logic::Probabilistic => CoalgebraPart::Probabilistic {
                dist: vec![BTreeMap::new(); n],
                atoms: vec![BTreeSet::new(); n],
            },
        })
        .collect();

    let mut details = Vec::with_capacity(n);
    for (i, &q) in states.iter().enumerate() {
        // Successor labels in canonical order, with the section h mapping
        // each label to its least carrier node.
        let mut succs: Vec<NodeId> = pt.selection_targets(q);
        succs.sort_unstable();
        succs.dedup();
        let mut label_to_node: BTreeMap<Vec<FormulaId>, NodeId> = BTreeMap::new();
        for &t in &succs {
            label_to_node.entry(engine.label(t).to_vec()).or_insert(t);
        }
        let theta_labels: Vec<Vec<FormulaId>> = label_to_node.keys().cloned().collect();
        let theta_refs: Vec<&[FormulaId]> = theta_labels.iter().map(|v| v.as_slice()).collect();
        let pair = engine.one_step_pair(q, &theta_refs);
        details.push(StateDetail {
            node: q,
            num_vars: pair.num_vars,
            gamma_len: pair.gamma.len(),
        });
        let witness = match oss_solve(&pair, engine.logic(), engine.os_options())? {
            OsOutcome::Sat(w) => w,
            other => {
                return Err(Error::Internal(format!(
                    "backend returned {other} for a pre-tableau node's pair (condition 3)"
                )))
            }
        };
        let image: Vec<usize> = theta_labels
            .iter()
            .map(|l| {
                let node = label_to_node[l];
                state_index[&map.collapse[&node]]
            })
            .collect();
        let ws: Vec<&OsWitness> = match &witness {
            OsWitness::Fusion(ws) => ws.iter().collect(),
            w => vec![w],
        };
        if ws.len() != parts.len() {
            return Err(Error::Internal("witness arity mismatch with fusion".into()));
        }
        for (part, w) in parts.iter_mut().zip(ws) {
            apply_witness(part, i, w, &image)?;
        }
    }

    let root = state_index[&map.collapse[&engine.initial()]];
    let model = Coalgebra { num_states: n, root, parts };
    model.validate()?;
    check_coherence(engine, pt, map, &model, &state_index)?;
    Ok((model, details))
}

fn apply_witness(
    part: &mut CoalgebraPart,
    state: usize,
    w: &OsWitness,
    image: &[usize],
) -> Result<(), Error> {
    match (part, w) {
        (
            CoalgebraPart::Relational { succ, atoms },
            OsWitness::Relational { chosen, atoms: ats },
        ) => {
            for &profile in chosen {
                succ[state].insert(image[profile]);
            }
            atoms[state] = ats.clone();
            Ok(())
        }
        (CoalgebraPart::Graded { weight, atoms }, OsWitness::Graded { mult, atoms: ats }) => {
            for (profile, m) in mult.iter().enumerate() {
                if m.is_positive() {
                    *weight[state].entry(image[profile]).or_default() += m;
                }
            }
            atoms[state] = ats.clone();
            Ok(())
        }
        (
            CoalgebraPart::Probabilistic { dist, atoms },
            OsWitness::Probabilistic { weight, atoms: ats },
        ) => {
            for (profile, p) in weight.iter().enumerate() {
                if p.is_positive() {
                    let entry = dist[state]
                        .entry(image[profile])
                        .or_insert_with(BigRational::zero);
                    *entry += p;
                }
            }
            atoms[state] = ats.clone();
            Ok(())
        }
        _ => Err(Error::Internal("witness shape does not match component".into())),
    }
}

/// Pseudo-extension of every closure formula: the collapse images of nodes
/// whose cumulative label contains it, as carrier indices.
pub fn pseudo_extensions(
    engine: &Engine,
    pt: &PreTableau,
    map: &StateNodeMap,
    state_index: &HashMap<NodeId, usize>,
) -> HashMap<FormulaId, BTreeSet<usize>> {
    let mut out: HashMap<FormulaId, BTreeSet<usize>> = HashMap::new();
    for id in engine.table().all_ids() {
        out.insert(id, BTreeSet::new());
    }
    for &u in &pt.nodes {
        let target = state_index[&map.collapse[&u]];
        for &psi in &map.cumulative[&u] {
            out.get_mut(&psi).unwrap().insert(target);
        }
    }
    out
}

/// Coherence: whenever a state node pseudo-satisfies a modal literal, its
/// structure map lies in the lifted predicate applied to the argument
/// pseudo-extensions restricted to the node's designated successors.
fn check_coherence(
    engine: &Engine,
    pt: &PreTableau,
    map: &StateNodeMap,
    model: &Coalgebra,
    state_index: &HashMap<NodeId, usize>,
) -> Result<(), Error> {
    let pseudo = pseudo_extensions(engine, pt, map, state_index);
    for (i, &q) in map.states.iter().enumerate() {
        let designated: BTreeSet<usize> = pt
            .selection_targets(q)
            .iter()
            .map(|t| state_index[&map.collapse[t]])
            .collect();
        for &psi in &map.cumulative[&q] {
            let args = match engine.table().kind(psi) {
                FKind::Modal { args } => args.clone(),
                _ => continue,
            };
            if !pseudo[&psi].contains(&i) {
                continue;
            }
            let op = engine.table().modal_op(psi).unwrap();
            let arg_sets: Vec<BTreeSet<usize>> = args
                .iter()
                .map(|a| pseudo[a].intersection(&designated).copied().collect())
                .collect();
            let refs: Vec<&BTreeSet<usize>> = arg_sets.iter().collect();
            if !model.modal_holds(i, op, &refs) {
                return Err(Error::Internal(format!(
                    "coherence violated at state {i} for {}",
                    engine.table().formula(psi)
                )));
            }
        }
    }
    Ok(())
}

/// End-to-end extraction: strategy → pre-tableau → tableau parity check →
/// state nodes → coherent coalgebra.
pub fn extract(engine: &mut Engine, log: &StageLog) -> Result<Extraction, Error> {
    let strategy = extract_strategy(engine, log)?;
    let pt = build_pretableau(engine, &strategy)?;
    if !verify_tableau(engine, &pt) {
        return Err(Error::Internal(
            "strategy-derived pre-tableau has an odd-dominated cycle".into(),
        ));
    }
    let map = state_nodes(engine, &pt)?;
    let (model, details) = build_coherent_coalgebra(engine, &pt, &map)?;
    Ok(Extraction { model, pre_tableau: pt, state_map: map, details })
}

/// Engine-facing wrapper returning just the model.
pub fn extract_and_build(engine: &mut Engine, log: &StageLog) -> Result<Coalgebra, Error> {
    let ex = extract(engine, log)?;
    Ok(ex.model)
}

/// Truth check: the root satisfies the target formula under the exact
/// Kleene semantics (deep pseudo-extension checking lives in
/// [`verify_truth_deep`], which needs the extraction context).
pub fn verify_truth(model: &Coalgebra, chi: &Formula, _deep: bool) -> bool {
    if model.validate().is_err() {
        return false;
    }
    let ext = semantics_eval(model, chi, &Valuation::new());
    ext.contains(&model.root)
}

/// Deep verification: every state node satisfies every formula of its
/// pseudo-extension (the truth lemma, checked pointwise).
pub fn verify_truth_deep(engine: &Engine, ex: &Extraction) -> bool {
    let state_index: HashMap<NodeId, usize> = ex
        .state_map
        .states
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let pseudo = pseudo_extensions(engine, &ex.pre_tableau, &ex.state_map, &state_index);
    for id in engine.table().all_ids() {
        let members = &pseudo[&id];
        if members.is_empty() {
            continue;
        }
        let ext = semantics_eval(&ex.model, engine.table().formula(id), &Valuation::new());
        if !members.is_subset(&ext) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Model file format (line oriented, bit-exact round trips).
// ---------------------------------------------------------------------------

/// Serializes a model. Format:
///
/// ```text
/// mucalc-model 1
/// logic <tag>
/// states <n>
/// root <i>
/// part <k> <tag>
/// a <state> [<atom> ...]
/// e <state> [<succ> | <succ>:<w> | <succ>:<n>/<d> ...]
/// end
/// ```
///
/// Per part, one `a` line and one `e` line per state in ascending order;
/// successor lists ascending; rationals in lowest terms. The format is
/// canonical: parsing and re-serializing is byte-identical.
pub fn write_model(model: &Coalgebra, logic: &LogicSpec) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "mucalc-model 1");
    let _ = writeln!(out, "logic {logic}");
    let _ = writeln!(out, "states {}", model.num_states);
    let _ = writeln!(out, "root {}", model.root);
    for (k, part) in model.parts.iter().enumerate() {
        let _ = writeln!(out, "part {k} {}", part.logic());
        match part {
            CoalgebraPart::Relational { succ, atoms } => {
                for (s, ats) in atoms.iter().enumerate() {
                    let list: Vec<String> = ats.iter().cloned().collect();
                    let _ = writeln!(out, "a {s}{}", prefix_space(&list.join(" ")));
                }
                for (s, ss) in succ.iter().enumerate() {
                    let list: Vec<String> = ss.iter().map(|t| t.to_string()).collect();
                    let _ = writeln!(out, "e {s}{}", prefix_space(&list.join(" ")));
                }
            }
            CoalgebraPart::Graded { weight, atoms } => {
                for (s, ats) in atoms.iter().enumerate() {
                    let list: Vec<String> = ats.iter().cloned().collect();
                    let _ = writeln!(out, "a {s}{}", prefix_space(&list.join(" ")));
                }
                for (s, row) in weight.iter().enumerate() {
                    let list: Vec<String> = row.iter().map(|(t, w)| format!("{t}:{w}")).collect();
                    let _ = writeln!(out, "e {s}{}", prefix_space(&list.join(" ")));
                }
            }
            CoalgebraPart::Probabilistic { dist, atoms } => {
                for (s, ats) in atoms.iter().enumerate() {
                    let list: Vec<String> = ats.iter().cloned().collect();
                    let _ = writeln!(out, "a {s}{}", prefix_space(&list.join(" ")));
                }
                for (s, row) in dist.iter().enumerate() {
                    let list: Vec<String> = row
                        .iter()
                        .map(|(t, w)| format!("{t}:{}/{}", w.numer(), w.denom()))
                        .collect();
                    let _ = writeln!(out, "e {s}{}", prefix_space(&list.join(" ")));
                }
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

fn prefix_space(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" {s}")
    }
}

/// Parses the model file format. When `expected` is given, the embedded
/// logic tag must match it.
pub fn parse_model(
    text: &str,
    expected: Option<&LogicSpec>,
) -> Result<(Coalgebra, LogicSpec), Error> {
    let mut lines = text.lines();
    let bad = |msg: &str| Error::Model(msg.to_string());
    if lines.next() != Some("mucalc-model 1") {
        return Err(bad("missing header"));
    }
    let logic_line = lines.next().ok_or_else(|| bad("missing logic"))?;
    let tag = logic_line
        .strip_prefix("logic ")
        .ok_or_else(|| bad("malformed logic line"))?;
    let logic = LogicSpec::parse(tag).map_err(Error::Model)?;
    if let Some(exp) = expected {
        if *exp != logic {
            return Err(bad("logic tag mismatch"));
        }
    }
    let n: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("states "))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("malformed states line"))?;
    let root: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("root "))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("malformed root line"))?;

    let mut parts = Vec::new();
    let mut line = lines.next();
    for (k, &logic_k) in logic.components().iter().enumerate() {
        let header = line.ok_or_else(|| bad("missing part"))?;
        let expect = format!("part {k} {logic_k}");
        if header != expect {
            return Err(bad(&format!("expected `{expect}`, found `{header}`")));
        }
        let mut atoms: Vec<BTreeSet<String>> = Vec::with_capacity(n);
        for s in 0..n {
            let l = lines.next().ok_or_else(|| bad("missing atom line"))?;
            let rest = l
                .strip_prefix(&format!("a {s}"))
                .ok_or_else(|| bad("malformed atom line"))?;
            let set: BTreeSet<String> = rest.split_whitespace().map(str::to_string).collect();
            atoms.push(set);
        }
        let mut rel: Vec<BTreeSet<usize>> = Vec::new();
        let mut grd: Vec<BTreeMap<usize, num::BigInt>> = Vec::new();
        let mut prb: Vec<BTreeMap<usize, BigRational>> = Vec::new();
        for s in 0..n {
            let l = lines.next().ok_or_else(|| bad("missing edge line"))?;
            let rest = l
                .strip_prefix(&format!("e {s}"))
                .ok_or_else(|| bad("malformed edge line"))?;
            match logic_k {
                Logic::Relational => {
                    let set: Result<BTreeSet<usize>, _> =
                        rest.split_whitespace().map(str::parse).collect();
                    rel.push(set.map_err(|_| bad("bad successor"))?);
                }
                Logic::Graded => {
                    let mut row = BTreeMap::new();
                    for item in rest.split_whitespace() {
                        let (t, w) = item.split_once(':').ok_or_else(|| bad("bad weight"))?;
                        row.insert(
                            t.parse().map_err(|_| bad("bad successor"))?,
                            w.parse().map_err(|_| bad("bad weight"))?,
                        );
                    }
                    grd.push(row);
                }
                Logic::Probabilistic => {
                    let mut row = BTreeMap::new();
                    for item in rest.split_whitespace() {
                        let (t, w) = item.split_once(':').ok_or_else(|| bad("bad weight"))?;
                        let (num, den) =
                            w.split_once('/').ok_or_else(|| bad("bad rational"))?;
                        row.insert(
                            t.parse().map_err(|_| bad("bad successor"))?,
                            BigRational::new(
                                num.parse().map_err(|_| bad("bad numerator"))?,
                                den.parse().map_err(|_| bad("bad denominator"))?,
                            ),
                        );
                    }
                    prb.push(row);
                }
            }
        }
        parts.push(match logic_k {
            Logic::Relational => CoalgebraPart::Relational { succ: rel, atoms },
            Logic::Graded => CoalgebraPart::Graded { weight: grd, atoms },
            Logic::Probabilistic => CoalgebraPart::Probabilistic { dist: prb, atoms },
        });
        line = lines.next();
    }
    if line != Some("end") {
        return Err(bad("missing end marker"));
    }
    let model = Coalgebra { num_states: n, root, parts };
    model.validate()?;
    Ok((model, logic))
}
