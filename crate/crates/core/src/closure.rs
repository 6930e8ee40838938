//! Fischer–Ladner closure, θ/θ*, alternation depth and tracking priorities.
//!
//! The closure 𝐅 of the target formula is the state set of the tracking
//! automaton; every element is interned and referred to by a dense id.

use std::collections::{BTreeMap, HashMap};

use crate::formula::{Formula, ModalOp};

pub type FormulaId = u32;

/// Structural kind of a closure element, with child ids resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FKind {
    Top,
    Bot,
    And(FormulaId, FormulaId),
    Or(FormulaId, FormulaId),
    /// Modal literal; `args` are the closure ids of the argument formulae
    /// (empty for propositional atoms).
    Modal { args: Vec<FormulaId> },
    /// Fixpoint literal with the id of its unfolding `ψ[ηX.ψ/X]`.
    Fix { var: String, is_mu: bool, unfold: FormulaId },
}

/// The closure table: 𝐅 with structure, priorities, θ, θ* and alternation
/// depths of the (clean, closed, normalized) target formula.
pub struct ClosureTable {
    pub chi: Formula,
    formulas: Vec<Formula>,
    index: HashMap<Formula, FormulaId>,
    kinds: Vec<FKind>,
    /// Tracking priority α per closure element.
    pub priority: Vec<u32>,
    /// Alternation depth per bound variable.
    pub ad: BTreeMap<String, u32>,
    /// Alternation depth of the target formula (0 when fixpoint-free).
    pub k: u32,
    theta: BTreeMap<String, Formula>,
    binder_pos: BTreeMap<String, usize>,
}

impl ClosureTable {
    pub fn n0(&self) -> usize {
        self.formulas.len()
    }

    pub fn id_of(&self, f: &Formula) -> Option<FormulaId> {
        self.index.get(f).copied()
    }

    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.formulas[id as usize]
    }

    pub fn kind(&self, id: FormulaId) -> &FKind {
        &self.kinds[id as usize]
    }

    pub fn chi_id(&self) -> FormulaId {
        0
    }

    pub fn all_ids(&self) -> impl Iterator<Item = FormulaId> {
        0..self.formulas.len() as FormulaId
    }

    pub fn is_modal_literal(&self, id: FormulaId) -> bool {
        matches!(self.kinds[id as usize], FKind::Modal { .. })
    }

    pub fn modal_op(&self, id: FormulaId) -> Option<&ModalOp> {
        match self.formula(id) {
            Formula::Modal(op, _) => Some(op),
            _ => None,
        }
    }

    pub fn theta(&self, var: &str) -> Option<&Formula> {
        self.theta.get(var)
    }

    /// θ*: closes a subformula of χ by repeatedly substituting the innermost
    /// free fixpoint variable (the one whose binder lies furthest to the
    /// right in χ) with its fixpoint literal.
    pub fn theta_star(&self, f: &Formula) -> Formula {
        let mut cur = f.clone();
        loop {
            let free = cur.free_vars();
            if free.is_empty() {
                return cur;
            }
            let innermost = free
                .iter()
                .max_by_key(|x| self.binder_pos.get(*x).copied().unwrap_or(0))
                .expect("nonempty")
                .clone();
            let theta = self
                .theta
                .get(&innermost)
                .unwrap_or_else(|| panic!("unbound variable {innermost} in theta_star"))
                .clone();
            cur = cur.subst(&innermost, &theta);
        }
    }
}

/// Computes the Fischer–Ladner closure of a normalized formula together with
/// alternation depths and tracking priorities.
pub fn fl_closure(chi: &Formula) -> ClosureTable {
    assert!(chi.is_closed(), "closure requires a closed formula");
    assert!(chi.is_clean(), "closure requires a clean formula");
    assert!(!chi.contains_not(), "closure requires negation normal form");

    // θ and binder positions from the (clean) target formula.
    let mut theta = BTreeMap::new();
    let mut theta_is_mu = BTreeMap::new();
    let mut binder_pos = BTreeMap::new();
    {
        let mut counter = 0usize;
        fn visit(
            f: &Formula,
            counter: &mut usize,
            theta: &mut BTreeMap<String, Formula>,
            theta_is_mu: &mut BTreeMap<String, bool>,
            binder_pos: &mut BTreeMap<String, usize>,
        ) {
            match f {
                Formula::And(l, r) | Formula::Or(l, r) => {
                    visit(l, counter, theta, theta_is_mu, binder_pos);
                    visit(r, counter, theta, theta_is_mu, binder_pos);
                }
                Formula::Modal(_, args) => args
                    .iter()
                    .for_each(|a| visit(a, counter, theta, theta_is_mu, binder_pos)),
                Formula::Mu(x, b) | Formula::Nu(x, b) => {
                    *counter += 1;
                    theta.insert(x.clone(), f.clone());
                    theta_is_mu.insert(x.clone(), matches!(f, Formula::Mu(..)));
                    binder_pos.insert(x.clone(), *counter);
                    visit(b, counter, theta, theta_is_mu, binder_pos);
                }
                _ => {}
            }
        }
        visit(chi, &mut counter, &mut theta, &mut theta_is_mu, &mut binder_pos);
    }

    // Alternation depth per Def. ad: ad(X) is the maximal alternation number
    // of dependency chains ending (outermost) in X, computed as
    //   ad(X) = max(1, max { ad(Y) + toggle(Y,X) | Y ≺_dep X }).
    let vars: Vec<String> = theta.keys().cloned().collect();
    let mut deps: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for y in &vars {
        let ty = &theta[y];
        let fv = ty.free_vars();
        for x in &vars {
            if x == y {
                continue;
            }
            // Y ≺_dep X: θ(Y) is a subformula of θ(X) and X ∈ FV(θ(Y)).
            if fv.contains(x) && theta[x].subformulas().contains(ty) {
                deps.entry(x.clone()).or_default().push(y.clone());
            }
        }
    }
    let mut ad: BTreeMap<String, u32> = BTreeMap::new();
    fn compute_ad(
        x: &str,
        deps: &BTreeMap<String, Vec<String>>,
        theta_is_mu: &BTreeMap<String, bool>,
        ad: &mut BTreeMap<String, u32>,
    ) -> u32 {
        if let Some(&v) = ad.get(x) {
            return v;
        }
        let mut best = 1;
        if let Some(inner) = deps.get(x) {
            for y in inner {
                let toggle = u32::from(theta_is_mu[y] != theta_is_mu[x]);
                best = best.max(compute_ad(y, deps, theta_is_mu, ad) + toggle);
            }
        }
        ad.insert(x.to_string(), best);
        best
    }
    for x in &vars {
        compute_ad(x, &deps, &theta_is_mu, &mut ad);
    }
    let k = ad.values().copied().max().unwrap_or(0);

    // Saturate under the four closure rules.
    let mut formulas: Vec<Formula> = Vec::new();
    let mut index: HashMap<Formula, FormulaId> = HashMap::new();
    let mut work: Vec<FormulaId> = Vec::new();
    let mut kinds: Vec<Option<FKind>> = Vec::new();

    fn intern(
        f: Formula,
        formulas: &mut Vec<Formula>,
        index: &mut HashMap<Formula, FormulaId>,
        kinds: &mut Vec<Option<FKind>>,
        work: &mut Vec<FormulaId>,
    ) -> FormulaId {
        if let Some(&id) = index.get(&f) {
            return id;
        }
        let id = formulas.len() as FormulaId;
        index.insert(f.clone(), id);
        formulas.push(f);
        kinds.push(None);
        work.push(id);
        id
    }

    intern(chi.clone(), &mut formulas, &mut index, &mut kinds, &mut work);
    while let Some(id) = work.pop() {
        let f = formulas[id as usize].clone();
        let kind = match &f {
            Formula::Top => FKind::Top,
            Formula::Bot => FKind::Bot,
            Formula::And(l, r) => {
                let li = intern((**l).clone(), &mut formulas, &mut index, &mut kinds, &mut work);
                let ri = intern((**r).clone(), &mut formulas, &mut index, &mut kinds, &mut work);
                FKind::And(li, ri)
            }
            Formula::Or(l, r) => {
                let li = intern((**l).clone(), &mut formulas, &mut index, &mut kinds, &mut work);
                let ri = intern((**r).clone(), &mut formulas, &mut index, &mut kinds, &mut work);
                FKind::Or(li, ri)
            }
            Formula::Modal(_, args) => {
                let ids = args
                    .iter()
                    .map(|a| intern(a.clone(), &mut formulas, &mut index, &mut kinds, &mut work))
                    .collect();
                FKind::Modal { args: ids }
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let unfold = b.subst(x, &f);
                let ui = intern(unfold, &mut formulas, &mut index, &mut kinds, &mut work);
                FKind::Fix {
                    var: x.clone(),
                    is_mu: matches!(f, Formula::Mu(..)),
                    unfold: ui,
                }
            }
            Formula::Var(x) | Formula::NegVar(x) => {
                panic!("free variable {x} in closure element; input not closed")
            }
            Formula::Not(_) => panic!("closure element not in negation normal form"),
        };
        kinds[id as usize] = Some(kind);
    }
    let kinds: Vec<FKind> = kinds.into_iter().map(Option::unwrap).collect();

    // Priorities: fixpoint literals according to the alternation depth of
    // their variable, everything else 1.
    let priority: Vec<u32> = kinds
        .iter()
        .map(|kind| match kind {
            FKind::Fix { var, is_mu, .. } => {
                let a = ad[var];
                if *is_mu {
                    2 * a
                } else {
                    2 * a - 1
                }
            }
            _ => 1,
        })
        .collect();

    ClosureTable {
        chi: chi.clone(),
        formulas,
        index,
        kinds,
        priority,
        ad,
        k,
        theta,

        binder_pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{normalize, Logic};
    use crate::parse::parse;
    use crate::formula::LogicSpec;

    fn rel(text: &str) -> ClosureTable {
        let spec = LogicSpec::single(Logic::Relational);
        let f = normalize(&parse(text, &spec).unwrap());
        fl_closure(&f)
    }

    #[test]
    fn closure_of_afp_diamond() {
        // mu X. (p | dia X): closure is {chi, p|dia chi, p, dia chi}.
        let t = rel("mu X. (p | dia X)");
        assert_eq!(t.n0(), 4);
        let chi = t.chi.clone();
        let unfolded = Formula::or(
            Formula::atom(Logic::Relational, "p"),
            Formula::diamond(chi.clone()),
        );
        assert!(t.id_of(&unfolded).is_some());
        assert!(t.id_of(&Formula::atom(Logic::Relational, "p")).is_some());
        assert!(t.id_of(&Formula::diamond(chi)).is_some());
        // |F| <= number of subformulas of chi.
        assert!(t.n0() <= t.chi.subformulas().len());
    }

    #[test]
    fn closure_of_top_is_singleton() {
        let t = rel("true");
        assert_eq!(t.n0(), 1);
    }

    #[test]
    fn theta_star_worked_example() {
        // chi = mu X. nu Y. (Y | dia X): theta*(Y | dia X) = (nu Y. Y | dia chi) | dia chi.
        let t = rel("mu X. nu Y. (Y | dia X)");
        let chi = t.chi.clone();
        let sub = Formula::or(
            Formula::Var("Y".into()),
            Formula::diamond(Formula::Var("X".into())),
        );
        let expected = Formula::or(
            Formula::nu(
                "Y",
                Formula::or(Formula::Var("Y".into()), Formula::diamond(chi.clone())),
            ),
            Formula::diamond(chi),
        );
        assert_eq!(t.theta_star(&sub), expected);
        // theta* lands inside the closure.
        assert!(t.id_of(&expected).is_some());
    }

    #[test]
    fn saturation_is_closed_under_rules() {
        let t = rel("nu X. mu Y. ((p & dia X) | dia Y)");
        for id in t.all_ids() {
            match t.kind(id).clone() {
                FKind::And(l, r) | FKind::Or(l, r) => {
                    assert!((l as usize) < t.n0() && (r as usize) < t.n0());
                }
                FKind::Modal { args } => {
                    for a in args {
                        assert!((a as usize) < t.n0());
                    }
                }
                FKind::Fix { unfold, .. } => {
                    assert!((unfold as usize) < t.n0());
                }
                _ => {}
            }
        }
        assert!(t.n0() <= t.chi.subformulas().len());
    }

    #[test]
    fn alternation_depth_independent_fixpoints() {
        // nu X. (mu Y. a | dia Y) & box X: no dependency, so ad(X)=ad(Y)=1.
        let t = rel("nu X. (mu Y. a | dia Y) & box X");
        assert_eq!(t.ad["X"], 1);
        assert_eq!(t.ad["Y"], 1);
        assert_eq!(t.k, 1);
    }

    #[test]
    fn alternation_depth_dependent_chain() {
        // nu X. box (mu Y. X | dia Y): Y depends on X and the kinds differ,
        // so the chain Y ≺_dep X toggles once. Under the literal definition
        // the outer variable collects the chain: ad(X)=2, ad(Y)=1, ad(chi)=2.
        let t = rel("nu X. box (mu Y. X | dia Y)");
        assert_eq!(t.ad["Y"], 1);
        assert_eq!(t.ad["X"], 2);
        assert_eq!(t.k, 2);
    }

    #[test]
    fn alternation_depth_fixpoint_free() {
        let t = rel("p & dia q");
        assert_eq!(t.k, 0);
    }

    #[test]
    fn priorities_follow_alternation_depth() {
        let t = rel("nu X. box (mu Y. X | dia Y)");
        for id in t.all_ids() {
            let p = t.priority[id as usize];
            match t.kind(id) {
                FKind::Fix { var, is_mu, .. } => {
                    if *is_mu {
                        assert_eq!(p, 2 * t.ad[var]);
                    } else {
                        assert_eq!(p, 2 * t.ad[var] - 1);
                    }
                }
                _ => assert_eq!(p, 1),
            }
        }
        // nu X at ad 2 -> priority 3; mu Y at ad 1 -> priority 2.
        let chi_id = t.chi_id();
        assert_eq!(t.priority[chi_id as usize], 3);
    }

    #[test]
    fn closure_size_bound_on_random_formulas() {
        use crate::gen::{FormulaGenConfig, random_formula};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cfg = FormulaGenConfig::relational(40);
        for _ in 0..1000 {
            let f = random_formula(&mut rng, &cfg);
            let n = normalize(&f);
            let t = fl_closure(&n);
            assert!(
                t.n0() <= n.subformulas().len(),
                "closure larger than subformula count for {n}"
            );
        }
    }
}
