//! Formula ASTs of the coalgebraic μ-calculus and their normalization.
//!
//! The surface syntax admits full negation; [`normalize`] pushes negation to
//! atoms and dual modalities, renames bound variables apart (cleanness) and
//! collapses redundant fixpoints. Downstream stages require normalized input.

use std::collections::BTreeSet;
use std::fmt;

use num::rational::BigRational;

use crate::poly::Polynomial;

/// Branching type of a component logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    Relational,
    Graded,
    Probabilistic,
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Logic::Relational => write!(f, "rel"),
            Logic::Graded => write!(f, "graded"),
            Logic::Probabilistic => write!(f, "prob"),
        }
    }
}

/// The logic a run works in: a single component, or a fusion of several.
///
/// The fusion interprets formulae over the product of the component functors;
/// each modal operator carries the tag of the component it acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicSpec {
    components: Vec<Logic>,
}

impl LogicSpec {
    pub fn single(logic: Logic) -> LogicSpec {
        LogicSpec { components: vec![logic] }
    }

    pub fn fusion(components: Vec<Logic>) -> Result<LogicSpec, String> {
        if components.len() < 2 {
            return Err("fusion requires at least two component logics".into());
        }
        let mut seen = BTreeSet::new();
        for c in &components {
            if !seen.insert(*c) {
                return Err(format!("duplicate fusion component {c}"));
            }
        }
        Ok(LogicSpec { components })
    }

    /// Parses `rel`, `graded`, `prob` or `fusion:rel+prob` style tags.
    pub fn parse(tag: &str) -> Result<LogicSpec, String> {
        fn one(t: &str) -> Result<Logic, String> {
            match t {
                "rel" => Ok(Logic::Relational),
                "graded" => Ok(Logic::Graded),
                "prob" => Ok(Logic::Probabilistic),
                other => Err(format!("unknown logic tag `{other}`")),
            }
        }
        if let Some(rest) = tag.strip_prefix("fusion:") {
            let parts: Result<Vec<Logic>, String> = rest.split('+').map(one).collect();
            LogicSpec::fusion(parts?)
        } else {
            Ok(LogicSpec::single(one(tag)?))
        }
    }

    pub fn components(&self) -> &[Logic] {
        &self.components
    }

    pub fn is_fusion(&self) -> bool {
        self.components.len() > 1
    }

    pub fn contains(&self, logic: Logic) -> bool {
        self.components.contains(&logic)
    }

    /// Component index a given operator logic dispatches to.
    pub fn component_index(&self, logic: Logic) -> Option<usize> {
        self.components.iter().position(|&c| c == logic)
    }
}

impl fmt::Display for LogicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.len() == 1 {
            write!(f, "{}", self.components[0])
        } else {
            let tags: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
            write!(f, "fusion:{}", tags.join("+"))
        }
    }
}

/// Payload of a modal operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalKind {
    /// Relational diamond (arity 1).
    Diamond,
    /// Relational box (arity 1).
    Box,
    /// Propositional atom (arity 0).
    Atom(String),
    /// Negated propositional atom (arity 0).
    NegAtom(String),
    /// Polynomial diamond `<p>` (arity = number of polynomial variables).
    DiaPoly(Polynomial),
    /// Polynomial box `[p]`.
    BoxPoly(Polynomial),
}

/// A modal operator: a component-logic tag plus its payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModalOp {
    pub logic: Logic,
    pub kind: ModalKind,
}

impl ModalOp {
    pub fn arity(&self) -> usize {
        match &self.kind {
            ModalKind::Diamond | ModalKind::Box => 1,
            ModalKind::Atom(_) | ModalKind::NegAtom(_) => 0,
            ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) => p.arity(),
        }
    }

    /// The dual operator of the same arity; `dual(dual(op)) == op`.
    pub fn dual(&self) -> ModalOp {
        let kind = match &self.kind {
            ModalKind::Diamond => ModalKind::Box,
            ModalKind::Box => ModalKind::Diamond,
            ModalKind::Atom(a) => ModalKind::NegAtom(a.clone()),
            ModalKind::NegAtom(a) => ModalKind::Atom(a.clone()),
            ModalKind::DiaPoly(p) => ModalKind::BoxPoly(p.clone()),
            ModalKind::BoxPoly(p) => ModalKind::DiaPoly(p.clone()),
        };
        ModalOp { logic: self.logic, kind }
    }

    /// Binary-encoding size of the operator's numeric constants.
    pub fn encoding_size(&self) -> u64 {
        match &self.kind {
            ModalKind::Diamond | ModalKind::Box => 1,
            ModalKind::Atom(_) | ModalKind::NegAtom(_) => 1,
            ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) => p.encoding_bits(),
        }
    }

    pub fn is_diamond_like(&self) -> bool {
        matches!(self.kind, ModalKind::Diamond | ModalKind::DiaPoly(_))
    }
}

impl fmt::Display for ModalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModalKind::Diamond => write!(f, "dia"),
            ModalKind::Box => write!(f, "box"),
            ModalKind::Atom(a) => write!(f, "{a}"),
            ModalKind::NegAtom(a) => write!(f, "!{a}"),
            ModalKind::DiaPoly(p) => write!(f, "<{p}>"),
            ModalKind::BoxPoly(p) => write!(f, "[{p}]"),
        }
    }
}

/// μ-calculus formulae. `Not` only occurs in surface syntax and is removed
/// by [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Modal(ModalOp, Vec<Formula>),
    Var(String),
    NegVar(String),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn mu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Mu(x.into(), Box::new(body))
    }

    pub fn nu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Nu(x.into(), Box::new(body))
    }

    pub fn atom(logic: Logic, name: impl Into<String>) -> Formula {
        Formula::Modal(
            ModalOp { logic, kind: ModalKind::Atom(name.into()) },
            vec![],
        )
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Modal(
            ModalOp { logic: Logic::Relational, kind: ModalKind::Diamond },
            vec![f],
        )
    }

    pub fn boxm(f: Formula) -> Formula {
        Formula::Modal(
            ModalOp { logic: Logic::Relational, kind: ModalKind::Box },
            vec![f],
        )
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
            match f {
                Formula::Top | Formula::Bot => {}
                Formula::And(l, r) | Formula::Or(l, r) => {
                    walk(l, bound, acc);
                    walk(r, bound, acc);
                }
                Formula::Modal(_, args) => args.iter().for_each(|a| walk(a, bound, acc)),
                Formula::Var(x) | Formula::NegVar(x) => {
                    if !bound.iter().any(|b| b == x) {
                        acc.insert(x.clone());
                    }
                }
                Formula::Mu(x, body) | Formula::Nu(x, body) => {
                    bound.push(x.clone());
                    walk(body, bound, acc);
                    bound.pop();
                }
                Formula::Not(g) => walk(g, bound, acc),
            }
        }
        let mut acc = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut acc);
        acc
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Substitutes `repl` for free occurrences of `Var(x)`. Free `NegVar(x)`
    /// occurrences are not expected here (normalized formulae have none under
    /// substitution sites); they are left untouched.
    pub fn subst(&self, x: &str, repl: &Formula) -> Formula {
        match self {
            Formula::Top | Formula::Bot => self.clone(),
            Formula::And(l, r) => Formula::and(l.subst(x, repl), r.subst(x, repl)),
            Formula::Or(l, r) => Formula::or(l.subst(x, repl), r.subst(x, repl)),
            Formula::Modal(op, args) => Formula::Modal(
                op.clone(),
                args.iter().map(|a| a.subst(x, repl)).collect(),
            ),
            Formula::Var(y) => {
                if y == x {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Formula::NegVar(_) => self.clone(),
            Formula::Mu(y, body) => {
                if y == x {
                    self.clone()
                } else {
                    Formula::Mu(y.clone(), Box::new(body.subst(x, repl)))
                }
            }
            Formula::Nu(y, body) => {
                if y == x {
                    self.clone()
                } else {
                    Formula::Nu(y.clone(), Box::new(body.subst(x, repl)))
                }
            }
            Formula::Not(g) => Formula::not(g.subst(x, repl)),
        }
    }

    /// Formula length over the standard alphabet (operators, literals and
    /// binders each count 1; a modal operator counts 1).
    pub fn len_symbols(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) | Formula::NegVar(_) => 1,
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.len_symbols() + r.len_symbols(),
            Formula::Modal(_, args) => 1 + args.iter().map(Formula::len_symbols).sum::<usize>(),
            Formula::Mu(_, b) | Formula::Nu(_, b) => 1 + b.len_symbols(),
            Formula::Not(g) => 1 + g.len_symbols(),
        }
    }

    /// Set of distinct subformulae (including `self`).
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut acc = BTreeSet::new();
        fn walk(f: &Formula, acc: &mut BTreeSet<Formula>) {
            if !acc.insert(f.clone()) {
                return;
            }
            match f {
                Formula::And(l, r) | Formula::Or(l, r) => {
                    walk(l, acc);
                    walk(r, acc);
                }
                Formula::Modal(_, args) => args.iter().for_each(|a| walk(a, acc)),
                Formula::Mu(_, b) | Formula::Nu(_, b) | Formula::Not(b) => walk(b, acc),
                _ => {}
            }
        }
        walk(self, &mut acc);
        acc
    }

    /// True if no fixpoint variable is bound by two different binders.
    pub fn is_clean(&self) -> bool {
        fn walk(f: &Formula, seen: &mut BTreeSet<String>) -> bool {
            match f {
                Formula::And(l, r) | Formula::Or(l, r) => walk(l, seen) && walk(r, seen),
                Formula::Modal(_, args) => args.iter().all(|a| walk(a, seen)),
                Formula::Mu(x, b) | Formula::Nu(x, b) => seen.insert(x.clone()) && walk(b, seen),
                Formula::Not(b) => walk(b, seen),
                _ => true,
            }
        }
        walk(self, &mut BTreeSet::new())
    }

    pub fn contains_not(&self) -> bool {
        match self {
            Formula::Not(_) => true,
            Formula::And(l, r) | Formula::Or(l, r) => l.contains_not() || r.contains_not(),
            Formula::Modal(_, args) => args.iter().any(Formula::contains_not),
            Formula::Mu(_, b) | Formula::Nu(_, b) => b.contains_not(),
            _ => false,
        }
    }
}

/// Negation normal form: pushes `Not` down to atoms, dual modalities and
/// negated variables.
fn nnf(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => neg(g),
        Formula::And(l, r) => Formula::and(nnf(l), nnf(r)),
        Formula::Or(l, r) => Formula::or(nnf(l), nnf(r)),
        Formula::Modal(op, args) => {
            Formula::Modal(op.clone(), args.iter().map(nnf).collect())
        }
        Formula::Mu(x, b) => Formula::Mu(x.clone(), Box::new(nnf(b))),
        Formula::Nu(x, b) => Formula::Nu(x.clone(), Box::new(nnf(b))),
        _ => f.clone(),
    }
}

fn neg(f: &Formula) -> Formula {
    match f {
        Formula::Top => Formula::Bot,
        Formula::Bot => Formula::Top,
        Formula::And(l, r) => Formula::or(neg(l), neg(r)),
        Formula::Or(l, r) => Formula::and(neg(l), neg(r)),
        Formula::Modal(op, args) => Formula::Modal(op.dual(), args.iter().map(neg).collect()),
        Formula::Var(x) => Formula::NegVar(x.clone()),
        Formula::NegVar(x) => Formula::Var(x.clone()),
        // ¬ηX.φ = η̄X.¬φ[¬X/X]; substituting first and then negating globally
        // restores positive occurrences of X.
        Formula::Mu(x, b) => {
            let swapped = subst_negvar(b, x);
            Formula::Nu(x.clone(), Box::new(neg(&swapped)))
        }
        Formula::Nu(x, b) => {
            let swapped = subst_negvar(b, x);
            Formula::Mu(x.clone(), Box::new(neg(&swapped)))
        }
        Formula::Not(g) => nnf(g),
    }
}

/// Replaces free occurrences of `Var(x)` with `NegVar(x)` and vice versa.
fn subst_negvar(f: &Formula, x: &str) -> Formula {
    match f {
        Formula::Var(y) if y == x => Formula::NegVar(y.clone()),
        Formula::NegVar(y) if y == x => Formula::Var(y.clone()),
        Formula::And(l, r) => Formula::and(subst_negvar(l, x), subst_negvar(r, x)),
        Formula::Or(l, r) => Formula::or(subst_negvar(l, x), subst_negvar(r, x)),
        Formula::Modal(op, args) => Formula::Modal(
            op.clone(),
            args.iter().map(|a| subst_negvar(a, x)).collect(),
        ),
        Formula::Mu(y, b) if y != x => Formula::Mu(y.clone(), Box::new(subst_negvar(b, x))),
        Formula::Nu(y, b) if y != x => Formula::Nu(y.clone(), Box::new(subst_negvar(b, x))),
        Formula::Not(g) => Formula::not(subst_negvar(g, x)),
        _ => f.clone(),
    }
}

/// Renames binders so every variable is bound at most once. Any colliding
/// binder (including the first occurrence) receives a fresh suffixed name.
fn rename_clean(f: &Formula) -> Formula {
    let mut binder_count: std::collections::BTreeMap<String, usize> = Default::default();
    fn count(f: &Formula, m: &mut std::collections::BTreeMap<String, usize>) {
        match f {
            Formula::And(l, r) | Formula::Or(l, r) => {
                count(l, m);
                count(r, m);
            }
            Formula::Modal(_, args) => args.iter().for_each(|a| count(a, m)),
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                *m.entry(x.clone()).or_insert(0) += 1;
                count(b, m);
            }
            Formula::Not(b) => count(b, m),
            _ => {}
        }
    }
    count(f, &mut binder_count);
    let colliding: BTreeSet<String> = binder_count
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(x, _)| x.clone())
        .collect();
    if colliding.is_empty() {
        return f.clone();
    }
    let used: BTreeSet<String> = binder_count.keys().cloned().collect();
    let mut fresh_idx: std::collections::BTreeMap<String, usize> = Default::default();
    let mut taken = used;

    fn walk(
        f: &Formula,
        colliding: &BTreeSet<String>,
        fresh_idx: &mut std::collections::BTreeMap<String, usize>,
        taken: &mut BTreeSet<String>,
        scope: &mut Vec<(String, String)>,
    ) -> Formula {
        match f {
            Formula::And(l, r) => Formula::and(
                walk(l, colliding, fresh_idx, taken, scope),
                walk(r, colliding, fresh_idx, taken, scope),
            ),
            Formula::Or(l, r) => Formula::or(
                walk(l, colliding, fresh_idx, taken, scope),
                walk(r, colliding, fresh_idx, taken, scope),
            ),
            Formula::Modal(op, args) => Formula::Modal(
                op.clone(),
                args.iter()
                    .map(|a| walk(a, colliding, fresh_idx, taken, scope))
                    .collect(),
            ),
            Formula::Var(x) => {
                let name = scope
                    .iter()
                    .rev()
                    .find(|(orig, _)| orig == x)
                    .map(|(_, n)| n.clone())
                    .unwrap_or_else(|| x.clone());
                Formula::Var(name)
            }
            Formula::NegVar(x) => {
                let name = scope
                    .iter()
                    .rev()
                    .find(|(orig, _)| orig == x)
                    .map(|(_, n)| n.clone())
                    .unwrap_or_else(|| x.clone());
                Formula::NegVar(name)
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let new_name = if colliding.contains(x) {
                    let idx = fresh_idx.entry(x.clone()).or_insert(0);
                    loop {
                        *idx += 1;
                        let cand = format!("{x}{idx}");
                        if taken.insert(cand.clone()) {
                            break cand;
                        }
                    }
                } else {
                    x.clone()
                };
                scope.push((x.clone(), new_name.clone()));
                let body = walk(b, colliding, fresh_idx, taken, scope);
                scope.pop();
                match f {
                    Formula::Mu(..) => Formula::Mu(new_name, Box::new(body)),
                    _ => Formula::Nu(new_name, Box::new(body)),
                }
            }
            Formula::Not(b) => Formula::not(walk(b, colliding, fresh_idx, taken, scope)),
            _ => f.clone(),
        }
    }
    walk(f, &colliding, &mut fresh_idx, &mut taken, &mut Vec::new())
}

/// Removes redundant fixpoints ηX.φ with X not free in φ, bottom-up.
fn drop_redundant(f: &Formula) -> Formula {
    match f {
        Formula::And(l, r) => Formula::and(drop_redundant(l), drop_redundant(r)),
        Formula::Or(l, r) => Formula::or(drop_redundant(l), drop_redundant(r)),
        Formula::Modal(op, args) => {
            Formula::Modal(op.clone(), args.iter().map(drop_redundant).collect())
        }
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let body = drop_redundant(b);
            if body.free_vars().contains(x) {
                match f {
                    Formula::Mu(..) => Formula::Mu(x.clone(), Box::new(body)),
                    _ => Formula::Nu(x.clone(), Box::new(body)),
                }
            } else {
                body
            }
        }
        Formula::Not(b) => Formula::not(drop_redundant(b)),
        _ => f.clone(),
    }
}

/// Full normalization: negation normal form, clean renaming, irredundancy.
/// The result is semantically equivalent to the input.
pub fn normalize(f: &Formula) -> Formula {
    drop_redundant(&rename_clean(&nnf(f)))
}

/// Sampled monotonicity lint for probabilistic polynomials: checks
/// coordinatewise monotonicity on a rational grid over `[0,1]^n`. Returns a
/// counterexample pair of grid points if one is found.
pub fn monotonicity_lint(p: &Polynomial) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    use num::{FromPrimitive, Zero};
    let n = p.arity();
    if n == 0 {
        return None;
    }
    let steps: Vec<BigRational> = (0..=4)
        .map(|i| BigRational::new(num::BigInt::from_i64(i).unwrap(), num::BigInt::from_i64(4).unwrap()))
        .collect();
    let mut point = vec![BigRational::zero(); n];
    fn rec(
        p: &Polynomial,
        steps: &[BigRational],
        point: &mut Vec<BigRational>,
        dim: usize,
    ) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
        let n = p.arity();
        if dim == n {
            // Bump each coordinate one grid step up and compare.
            let base = p.eval(point);
            for i in 0..n {
                if let Some(pos) = steps.iter().position(|s| *s == point[i]) {
                    if pos + 1 < steps.len() {
                        let mut up = point.clone();
                        up[i] = steps[pos + 1].clone();
                        if p.eval(&up) < base {
                            return Some((point.clone(), up));
                        }
                    }
                }
            }
            return None;
        }
        for s in steps {
            point[dim] = s.clone();
            if let Some(cex) = rec(p, steps, point, dim + 1) {
                return Some(cex);
            }
        }
        None
    }
    rec(p, &steps, &mut point, 0)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(f: &Formula) -> u8 {
            match f {
                Formula::Mu(..) | Formula::Nu(..) => 0,
                Formula::Or(..) => 1,
                Formula::And(..) => 2,
                _ => 3,
            }
        }
        fn go(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            let p = prec(f);
            let paren = p < min;
            if paren {
                write!(out, "(")?;
            }
            match f {
                Formula::Top => write!(out, "true")?,
                Formula::Bot => write!(out, "false")?,
                Formula::And(l, r) => {
                    go(l, 3, out)?;
                    write!(out, " & ")?;
                    go(r, 2, out)?;
                }
                Formula::Or(l, r) => {
                    go(l, 2, out)?;
                    write!(out, " | ")?;
                    go(r, 1, out)?;
                }
                Formula::Modal(op, args) => match &op.kind {
                    ModalKind::Atom(a) => write!(out, "{a}")?,
                    ModalKind::NegAtom(a) => write!(out, "!{a}")?,
                    ModalKind::Diamond => {
                        write!(out, "dia ")?;
                        go(&args[0], 3, out)?;
                    }
                    ModalKind::Box => {
                        write!(out, "box ")?;
                        go(&args[0], 3, out)?;
                    }
                    ModalKind::DiaPoly(poly) => {
                        write!(out, "<{poly}>")?;
                        fmt_poly_args(args, out)?;
                    }
                    ModalKind::BoxPoly(poly) => {
                        write!(out, "[{poly}]")?;
                        fmt_poly_args(args, out)?;
                    }
                },
                Formula::Var(x) => write!(out, "{x}")?,
                Formula::NegVar(x) => write!(out, "!{x}")?,
                Formula::Mu(x, b) => {
                    write!(out, "mu {x}. ")?;
                    go(b, 0, out)?;
                }
                Formula::Nu(x, b) => {
                    write!(out, "nu {x}. ")?;
                    go(b, 0, out)?;
                }
                Formula::Not(g) => {
                    write!(out, "!")?;
                    go(g, 3, out)?;
                }
            }
            if paren {
                write!(out, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

fn fmt_poly_args(args: &[Formula], out: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(out, "(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(out, ", ")?;
        }
        write!(out, "{a}")?;
    }
    write!(out, ")")
}
