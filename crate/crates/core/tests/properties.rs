//! Property tests for the algebraic invariants of the formula and
//! polynomial layers.

use num::bigint::BigInt;
use num::rational::BigRational;
use proptest::prelude::*;

use mucalc::formula::{normalize, Formula, Logic, ModalKind, ModalOp};
use mucalc::poly::{Monomial, Polynomial};

fn arb_rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn arb_poly() -> impl Strategy<Value = Polynomial> {
    let monomial = (arb_rational(), proptest::collection::vec(0u32..3, 1..3))
        .prop_map(|(coeff, exps)| Monomial { exps, coeff });
    proptest::collection::vec(monomial, 0..4).prop_map(|ms| {
        let arity = ms.iter().map(|m| m.exps.len()).max().unwrap_or(0);
        Polynomial::new(arity, ms)
    })
}

fn arb_modal_op() -> impl Strategy<Value = ModalOp> {
    prop_oneof![
        Just(ModalOp { logic: Logic::Relational, kind: ModalKind::Diamond }),
        Just(ModalOp { logic: Logic::Relational, kind: ModalKind::Box }),
        "[a-c]".prop_map(|a| ModalOp { logic: Logic::Relational, kind: ModalKind::Atom(a) }),
        "[a-c]".prop_map(|a| ModalOp { logic: Logic::Probabilistic, kind: ModalKind::NegAtom(a) }),
        arb_poly().prop_map(|p| ModalOp {
            logic: Logic::Probabilistic,
            kind: ModalKind::DiaPoly(p)
        }),
        arb_poly().prop_map(|p| ModalOp {
            logic: Logic::Graded,
            kind: ModalKind::BoxPoly(p)
        }),
    ]
}

/// Closed relational formulas with surface negation, built so bound
/// variables occur only under their own binder.
fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bot),
        "[pq]".prop_map(|a| Formula::atom(Logic::Relational, a)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            inner.clone().prop_map(Formula::diamond),
            inner.clone().prop_map(Formula::boxm),
            inner.clone().prop_map(Formula::not),
            // A fixpoint whose body uses the variable positively.
            (inner.clone(), "[XY]").prop_map(|(body, x)| {
                let with_var = Formula::or(Formula::diamond(Formula::Var(x.clone())), body);
                Formula::mu(x, with_var)
            }),
            (inner, "[XY]").prop_map(|(body, x)| {
                let with_var = Formula::and(Formula::boxm(Formula::Var(x.clone())), body);
                Formula::nu(x, with_var)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn dual_is_an_involution(op in arb_modal_op()) {
        prop_assert_eq!(op.dual().dual(), op.clone());
        prop_assert_eq!(op.dual().arity(), op.arity());
    }

    #[test]
    fn normalize_is_idempotent(f in arb_formula()) {
        let once = normalize(&f);
        prop_assert!(!once.contains_not());
        prop_assert!(once.is_clean());
        prop_assert!(once.is_closed());
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn double_negation_normalizes_identically(f in arb_formula()) {
        let n1 = normalize(&f);
        let n2 = normalize(&Formula::not(Formula::not(f)));
        prop_assert_eq!(n1, n2);
    }

    #[test]
    fn polynomial_sum_of_negation_is_zero(p in arb_poly()) {
        let negated: Vec<Monomial> = p
            .monomials()
            .iter()
            .map(|m| Monomial { exps: m.exps.clone(), coeff: -m.coeff.clone() })
            .collect();
        let mut all: Vec<Monomial> = p.monomials().to_vec();
        all.extend(negated);
        let sum = Polynomial::new(p.arity(), all);
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn polynomial_eval_is_additive_over_monomials(p in arb_poly(), xs in proptest::collection::vec(arb_rational(), 0..3)) {
        // Pad/truncate the argument vector to the arity, with absolute
        // values so interval assumptions elsewhere stay meaningful.
        let args: Vec<BigRational> = (0..p.arity())
            .map(|i| xs.get(i).cloned().unwrap_or_else(|| BigRational::from_integer(1.into())))
            .collect();
        let direct = p.eval(&args);
        let split: BigRational = p
            .monomials()
            .iter()
            .map(|m| {
                Polynomial::new(p.arity(), vec![m.clone()]).eval(&args)
            })
            .sum();
        prop_assert_eq!(direct, split);
    }
}
