//! Exact multivariate polynomials with rational coefficients.
//!
//! Modal operators of the graded and probabilistic logics are indexed by
//! polynomials; all arithmetic on them is exact (big rationals), including
//! evaluation, so that one-step verdicts never depend on floating point.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// A single monomial: coefficient times a product of variable powers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    /// Exponent of each variable `x1..xn`; length equals the polynomial arity.
    pub exps: Vec<u32>,
    pub coeff: BigRational,
}

impl Monomial {
    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

/// A canonical polynomial over variables `x1..xn`.
///
/// Canonical form: monomials sorted by exponent vector, no duplicate
/// exponent vectors, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    arity: usize,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    /// Builds a polynomial from raw monomials, normalizing to canonical form.
    /// Exponent vectors shorter than `arity` are zero-padded.
    pub fn new(arity: usize, raw: Vec<Monomial>) -> Polynomial {
        let mut merged: Vec<Monomial> = Vec::new();
        for mut m in raw {
            assert!(m.exps.len() <= arity, "monomial exceeds declared arity");
            m.exps.resize(arity, 0);
            match merged.binary_search_by(|probe: &Monomial| probe.exps.cmp(&m.exps)) {
                Ok(i) => {
                    let c = merged[i].coeff.clone() + m.coeff;
                    merged[i].coeff = c;
                }
                Err(i) => merged.insert(i, m),
            }
        }
        merged.retain(|m| !m.coeff.is_zero());
        Polynomial {
            arity,
            monomials: merged,
        }
    }

    pub fn constant(value: BigRational) -> Polynomial {
        Polynomial::new(
            0,
            vec![Monomial {
                exps: vec![],
                coeff: value,
            }],
        )
    }

    /// The polynomial `x1 - b`, the desugaring of `<b>`/`[b]`.
    pub fn linear_minus(b: BigRational) -> Polynomial {
        Polynomial::new(
            1,
            vec![
                Monomial {
                    exps: vec![1],
                    coeff: BigRational::one(),
                },
                Monomial {
                    exps: vec![0],
                    coeff: -b,
                },
            ],
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(|m| m.exps.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    /// Coefficient of the constant monomial (zero if absent).
    pub fn constant_coeff(&self) -> BigRational {
        self.monomials
            .iter()
            .find(|m| m.is_constant())
            .map(|m| m.coeff.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Coefficient of the degree-1 monomial in variable `i` (for linear use).
    pub fn linear_coeff(&self, i: usize) -> BigRational {
        self.monomials
            .iter()
            .find(|m| {
                m.exps.iter().enumerate().all(|(j, &e)| {
                    if j == i {
                        e == 1
                    } else {
                        e == 0
                    }
                })
            })
            .map(|m| m.coeff.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_integral(&self) -> bool {
        self.monomials.iter().all(|m| m.coeff.is_integer())
    }

    /// Sign discipline for graded modalities: non-constant monomials have
    /// non-negative (integer) coefficients, the constant one is non-positive.
    pub fn graded_discipline_ok(&self) -> bool {
        self.is_integral()
            && self.monomials.iter().all(|m| {
                if m.is_constant() {
                    !m.coeff.is_positive()
                } else {
                    !m.coeff.is_negative()
                }
            })
    }

    /// The index of a graded modality: minus the constant coefficient.
    pub fn graded_index(&self) -> BigInt {
        let c = self.constant_coeff();
        debug_assert!(c.is_integer());
        -c.to_integer()
    }

    pub fn eval(&self, args: &[BigRational]) -> BigRational {
        assert_eq!(args.len(), self.arity, "arity mismatch in polynomial eval");
        let mut acc = BigRational::zero();
        for m in &self.monomials {
            let mut term = m.coeff.clone();
            for (x, &e) in args.iter().zip(&m.exps) {
                for _ in 0..e {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    /// Interval evaluation: exact rational bounds for the polynomial over the
    /// box given by per-argument intervals. Sound for arbitrary polynomials
    /// as long as all intervals are within `[0, +inf)`, which holds for the
    /// measures this solver feeds in.
    pub fn eval_interval(&self, lo: &[BigRational], hi: &[BigRational]) -> (BigRational, BigRational) {
        assert_eq!(lo.len(), self.arity);
        assert_eq!(hi.len(), self.arity);
        let mut acc_lo = BigRational::zero();
        let mut acc_hi = BigRational::zero();
        for m in &self.monomials {
            // x^e is monotone on [0, inf), so the monomial body bounds are
            // products of endpoint powers.
            let mut body_lo = BigRational::one();
            let mut body_hi = BigRational::one();
            for (i, &e) in m.exps.iter().enumerate() {
                debug_assert!(!lo[i].is_negative());
                for _ in 0..e {
                    body_lo *= &lo[i];
                    body_hi *= &hi[i];
                }
            }
            if m.coeff.is_positive() {
                acc_lo += &m.coeff * body_lo;
                acc_hi += &m.coeff * body_hi;
            } else {
                acc_lo += &m.coeff * body_hi;
                acc_hi += &m.coeff * body_lo;
            }
        }
        (acc_lo, acc_hi)
    }

    /// Size of the binary encoding of all numeric constants, per the
    /// convention that sizes of modal operators count binary digit lengths.
    pub fn encoding_bits(&self) -> u64 {
        let mut bits = 0u64;
        for m in &self.monomials {
            bits += m.coeff.numer().bits().max(1) + m.coeff.denom().bits().max(1);
            for &e in &m.exps {
                bits += u64::from(32 - e.leading_zeros()).max(1);
            }
        }
        bits.max(1)
    }
}

fn fmt_coeff(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        // Conventional reading order: variable terms in reverse-lexicographic
        // exponent order (x1 terms first), constant last.
        let mut ordered: Vec<&Monomial> = self.monomials.iter().collect();
        ordered.sort_by(|a, b| b.exps.cmp(&a.exps));
        for (i, m) in ordered.into_iter().enumerate() {
            let neg = m.coeff.is_negative();
            let abs = m.coeff.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        format!("x{}", j + 1)
                    } else {
                        format!("x{}^{}", j + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                fmt_coeff(&abs, f)?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                fmt_coeff(&abs, f)?;
                write!(f, "*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}
