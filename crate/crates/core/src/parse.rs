//! Parser for the formula surface syntax.
//!
//! Grammar (binders extend maximally to the right, `!` binds tightest among
//! the connectives, then `&`, then `|`):
//!
//! ```text
//! phi ::= "mu" ident "." phi | "nu" ident "." phi | disj
//! disj ::= conj ("|" conj)*
//! conj ::= unary ("&" unary)*
//! unary ::= "!" unary | "dia" unary | "box" unary
//!         | "<" poly ">" rest | "[" poly "]" rest
//!         | "true" | "false" | ident | "(" phi ")"
//! rest ::= unary                      (sugar, constant polynomial index)
//!        | "(" phi ("," phi)* ")"     (general polynomial modality)
//! poly ::= term (("+"|"-") term)* ; term ::= factor ("*" factor)*
//! factor ::= nat | nat "/" nat | xK | xK "^" nat
//! ```
//!
//! Identifiers in binder scope are fixpoint variables, all others are
//! propositional atoms. The chosen logic decides which modalities are legal
//! and how `<...>` operators are tagged.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::formula::{Formula, Logic, LogicSpec, ModalKind, ModalOp};
use crate::poly::{Monomial, Polynomial};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Nat(BigInt),
    Mu,
    Nu,
    Dia,
    Box,
    True,
    False,
    Inf,
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    Lt,
    Gt,
    LBrack,
    RBrack,
    Dot,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, Error> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let start = self.pos;
            let c = self.src[self.pos];
            let tok = match c {
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Pipe,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'<' => Tok::Lt,
                b'>' => Tok::Gt,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'.' => Tok::Dot,
                b',' => Tok::Comma,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'^' => Tok::Caret,
                b'/' => Tok::Slash,
                b'0'..=b'9' => {
                    let mut end = self.pos;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let digits = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    self.pos = end;
                    out.push((Tok::Nat(digits.parse::<BigInt>().unwrap()), start));
                    continue;
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let word = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    self.pos = end;
                    let t = match word {
                        "mu" => Tok::Mu,
                        "nu" => Tok::Nu,
                        "dia" => Tok::Dia,
                        "box" => Tok::Box,
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "inf" => Tok::Inf,
                        _ => Tok::Ident(word.to_string()),
                    };
                    out.push((t, start));
                    continue;
                }
                other => {
                    return Err(Error::Parse {
                        pos: start,
                        msg: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            self.pos += 1;
            out.push((tok, start));
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    logic: &'a LogicSpec,
    scope: Vec<String>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), Error> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(Error::Parse { pos, msg: format!("expected {what}") }),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, Error> {
        Err(Error::Parse { pos: self.here(), msg: msg.into() })
    }

    fn formula(&mut self) -> Result<Formula, Error> {
        match self.peek() {
            Some(Tok::Mu) | Some(Tok::Nu) => {
                let is_mu = matches!(self.peek(), Some(Tok::Mu));
                self.bump();
                let pos = self.here();
                let name = match self.bump() {
                    Some(Tok::Ident(x)) => x,
                    _ => {
                        return Err(Error::Parse {
                            pos,
                            msg: "expected fixpoint variable name".into(),
                        })
                    }
                };
                self.expect(Tok::Dot, "`.` after fixpoint variable")?;
                self.scope.push(name.clone());
                let body = self.formula()?;
                self.scope.pop();
                Ok(if is_mu {
                    Formula::mu(name, body)
                } else {
                    Formula::nu(name, body)
                })
            }
            _ => self.disj(),
        }
    }

    fn disj(&mut self) -> Result<Formula, Error> {
        let mut acc = self.conj()?;
        while matches!(self.peek(), Some(Tok::Pipe)) {
            self.bump();
            // A binder directly after `|` extends maximally to the right.
            let rhs = self.formula()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Formula, Error> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.bump();
            let rhs = match self.peek() {
                Some(Tok::Mu) | Some(Tok::Nu) => self.formula()?,
                _ => self.unary()?,
            };
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, Error> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Dia) | Some(Tok::Box) => {
                let dia = matches!(self.peek(), Some(Tok::Dia));
                let pos = self.here();
                self.bump();
                if !self.logic.contains(Logic::Relational) {
                    return Err(Error::Parse {
                        pos,
                        msg: format!(
                            "unknown modality for selected logic: `{}` needs a relational component",
                            if dia { "dia" } else { "box" }
                        ),
                    });
                }
                let arg = self.unary()?;
                Ok(Formula::Modal(
                    ModalOp {
                        logic: Logic::Relational,
                        kind: if dia { ModalKind::Diamond } else { ModalKind::Box },
                    },
                    vec![arg],
                ))
            }
            Some(Tok::Lt) => {
                self.bump();
                self.poly_modality(true)
            }
            Some(Tok::LBrack) => {
                self.bump();
                self.poly_modality(false)
            }
            Some(Tok::True) => {
                self.bump();
                Ok(Formula::Top)
            }
            Some(Tok::False) => {
                self.bump();
                Ok(Formula::Bot)
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => {
                let pos = self.here();
                let name = match self.bump() {
                    Some(Tok::Ident(x)) => x,
                    _ => unreachable!(),
                };
                if self.scope.iter().any(|s| *s == name) {
                    Ok(Formula::Var(name))
                } else {
                    // Atoms attach to the first atom-capable component.
                    let logic = self.logic.components()[0];
                    let _ = pos;
                    Ok(Formula::atom(logic, name))
                }
            }
            _ => self.err("expected a formula"),
        }
    }

    /// Parses the remainder of `<poly>...` / `[poly]...` after the opening
    /// delimiter. Decides sugar vs. general form and the component tag.
    fn poly_modality(&mut self, diamond: bool) -> Result<Formula, Error> {
        let open_pos = self.here();
        if matches!(self.peek(), Some(Tok::Inf)) {
            return Err(Error::Parse {
                pos: open_pos,
                msg: "infinite graded indices are not supported".into(),
            });
        }
        let poly = self.poly()?;
        let close = if diamond { Tok::Gt } else { Tok::RBrack };
        self.expect(close, if diamond { "closing `>`" } else { "closing `]`" })?;

        let sugar = poly.arity() == 0;
        let (poly, args) = if sugar {
            // `<b> phi` desugars to `<x1 - b> phi`.
            let b = poly.constant_coeff();
            let p = Polynomial::linear_minus(b);
            let arg = self.unary()?;
            (p, vec![arg])
        } else {
            self.expect(Tok::LParen, "`(` before polynomial modality arguments")?;
            let mut args = vec![self.formula()?];
            while matches!(self.peek(), Some(Tok::Comma)) {
                self.bump();
                args.push(self.formula()?);
            }
            self.expect(Tok::RParen, "closing `)`")?;
            if args.len() != poly.arity() {
                return Err(Error::Parse {
                    pos: open_pos,
                    msg: format!(
                        "polynomial has {} variable(s) but {} argument(s) given",
                        poly.arity(),
                        args.len()
                    ),
                });
            }
            (poly, args)
        };

        // Tag the operator: graded if the polynomial obeys the integer sign
        // discipline and a graded component exists, otherwise probabilistic.
        let logic = if self.logic.contains(Logic::Graded) && poly.graded_discipline_ok() {
            Logic::Graded
        } else if self.logic.contains(Logic::Probabilistic) {
            Logic::Probabilistic
        } else if self.logic.contains(Logic::Graded) {
            return Err(Error::Parse {
                pos: open_pos,
                msg: format!(
                    "polynomial `{poly}` violates the graded sign discipline \
                     (non-constant coefficients must be non-negative integers, \
                     the constant one non-positive)"
                ),
            });
        } else {
            return Err(Error::Parse {
                pos: open_pos,
                msg: "unknown modality for selected logic: polynomial modalities \
                      need a graded or probabilistic component"
                    .into(),
            });
        };
        let kind = if diamond {
            ModalKind::DiaPoly(poly)
        } else {
            ModalKind::BoxPoly(poly)
        };
        Ok(Formula::Modal(ModalOp { logic, kind }, args))
    }

    fn poly(&mut self) -> Result<Polynomial, Error> {
        let mut monomials = Vec::new();
        let mut arity = 0usize;
        let mut sign = BigRational::one();
        loop {
            let m = self.poly_term(&mut arity)?;
            monomials.push(Monomial { exps: m.exps, coeff: m.coeff * &sign });
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    sign = BigRational::one();
                }
                Some(Tok::Minus) => {
                    self.bump();
                    sign = -BigRational::one();
                }
                _ => break,
            }
        }
        Ok(Polynomial::new(arity, monomials))
    }

    fn poly_term(&mut self, arity: &mut usize) -> Result<Monomial, Error> {
        let mut coeff = BigRational::one();
        let mut exps: Vec<u32> = Vec::new();
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(Tok::Nat(_)) => {
                    let n = match self.bump() {
                        Some(Tok::Nat(n)) => n,
                        _ => unreachable!(),
                    };
                    let value = if matches!(self.peek(), Some(Tok::Slash)) {
                        self.bump();
                        let dpos = self.here();
                        match self.bump() {
                            Some(Tok::Nat(d)) if !d.is_zero() => {
                                BigRational::new(n, d)
                            }
                            _ => {
                                return Err(Error::Parse {
                                    pos: dpos,
                                    msg: "expected non-zero denominator".into(),
                                })
                            }
                        }
                    } else {
                        BigRational::from_integer(n)
                    };
                    coeff *= value;
                    saw_factor = true;
                }
                Some(Tok::Ident(name)) if is_poly_var(name) => {
                    let idx: usize = name[1..].parse().unwrap();
                    if idx == 0 {
                        return self.err("polynomial variables are numbered from x1");
                    }
                    self.bump();
                    let exp: u32 = if matches!(self.peek(), Some(Tok::Caret)) {
                        self.bump();
                        let epos = self.here();
                        match self.bump() {
                            Some(Tok::Nat(e)) => e.try_into().map_err(|_| Error::Parse {
                                pos: epos,
                                msg: "exponent too large".into(),
                            })?,
                            _ => {
                                return Err(Error::Parse {
                                    pos: epos,
                                    msg: "expected exponent".into(),
                                })
                            }
                        }
                    } else {
                        1
                    };
                    if exps.len() < idx {
                        exps.resize(idx, 0);
                    }
                    exps[idx - 1] += exp;
                    *arity = (*arity).max(idx);
                    saw_factor = true;
                }
                _ => break,
            }
            if matches!(self.peek(), Some(Tok::Star)) {
                self.bump();
            } else {
                break;
            }
        }
        if !saw_factor {
            return self.err("expected a polynomial term");
        }
        Ok(Monomial { exps, coeff })
    }
}

fn is_poly_var(name: &str) -> bool {
    name.len() >= 2 && name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Checks that no fixpoint variable occurs under an odd number of negations
/// inside its own binder (which would become a negated variable in negation
/// normal form and break monotonicity).
fn check_polarity(f: &Formula) -> Result<(), Error> {
    fn walk(f: &Formula, neg_depth: &mut Vec<(String, bool)>) -> Result<(), Error> {
        match f {
            Formula::And(l, r) | Formula::Or(l, r) => {
                walk(l, neg_depth)?;
                walk(r, neg_depth)
            }
            Formula::Modal(_, args) => args.iter().try_for_each(|a| walk(a, neg_depth)),
            Formula::Var(x) | Formula::NegVar(x) => {
                let base_neg = matches!(f, Formula::NegVar(_));
                if let Some((_, parity)) = neg_depth.iter().rev().find(|(n, _)| n == x) {
                    if *parity != base_neg {
                        return Err(Error::Parse {
                            pos: 0,
                            msg: format!(
                                "negated variable `{x}` occurs in the scope of its binder"
                            ),
                        });
                    }
                }
                Ok(())
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                neg_depth.push((x.clone(), false));
                let r = walk(b, neg_depth);
                neg_depth.pop();
                r
            }
            Formula::Not(g) => {
                for e in neg_depth.iter_mut() {
                    e.1 = !e.1;
                }
                let r = walk(g, neg_depth);
                for e in neg_depth.iter_mut() {
                    e.1 = !e.1;
                }
                r
            }
            _ => Ok(()),
        }
    }
    walk(f, &mut Vec::new())
}

/// Parses a formula in the given logic. The result may contain surface
/// negation; run [`crate::formula::normalize`] before the pipeline proper.
pub fn parse(text: &str, logic: &LogicSpec) -> Result<Formula, Error> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        logic,
        scope: Vec::new(),
        src_len: text.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input after formula");
    }
    if !f.is_closed() {
        // Unreachable through this parser (unbound idents become atoms), but
        // kept as a guard for programmatically built formulae.
        return Err(Error::Parse { pos: 0, msg: "formula is not closed".into() });
    }
    check_polarity(&f)?;
    Ok(f)
}
