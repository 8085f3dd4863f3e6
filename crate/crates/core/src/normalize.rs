//! Rewriting a quantifier body so the target variable appears only with
//! coefficient one.
//!
//! A variable `y` may occur under scalar multiplications whose coefficients
//! are polynomials in `t`, and a single polynomial can be zero for some
//! parameter values and not others. The classical trick of clearing
//! coefficients by an integer lcm therefore has no direct analogue. Instead
//! we split on the *sign pattern* of the coefficient set: for each subset
//! `S'` of the coefficients we add a guard asserting exactly the members of
//! `S'` are nonzero at `t`, multiply `y` through by the product `ν` of `S'`,
//! and rewrite every literal so the replacement variable `y'` (standing for
//! `ν·y`) has coefficient one. A divisibility constraint `D_ν(y')` records
//! that `y'` ranges over multiples of `ν`.
//!
//! The entry point is [`normalize_in`]; the remaining items are the
//! individual rewriting stages, exposed for direct testing.

use crate::ast::{Atom, Formula, FreshVars, Term, Var};
use crate::poly::Poly;
use std::collections::BTreeSet;

/// Pushes negations down to atoms and removes double negations.
///
/// Negated quantifiers (bounded and unbounded) dualize, and a negated strict
/// inequality `¬(u < 0)` folds to `-u - 1 < 0` over the integers, so in the
/// result `Not` survives only directly above equality and divisibility atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    fn go(f: &Formula, positive: bool) -> Formula {
        match f {
            Formula::True => {
                if positive {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::False => {
                if positive {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::Atom(a) => {
                if positive {
                    Formula::atom_folded(a.clone())
                } else {
                    match a {
                        // ¬(u < 0) ⟺ 0 ≤ u ⟺ -u - 1 < 0.
                        Atom::Lt(u) => Formula::atom_folded(Atom::Lt(
                            u.neg().add(&Term::constant(Poly::constant(-1))),
                        )),
                        _ => Formula::not(Formula::atom_folded(a.clone())),
                    }
                }
            }
            Formula::Not(g) => go(g, !positive),
            Formula::And(gs) => {
                let parts = gs.iter().map(|g| go(g, positive)).collect();
                if positive {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(gs) => {
                let parts = gs.iter().map(|g| go(g, positive)).collect();
                if positive {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
            Formula::Exists(v, g) => {
                if positive {
                    Formula::exists(v.clone(), go(g, true))
                } else {
                    Formula::forall(v.clone(), go(g, false))
                }
            }
            Formula::Forall(v, g) => {
                if positive {
                    Formula::forall(v.clone(), go(g, true))
                } else {
                    Formula::exists(v.clone(), go(g, false))
                }
            }
            Formula::BExists(v, b, g) => {
                if positive {
                    Formula::bexists(v.clone(), b.clone(), go(g, true))
                } else {
                    Formula::bforall(v.clone(), b.clone(), go(g, false))
                }
            }
            Formula::BForall(v, b, g) => {
                if positive {
                    Formula::bforall(v.clone(), b.clone(), go(g, true))
                } else {
                    Formula::bexists(v.clone(), b.clone(), go(g, false))
                }
            }
        }
    }
    go(f, true)
}

/// How a single literal relates to a distinguished variable `y`.
///
/// Literals are `Atom` or `Not(Atom)` nodes. For inequalities the positional
/// reading is fixed by the sign of the leading coefficient: a positive
/// leading coefficient on `y` reads as an upper bound `coeff·y < bound`,
/// a negative one as a lower bound `bound < coeff·y`, so `coeff` always has
/// positive leading coefficient in those two cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiteralClass {
    /// `coeff·y < bound` with `y` absent from `bound`.
    Upper { coeff: Poly, bound: Term },
    /// `bound < coeff·y` with `y` absent from `bound`.
    Lower { coeff: Poly, bound: Term },
    /// `D_modulus(coeff·y + offset)`, possibly negated.
    Divides {
        modulus: Poly,
        coeff: Poly,
        offset: Term,
        negated: bool,
    },
    /// `coeff·y = rhs`, possibly negated.
    Equality { coeff: Poly, rhs: Term, negated: bool },
    /// `y` does not occur.
    Free,
}

/// Classifies a literal (an `Atom` or `Not(Atom)` node) against `y`.
///
/// Panics on non-literal nodes; run after [`to_nnf`] so negations sit
/// directly on atoms.
pub fn classify_literal(lit: &Formula, y: &Var) -> LiteralClass {
    let (atom, negated) = match lit {
        Formula::Atom(a) => (a, false),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => (a, true),
            _ => panic!("classify_literal: negation not on an atom"),
        },
        _ => panic!("classify_literal: not a literal"),
    };
    match atom {
        Atom::Lt(raw) => {
            // A negated inequality classifies as its folded positive form
            // ¬(u < 0) ⟺ -u - 1 < 0, though to_nnf never leaves one behind.
            let u = if negated {
                raw.neg().add(&Term::constant(Poly::constant(-1)))
            } else {
                raw.clone()
            };
            let (c, rest) = u.split_var(y);
            if c.is_zero() {
                LiteralClass::Free
            } else if c.leading_coeff() > 0.into() {
                // c·y + rest < 0 ⟺ c·y < -rest.
                LiteralClass::Upper { coeff: c, bound: rest.neg() }
            } else {
                // c·y + rest < 0 ⟺ rest < (-c)·y.
                LiteralClass::Lower { coeff: -&c, bound: rest }
            }
        }
        Atom::Eq(u) => {
            let (c, rest) = u.split_var(y);
            if c.is_zero() {
                LiteralClass::Free
            } else {
                LiteralClass::Equality { coeff: c, rhs: rest.neg(), negated }
            }
        }
        Atom::Div(m, u) => {
            let (c, rest) = u.split_var(y);
            if c.is_zero() {
                LiteralClass::Free
            } else {
                LiteralClass::Divides {
                    modulus: m.clone(),
                    coeff: c,
                    offset: rest,
                    negated,
                }
            }
        }
    }
}

/// Replaces every (dis)equality literal mentioning `y` by strict
/// inequalities: `u = 0` becomes `u - 1 < 0 ∧ -u - 1 < 0` and `u ≠ 0`
/// becomes `u < 0 ∨ -u < 0`. Equalities not involving `y` are left alone.
pub fn eliminate_equalities(f: &Formula, y: &Var) -> Formula {
    let minus_one = Term::constant(Poly::constant(-1));
    match f {
        Formula::Atom(Atom::Eq(u)) if u.contains(y) => Formula::and(vec![
            Formula::atom_folded(Atom::Lt(u.add(&minus_one))),
            Formula::atom_folded(Atom::Lt(u.neg().add(&minus_one))),
        ]),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(Atom::Eq(u)) if u.contains(y) => Formula::or(vec![
                Formula::atom_folded(Atom::Lt(u.clone())),
                Formula::atom_folded(Atom::Lt(u.neg())),
            ]),
            _ => f.clone(),
        },
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::And(gs) => {
            Formula::and(gs.iter().map(|g| eliminate_equalities(g, y)).collect())
        }
        Formula::Or(gs) => {
            Formula::or(gs.iter().map(|g| eliminate_equalities(g, y)).collect())
        }
        Formula::BExists(v, b, g) => {
            Formula::bexists(v.clone(), b.clone(), eliminate_equalities(g, y))
        }
        Formula::BForall(v, b, g) => {
            Formula::bforall(v.clone(), b.clone(), eliminate_equalities(g, y))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            panic!("eliminate_equalities: unbounded quantifier in body")
        }
    }
}

/// Collects the set of coefficient polynomials attached to `y` across all
/// inequality and divisibility literals. Distinct polynomials stay distinct
/// even when one is the negation of the other.
pub fn coefficient_set(f: &Formula, y: &Var) -> BTreeSet<Poly> {
    fn walk(f: &Formula, y: &Var, out: &mut BTreeSet<Poly>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(_) | Formula::Not(_) => match classify_literal(f, y) {
                LiteralClass::Upper { coeff, .. }
                | LiteralClass::Lower { coeff, .. }
                | LiteralClass::Divides { coeff, .. } => {
                    out.insert(coeff);
                }
                LiteralClass::Equality { .. } => {
                    panic!("coefficient_set: equalities must be eliminated first")
                }
                LiteralClass::Free => {}
            },
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    walk(g, y, out);
                }
            }
            Formula::BExists(_, _, g) | Formula::BForall(_, _, g) => walk(g, y, out),
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("coefficient_set: unbounded quantifier in body")
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(f, y, &mut out);
    out
}

/// One surviving sign pattern over a coefficient set: the subset asserted
/// nonzero, the guard formula in `t` alone saying so, and the product `ν`
/// of the subset (`1` when empty).
#[derive(Clone, Debug)]
pub struct SignCase {
    pub selected: Vec<Poly>,
    pub guard: Formula,
    pub nu: Poly,
}

/// Enumerates the sign patterns of `s` whose guards are satisfiable for some
/// parameter value. A constant polynomial settles its own case: selecting an
/// identically-zero polynomial, or omitting a nonzero constant, yields an
/// unsatisfiable guard and the pattern is dropped. Guard conjuncts decided
/// by constants are folded away, so an all-constant coefficient set yields a
/// single case with guard `True`.
pub fn sign_cases(s: &BTreeSet<Poly>) -> Vec<SignCase> {
    let polys: Vec<&Poly> = s.iter().collect();
    let mut cases = Vec::new();
    for mask in 0u32..(1 << polys.len()) {
        let mut selected = Vec::new();
        let mut conjuncts = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            let as_term = Term::constant((*p).clone());
            if mask & (1 << i) != 0 {
                selected.push((*p).clone());
                conjuncts.push(Formula::not(Formula::atom_folded(Atom::Eq(as_term))));
            } else {
                conjuncts.push(Formula::atom_folded(Atom::Eq(as_term)));
            }
        }
        let guard = Formula::and(conjuncts);
        if guard == Formula::False {
            continue;
        }
        let nu = Poly::product(selected.iter());
        cases.push(SignCase { selected, guard, nu });
    }
    cases
}

/// Product of the selected polynomials other than `skip` (which occurs once,
/// since the selection comes from a set).
fn cofactor(selected: &[Poly], skip: &Poly) -> Poly {
    let mut skipped = false;
    let mut acc = Poly::one();
    for p in selected {
        if !skipped && p == skip {
            skipped = true;
        } else {
            acc = &acc * p;
        }
    }
    acc
}

/// `0 < p(t)` as a formula, folded when `p` is constant.
pub(crate) fn pos(p: &Poly) -> Formula {
    Formula::atom_folded(Atom::lt(Term::zero(), Term::constant(p.clone())))
}

/// `p(t) < 0` as a formula, folded when `p` is constant.
pub(crate) fn neg(p: &Poly) -> Formula {
    Formula::atom_folded(Atom::lt(Term::constant(p.clone()), Term::zero()))
}

/// Rewrites every literal of `f` for one sign pattern, substituting the
/// replacement variable `y2` (which stands for `ν·y`) with coefficient one.
fn rewrite_case(
    f: &Formula,
    y: &Var,
    selected: &[Poly],
    y2: &Var,
) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(_) | Formula::Not(_) => {
            rewrite_literal(f, y, selected, y2)
        }
        Formula::And(gs) => Formula::and(
            gs.iter().map(|g| rewrite_case(g, y, selected, y2)).collect(),
        ),
        Formula::Or(gs) => Formula::or(
            gs.iter().map(|g| rewrite_case(g, y, selected, y2)).collect(),
        ),
        Formula::BExists(v, b, g) => {
            Formula::bexists(v.clone(), b.clone(), rewrite_case(g, y, selected, y2))
        }
        Formula::BForall(v, b, g) => {
            Formula::bforall(v.clone(), b.clone(), rewrite_case(g, y, selected, y2))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            panic!("rewrite_case: unbounded quantifier in body")
        }
    }
}

fn rewrite_literal(lit: &Formula, y: &Var, selected: &[Poly], y2: &Var) -> Formula {
    let y2_term = Term::var(y2.clone());
    match classify_literal(lit, y) {
        LiteralClass::Free => lit.clone(),
        // coeff·y < bound. If the coefficient is live, multiply through by
        // its cofactor c' (so coeff·c' = ν) and split on the sign of c',
        // which flips the inequality when negative. A dead coefficient
        // leaves 0 < bound.
        LiteralClass::Upper { coeff, bound } => {
            if selected.contains(&coeff) {
                let c = cofactor(selected, &coeff);
                let scaled = bound.scale(&c);
                Formula::or(vec![
                    Formula::and(vec![
                        pos(&c),
                        Formula::atom_folded(Atom::lt(y2_term.clone(), scaled.clone())),
                    ]),
                    Formula::and(vec![
                        neg(&c),
                        Formula::atom_folded(Atom::lt(scaled, y2_term)),
                    ]),
                ])
            } else {
                Formula::atom_folded(Atom::lt(Term::zero(), bound))
            }
        }
        // bound < coeff·y, mirror image of the upper-bound case; a dead
        // coefficient leaves bound < 0.
        LiteralClass::Lower { coeff, bound } => {
            if selected.contains(&coeff) {
                let c = cofactor(selected, &coeff);
                let scaled = bound.scale(&c);
                Formula::or(vec![
                    Formula::and(vec![
                        pos(&c),
                        Formula::atom_folded(Atom::lt(scaled.clone(), y2_term.clone())),
                    ]),
                    Formula::and(vec![
                        neg(&c),
                        Formula::atom_folded(Atom::lt(y2_term, scaled)),
                    ]),
                ])
            } else {
                Formula::atom_folded(Atom::lt(bound, Term::zero()))
            }
        }
        // D_m(coeff·y + offset) scales to D_{m·c'}(y' + c'·offset); the sign
        // of c' is irrelevant since divisibility ignores it. A dead
        // coefficient leaves D_m(offset).
        LiteralClass::Divides { modulus, coeff, offset, negated } => {
            let atom = if selected.contains(&coeff) {
                let c = cofactor(selected, &coeff);
                Formula::atom_folded(Atom::Div(
                    &modulus * &c,
                    y2_term.add(&offset.scale(&c)),
                ))
            } else {
                Formula::atom_folded(Atom::Div(modulus, offset))
            };
            if negated {
                Formula::not(atom)
            } else {
                atom
            }
        }
        LiteralClass::Equality { .. } => {
            panic!("rewrite_literal: equalities must be eliminated first")
        }
    }
}

/// Rewrites the body of `∃y. f` into an equivalent disjunction over sign
/// patterns in which a fresh variable `y'` replaces `y` and carries
/// coefficient one everywhere. Each disjunct is
/// `guard ∧ rewritten-body ∧ D_ν(y')`, and `∃y. f` is equivalent to
/// `∃y'.` applied to the returned formula.
///
/// `f` must contain only bounded quantifiers, with `y` free (alpha-rename
/// first if a binder reuses it).
pub fn normalize_in(f: &Formula, y: &Var, fresh: &FreshVars) -> (Var, Formula) {
    let f = to_nnf(f);
    let f = eliminate_equalities(&f, y);
    let s = coefficient_set(&f, y);
    let y2 = fresh.fresh(&y.name);
    let mut disjuncts = Vec::new();
    for case in sign_cases(&s) {
        let body = rewrite_case(&f, y, &case.selected, &y2);
        let stride = Formula::atom_folded(Atom::Div(case.nu, Term::var(y2.clone())));
        disjuncts.push(Formula::and(vec![case.guard, body, stride]));
    }
    (y2, Formula::or(disjuncts))
}

/// Checks that `f` mentions `y` only through basic shapes with unit
/// coefficient: `y < a`, `b < y`, `(¬)D_m(y + c)`, or `y`-free literals,
/// combined by conjunction, disjunction, and bounded quantifiers.
pub fn is_normalized_in(f: &Formula, y: &Var) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Atom(_) | Formula::Not(_) => match classify_literal(f, y) {
            LiteralClass::Free => true,
            LiteralClass::Upper { coeff, .. } | LiteralClass::Lower { coeff, .. } => {
                coeff.is_one()
            }
            LiteralClass::Divides { coeff, .. } => coeff.is_one(),
            LiteralClass::Equality { .. } => false,
        },
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| is_normalized_in(g, y)),
        Formula::BExists(_, _, g) | Formula::BForall(_, _, g) => is_normalized_in(g, y),
        Formula::Exists(..) | Formula::Forall(..) => false,
    }
}
