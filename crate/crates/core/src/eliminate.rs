//! Turning unbounded quantifiers into bounded ones.
//!
//! After [`normalize_in`](crate::normalize::normalize_in) the target
//! variable `y` occurs only with coefficient one, so `∃y. φ` succumbs to a
//! test-point argument: either arbitrarily negative `y` work (captured by a
//! limit formula `φ₋∞`), or the least solution sits within `δ` of one of the
//! lower-bound terms appearing in `φ`, where `δ` is a common period of the
//! divisibility constraints. Because moduli are polynomials in `t`, the
//! period is only positive case-by-case: we split on the sign pattern of the
//! moduli and use a guarded `δ` per case. The resulting test ranges
//! `1 ≤ z ≤ δ(t)` have parametric width, so they become bounded quantifiers
//! instead of literal disjunctions — that is the whole point: every formula
//! is equivalent to one whose quantifiers are all bounded by polynomials.
//!
//! [`bound_all_quantifiers`] drives this across a whole formula, innermost
//! quantifier first, rewriting `∀` as `¬∃¬`.

use crate::ast::{Atom, Formula, FreshVars, Term, Var};
use crate::normalize::{self, classify_literal, normalize_in, to_nnf, LiteralClass};
use crate::poly::Poly;
use std::collections::BTreeSet;

/// The limit of `f` as `y → -∞`: upper bounds on `y` become true, lower
/// bounds false. Divisibility constraints stay, so the result is still
/// periodic in `y`.
///
/// `f` must be normalized in `y` (unit coefficients, no equalities on `y`).
pub fn phi_minus_infinity(f: &Formula, y: &Var) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(_) | Formula::Not(_) => match classify_literal(f, y) {
            LiteralClass::Upper { .. } => Formula::True,
            LiteralClass::Lower { .. } => Formula::False,
            LiteralClass::Divides { .. } | LiteralClass::Free => f.clone(),
            LiteralClass::Equality { .. } => {
                panic!("phi_minus_infinity: equality on the target variable")
            }
        },
        Formula::And(gs) => {
            Formula::and(gs.iter().map(|g| phi_minus_infinity(g, y)).collect())
        }
        Formula::Or(gs) => {
            Formula::or(gs.iter().map(|g| phi_minus_infinity(g, y)).collect())
        }
        Formula::BExists(v, b, g) => {
            Formula::bexists(v.clone(), b.clone(), phi_minus_infinity(g, y))
        }
        Formula::BForall(v, b, g) => {
            Formula::bforall(v.clone(), b.clone(), phi_minus_infinity(g, y))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            panic!("phi_minus_infinity: unbounded quantifier in body")
        }
    }
}

/// A candidate lower-bound value for the target variable. The template may
/// mention variables that were bound inside `f` by bounded quantifiers;
/// each such variable is replaced by a fresh one listed in `binders`
/// together with its range bound, and consumers re-quantify over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSetEntry {
    pub template: Term,
    pub binders: Vec<(Var, Poly)>,
}

/// Collects the lower-bound terms `b` from literals `b < y`, lifting terms
/// from under bounded quantifiers by renaming their binder into the entry.
///
/// `f` must be normalized in `y`.
pub fn lower_bound_terms(f: &Formula, y: &Var, fresh: &FreshVars) -> Vec<BSetEntry> {
    fn push_unique(out: &mut Vec<BSetEntry>, e: BSetEntry) {
        if !out.contains(&e) {
            out.push(e);
        }
    }
    fn walk(f: &Formula, y: &Var, fresh: &FreshVars, out: &mut Vec<BSetEntry>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(_) | Formula::Not(_) => match classify_literal(f, y) {
                LiteralClass::Lower { bound, .. } => push_unique(
                    out,
                    BSetEntry { template: bound, binders: Vec::new() },
                ),
                LiteralClass::Equality { .. } => {
                    panic!("lower_bound_terms: equality on the target variable")
                }
                _ => {}
            },
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    walk(g, y, fresh, out);
                }
            }
            Formula::BExists(v, b, g) | Formula::BForall(v, b, g) => {
                let mut inner = Vec::new();
                walk(g, y, fresh, &mut inner);
                for mut e in inner {
                    if e.template.contains(v) {
                        let c = fresh.fresh(&v.name);
                        e.template = e.template.subst(v, &Term::var(c.clone()));
                        e.binders.push((c, b.clone()));
                    }
                    push_unique(out, e);
                }
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("lower_bound_terms: unbounded quantifier in body")
            }
        }
    }
    let mut out = Vec::new();
    walk(f, y, fresh, &mut out);
    out
}

/// One sign pattern over the divisibility moduli attached to `y`: the
/// members asserted negative and positive, the guard in `t` saying so (the
/// rest are zero), and the common period `δ` — the product of the listed
/// members, negated when an odd number are negative so that the guard
/// entails `δ(t) > 0`. With no moduli at all, `δ = 1`.
#[derive(Clone, Debug)]
pub struct DivCaseSplit {
    pub negatives: Vec<Poly>,
    pub positives: Vec<Poly>,
    pub guard: Formula,
    pub delta: Poly,
}

/// Enumerates satisfiable sign patterns of the divisibility moduli on `y`.
/// Patterns contradicted by constant moduli are dropped, and guard conjuncts
/// settled by constants are folded away.
pub fn divisibility_case_splits(f: &Formula, y: &Var) -> Vec<DivCaseSplit> {
    fn moduli(f: &Formula, y: &Var, out: &mut BTreeSet<Poly>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(_) | Formula::Not(_) => {
                if let LiteralClass::Divides { modulus, .. } = classify_literal(f, y) {
                    out.insert(modulus);
                }
            }
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    moduli(g, y, out);
                }
            }
            Formula::BExists(_, _, g) | Formula::BForall(_, _, g) => moduli(g, y, out),
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("divisibility_case_splits: unbounded quantifier in body")
            }
        }
    }
    let mut set = BTreeSet::new();
    moduli(f, y, &mut set);
    let polys: Vec<&Poly> = set.iter().collect();

    // Ternary masks: each modulus is negative, zero, or positive.
    let mut cases = Vec::new();
    let total = 3usize.pow(polys.len() as u32);
    for mask in 0..total {
        let mut code = mask;
        let mut negatives = Vec::new();
        let mut positives = Vec::new();
        let mut conjuncts = Vec::new();
        for p in &polys {
            let sign = code % 3;
            code /= 3;
            match sign {
                0 => {
                    conjuncts.push(Formula::atom_folded(Atom::Eq(Term::constant(
                        (*p).clone(),
                    ))));
                }
                1 => {
                    negatives.push((*p).clone());
                    conjuncts.push(normalize::neg(p));
                }
                _ => {
                    positives.push((*p).clone());
                    conjuncts.push(normalize::pos(p));
                }
            }
        }
        let guard = Formula::and(conjuncts);
        if guard == Formula::False {
            continue;
        }
        let mut delta = Poly::product(negatives.iter().chain(positives.iter()));
        if negatives.len() % 2 == 1 {
            delta = -&delta;
        }
        cases.push(DivCaseSplit { negatives, positives, guard, delta });
    }
    cases
}

/// Eliminates `∃y` from `∃y. body`, returning an equivalent formula whose
/// only new quantifiers are bounded. `body` may contain bounded quantifiers
/// but no unbounded ones; its own binders are refreshed first, so `y` may
/// even be shadowed inside.
///
/// The shape of the result, one disjunct per sign pattern of the moduli:
/// `guard ∧ (∃z ∈ [1, δ]. φ₋∞[y↦z]  ∨  ∃z ∈ [1, δ]. ⋁_b φ[y↦b+z])`
/// with each lower-bound template `b` re-quantified over its binders.
pub fn eliminate_exists(body: &Formula, y: &Var, fresh: &FreshVars) -> Formula {
    let body = body.refresh_bound(fresh);
    let (y2, norm) = normalize_in(&body, y, fresh);
    let minus_inf = phi_minus_infinity(&norm, &y2);
    let bset = lower_bound_terms(&norm, &y2, fresh);
    let one = Term::constant(Poly::constant(1));

    let mut disjuncts = Vec::new();
    for case in divisibility_case_splits(&norm, &y2) {
        // z ranges over [1, δ] encoded as z' + 1 with z' ∈ [0, δ - 1].
        let z = fresh.fresh("z");
        let z_plus_1 = Term::var(z.clone()).add(&one);
        let width = &case.delta - &Poly::one();

        let low = minus_inf.substitute(&y2, &z_plus_1, fresh);
        let mut shifted = Vec::with_capacity(bset.len());
        for entry in &bset {
            let point = entry.template.add(&z_plus_1);
            let mut g = norm.substitute(&y2, &point, fresh);
            for (c, b) in &entry.binders {
                g = Formula::bexists(c.clone(), b.clone(), g);
            }
            shifted.push(g);
        }
        let tested = Formula::bexists(
            z,
            width,
            Formula::or(std::iter::once(low).chain(shifted).collect()),
        );
        disjuncts.push(Formula::and(vec![case.guard, tested]));
    }
    simplify(&Formula::or(disjuncts))
}

/// Rewrites `f` into an equivalent formula with no unbounded quantifiers,
/// working innermost-first; `∀y` goes through as `¬∃y¬`.
pub fn bound_all_quantifiers(f: &Formula, fresh: &FreshVars) -> Formula {
    fn go(f: &Formula, fresh: &FreshVars) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(go(g, fresh)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| go(g, fresh)).collect()),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| go(g, fresh)).collect()),
            Formula::BExists(v, b, g) => {
                Formula::bexists(v.clone(), b.clone(), go(g, fresh))
            }
            Formula::BForall(v, b, g) => {
                Formula::bforall(v.clone(), b.clone(), go(g, fresh))
            }
            Formula::Exists(v, g) => eliminate_exists(&go(g, fresh), v, fresh),
            Formula::Forall(v, g) => Formula::not(eliminate_exists(
                &Formula::not(go(g, fresh)),
                v,
                fresh,
            )),
        }
    }
    let out = go(&f.refresh_bound(fresh), fresh);
    debug_assert_eq!(out.count_unbounded_quantifiers(), 0);
    out
}

/// Light cleanup pass: re-folds constants, deduplicates conjuncts and
/// disjuncts, evaluates bounded quantifiers whose range is settled (empty
/// range, or the single point 0), and splices out binders the body ignores.
pub fn simplify(f: &Formula) -> Formula {
    fn dedup(items: Vec<Formula>) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::with_capacity(items.len());
        for g in items {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => Formula::atom_folded(a.clone()),
        Formula::Not(g) => Formula::not(simplify(g)),
        Formula::And(gs) => Formula::and(dedup(gs.iter().map(simplify).collect())),
        Formula::Or(gs) => Formula::or(dedup(gs.iter().map(simplify).collect())),
        Formula::BExists(v, b, g) => {
            let g = simplify(g);
            match b.as_constant() {
                Some(c) if c < 0.into() => Formula::False,
                Some(c) if c == 0.into() => {
                    simplify(&g.substitute(v, &Term::zero(), &FreshVars::above(&[&g])))
                }
                _ if !g.free_vars().contains(v) => {
                    // ∃v ∈ [0, b]. g  ⟺  g ∧ 0 ≤ b when v is unused.
                    Formula::and(vec![
                        g,
                        Formula::atom_folded(Atom::le(
                            Term::zero(),
                            Term::constant(b.clone()),
                        )),
                    ])
                }
                _ => Formula::bexists(v.clone(), b.clone(), g),
            }
        }
        Formula::BForall(v, b, g) => {
            let g = simplify(g);
            match b.as_constant() {
                Some(c) if c < 0.into() => Formula::True,
                Some(c) if c == 0.into() => {
                    simplify(&g.substitute(v, &Term::zero(), &FreshVars::above(&[&g])))
                }
                _ if !g.free_vars().contains(v) => {
                    // ∀v ∈ [0, b]. g  ⟺  g ∨ b < 0 when v is unused.
                    Formula::or(vec![
                        g,
                        Formula::atom_folded(Atom::lt(
                            Term::constant(b.clone()),
                            Term::zero(),
                        )),
                    ])
                }
                _ => Formula::bforall(v.clone(), b.clone(), g),
            }
        }
        Formula::Exists(v, g) => Formula::exists(v.clone(), simplify(g)),
        Formula::Forall(v, g) => Formula::forall(v.clone(), simplify(g)),
    }
}

/// Convenience entry point: NNF, bound every quantifier, tidy up.
pub fn eliminate(f: &Formula) -> Formula {
    let fresh = FreshVars::above(&[f]);
    simplify(&bound_all_quantifiers(&to_nnf(f), &fresh))
}
