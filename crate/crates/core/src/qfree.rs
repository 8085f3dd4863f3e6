//! Full quantifier elimination for the decidable fragment.
//!
//! Bounding quantifiers is always possible, but removing them entirely is
//! not: a formula like `∃y. t·y = x` defines "t divides x", which no
//! quantifier-free formula with constant moduli expresses uniformly in `t`.
//! Two syntactic conditions carve out a fragment where elimination does go
//! through:
//!
//! 1. every divisibility modulus is a constant, and
//! 2. no quantified variable is scaled by a coefficient that depends on `t`
//!    (free variables may be — `∃y. t·x = y` is fine).
//!
//! Under these conditions the sign-case and period machinery of
//! [`eliminate`](crate::eliminate) only ever produces constant range widths,
//! so every remaining bounded quantifier can be expanded into a literal
//! disjunction or conjunction. [`eliminate_to_qfree`] performs the whole
//! pipeline and enforces a global budget on how many instantiations the
//! expansion may emit.

use crate::ast::{Atom, Formula, FreshVars, Term, Var};
use crate::eliminate::{eliminate_exists, simplify};
use crate::normalize::to_nnf;
use crate::poly::Poly;
use num_traits::ToPrimitive;
use std::collections::BTreeSet;
use std::fmt;

/// Hard cap on the total number of quantifier instantiations
/// [`eliminate_to_qfree`] will expand.
pub const EXPANSION_LIMIT: u64 = 1_000_000;

/// One reason a formula falls outside the fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A divisibility constraint whose modulus depends on `t`.
    NonconstantModulus { modulus: Poly },
    /// A quantified variable scaled by a coefficient that depends on `t`.
    ParametricCoefficient { var: Var, coeff: Poly },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonconstantModulus { modulus } => {
                write!(f, "divisibility modulus {modulus} depends on t")
            }
            Violation::ParametricCoefficient { var, coeff } => {
                write!(
                    f,
                    "quantified variable {} is scaled by {coeff}, which depends on t",
                    var.name
                )
            }
        }
    }
}

/// Outcome of the eligibility scan; empty `violations` means the formula is
/// in the fragment.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EligibilityReport {
    pub violations: Vec<Violation>,
}

impl EligibilityReport {
    pub fn eligible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for EligibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eligible() {
            return write!(f, "eligible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QfreeError {
    #[error("not eligible for full elimination: {0}")]
    Ineligible(EligibilityReport),
    #[error("expansion exceeded the limit of {limit} instantiations")]
    ExpansionLimit { limit: u64 },
}

/// Scans `f` for fragment violations: parametric moduli anywhere, and
/// parametric coefficients on variables bound by an enclosing quantifier
/// (bounded or not).
pub fn qfree_eligible(f: &Formula) -> EligibilityReport {
    fn check_term(u: &Term, scope: &BTreeSet<Var>, out: &mut Vec<Violation>) {
        for (v, coeff) in u.coeffs() {
            if !coeff.is_constant() && scope.contains(v) {
                let viol = Violation::ParametricCoefficient {
                    var: v.clone(),
                    coeff: coeff.clone(),
                };
                if !out.contains(&viol) {
                    out.push(viol);
                }
            }
        }
    }
    fn walk(f: &Formula, scope: &mut BTreeSet<Var>, out: &mut Vec<Violation>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                match a {
                    Atom::Lt(u) | Atom::Eq(u) => check_term(u, scope, out),
                    Atom::Div(m, u) => {
                        if !m.is_constant() {
                            let viol = Violation::NonconstantModulus { modulus: m.clone() };
                            if !out.contains(&viol) {
                                out.push(viol);
                            }
                        }
                        check_term(u, scope, out);
                    }
                }
            }
            Formula::Not(g) => walk(g, scope, out),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    walk(g, scope, out);
                }
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let already = !scope.insert(v.clone());
                walk(g, scope, out);
                if !already {
                    scope.remove(v);
                }
            }
            Formula::BExists(v, _, g) | Formula::BForall(v, _, g) => {
                let already = !scope.insert(v.clone());
                walk(g, scope, out);
                if !already {
                    scope.remove(v);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut BTreeSet::new(), &mut out);
    EligibilityReport { violations: out }
}

/// Rewrites every bounded quantifier as an unbounded one with explicit range
/// atoms: `∃z ∈ [0, α]. ψ` becomes `∃z. 0 ≤ z ∧ z ≤ α ∧ ψ` and the
/// universal dual carries the range on the left of an implication.
pub fn desugar_bounded(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(desugar_bounded(g)),
        Formula::And(gs) => Formula::and(gs.iter().map(desugar_bounded).collect()),
        Formula::Or(gs) => Formula::or(gs.iter().map(desugar_bounded).collect()),
        Formula::Exists(v, g) => Formula::exists(v.clone(), desugar_bounded(g)),
        Formula::Forall(v, g) => Formula::forall(v.clone(), desugar_bounded(g)),
        Formula::BExists(v, b, g) => {
            let z = Term::var(v.clone());
            Formula::exists(
                v.clone(),
                Formula::and(vec![
                    Formula::atom_folded(Atom::le(Term::zero(), z.clone())),
                    Formula::atom_folded(Atom::le(z, Term::constant(b.clone()))),
                    desugar_bounded(g),
                ]),
            )
        }
        Formula::BForall(v, b, g) => {
            let z = Term::var(v.clone());
            Formula::forall(
                v.clone(),
                Formula::or(vec![
                    Formula::atom_folded(Atom::lt(z.clone(), Term::zero())),
                    Formula::atom_folded(Atom::lt(Term::constant(b.clone()), z)),
                    desugar_bounded(g),
                ]),
            )
        }
    }
}

struct Budget {
    used: u64,
}

impl Budget {
    fn charge(&mut self, n: u64) -> Result<(), QfreeError> {
        self.used = self.used.saturating_add(n);
        if self.used > EXPANSION_LIMIT {
            Err(QfreeError::ExpansionLimit { limit: EXPANSION_LIMIT })
        } else {
            Ok(())
        }
    }
}

/// Expands every bounded quantifier with a constant range into a literal
/// disjunction or conjunction, charging the budget per instantiation.
fn expand_ranges(
    f: &Formula,
    fresh: &FreshVars,
    budget: &mut Budget,
) -> Result<Formula, QfreeError> {
    fn instances(
        v: &Var,
        bound: &Poly,
        g: &Formula,
        fresh: &FreshVars,
        budget: &mut Budget,
    ) -> Result<Vec<Formula>, QfreeError> {
        let c = bound
            .as_constant()
            .expect("eligibility guarantees constant range widths");
        let width = (&c + 1u32).to_u64().unwrap_or(u64::MAX);
        budget.charge(width)?;
        let mut out = Vec::new();
        let mut j = num_bigint::BigInt::from(0);
        while j <= c {
            out.push(g.substitute(v, &Term::constant(Poly::constant(j.clone())), fresh));
            j += 1;
        }
        Ok(out)
    }
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => Ok(f.clone()),
        Formula::Not(g) => Ok(Formula::not(expand_ranges(g, fresh, budget)?)),
        Formula::And(gs) => {
            let mut parts = Vec::with_capacity(gs.len());
            for g in gs {
                parts.push(expand_ranges(g, fresh, budget)?);
            }
            Ok(Formula::and(parts))
        }
        Formula::Or(gs) => {
            let mut parts = Vec::with_capacity(gs.len());
            for g in gs {
                parts.push(expand_ranges(g, fresh, budget)?);
            }
            Ok(Formula::or(parts))
        }
        Formula::BExists(v, b, g) => {
            let g = expand_ranges(g, fresh, budget)?;
            if b.as_constant().is_some_and(|c| c < 0.into()) {
                return Ok(Formula::False);
            }
            Ok(Formula::or(instances(v, b, &g, fresh, budget)?))
        }
        Formula::BForall(v, b, g) => {
            let g = expand_ranges(g, fresh, budget)?;
            if b.as_constant().is_some_and(|c| c < 0.into()) {
                return Ok(Formula::True);
            }
            Ok(Formula::and(instances(v, b, &g, fresh, budget)?))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            panic!("expand_ranges: unbounded quantifier left over")
        }
    }
}

/// Eliminates every quantifier from `f`, producing a quantifier-free
/// equivalent. Fails up front when the formula is outside the fragment
/// ([`qfree_eligible`]) and aborts if the expansion would exceed
/// [`EXPANSION_LIMIT`] instantiations.
pub fn eliminate_to_qfree(f: &Formula) -> Result<Formula, QfreeError> {
    let report = qfree_eligible(f);
    if !report.eligible() {
        return Err(QfreeError::Ineligible(report));
    }
    let fresh = FreshVars::above(&[f]);
    let prepared = desugar_bounded(&to_nnf(&f.refresh_bound(&fresh)));
    let mut budget = Budget { used: 0 };

    fn go(
        f: &Formula,
        fresh: &FreshVars,
        budget: &mut Budget,
    ) -> Result<Formula, QfreeError> {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => Ok(f.clone()),
            Formula::Not(g) => Ok(Formula::not(go(g, fresh, budget)?)),
            Formula::And(gs) => {
                let mut parts = Vec::with_capacity(gs.len());
                for g in gs {
                    parts.push(go(g, fresh, budget)?);
                }
                Ok(Formula::and(parts))
            }
            Formula::Or(gs) => {
                let mut parts = Vec::with_capacity(gs.len());
                for g in gs {
                    parts.push(go(g, fresh, budget)?);
                }
                Ok(Formula::or(parts))
            }
            Formula::Exists(v, g) => {
                let body = go(g, fresh, budget)?;
                let bounded = eliminate_exists(&body, v, fresh);
                expand_ranges(&bounded, fresh, budget)
            }
            Formula::Forall(v, g) => {
                let body = go(g, fresh, budget)?;
                let bounded = eliminate_exists(&Formula::not(body), v, fresh);
                Ok(Formula::not(expand_ranges(&bounded, fresh, budget)?))
            }
            Formula::BExists(..) | Formula::BForall(..) => {
                panic!("eliminate_to_qfree: bounded quantifier survived desugaring")
            }
        }
    }

    let out = simplify(&go(&prepared, &fresh, &mut budget)?);
    debug_assert_eq!(out.count_quantifiers(), 0);
    Ok(out)
}
