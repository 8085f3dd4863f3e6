//! Ground-truth semantics at a fixed parameter value.
//!
//! [`ground`] evaluates every polynomial coefficient at a concrete `t`,
//! producing a classical integer-arithmetic formula. Those are decided by a
//! textbook Cooper quantifier-elimination procedure ([`cooper_eliminate`] /
//! [`classical_cooper_decide`]), which handles unbounded quantifiers exactly
//! and is implemented independently of the parametric pipeline so the two
//! can cross-check each other. [`check_equiv`] compares two formulas on a
//! finite grid of parameter values and variable assignments — sound for
//! refuting equivalence, not a proof of it.

use crate::ast::{Atom, EvalError, Formula, Var};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A linear term with integer coefficients (the parameter already
/// evaluated away).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GTerm {
    coeffs: BTreeMap<Var, BigInt>,
    constant: BigInt,
}

impl GTerm {
    pub fn constant(c: BigInt) -> GTerm {
        GTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> GTerm {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, BigInt::one());
        GTerm {
            coeffs,
            constant: BigInt::zero(),
        }
    }

    fn normalized(mut self) -> GTerm {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn add(&self, rhs: &GTerm) -> GTerm {
        let mut out = self.clone();
        for (v, c) in &rhs.coeffs {
            *out.coeffs.entry(v.clone()).or_insert_with(BigInt::zero) += c;
        }
        out.constant += &rhs.constant;
        out.normalized()
    }

    pub fn scale(&self, k: &BigInt) -> GTerm {
        GTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
        .normalized()
    }

    pub fn coeff(&self, v: &Var) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    /// Drops `v` and returns the remainder (used after coefficient
    /// unification, where the coefficient is known).
    fn without(&self, v: &Var) -> GTerm {
        let mut out = self.clone();
        out.coeffs.remove(v);
        out
    }

    /// Substitutes `v := s`; only valid after unification made the
    /// coefficient of `v` equal to `c`.
    fn subst(&self, v: &Var, s: &GTerm) -> GTerm {
        let c = self.coeff(v);
        if c.is_zero() {
            return self.clone();
        }
        self.without(v).add(&s.scale(&c))
    }

    pub fn eval(&self, env: &HashMap<Var, BigInt>) -> Result<BigInt, EvalError> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let val = env
                .get(v)
                .ok_or_else(|| EvalError::MissingBinding(v.name.clone()))?;
            acc += c * val;
        }
        Ok(acc)
    }
}

/// A formula with all ring coefficients evaluated at a fixed `t`.
/// `NDiv` is negated divisibility, kept as a literal so quantifier
/// elimination can treat it directly. Divisibility moduli are nonzero and
/// positive (a zero modulus folds to `False` during grounding).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GFormula {
    True,
    False,
    Lt(GTerm),
    Eq(GTerm),
    Div(BigInt, GTerm),
    NDiv(BigInt, GTerm),
    Not(Box<GFormula>),
    And(Vec<GFormula>),
    Or(Vec<GFormula>),
    Exists(Var, Box<GFormula>),
    Forall(Var, Box<GFormula>),
    BExists(Var, BigInt, Box<GFormula>),
    BForall(Var, BigInt, Box<GFormula>),
}

/// Hard cap on finite expansions inside the oracle (bounded-quantifier
/// unrolling and Cooper test-point disjunctions).
const EXPANSION_LIMIT: u64 = 10_000_000;

fn glt(u: GTerm) -> GFormula {
    if u.is_constant() {
        return if u.constant_part().is_negative() {
            GFormula::True
        } else {
            GFormula::False
        };
    }
    GFormula::Lt(u)
}

fn geq(u: GTerm) -> GFormula {
    if u.is_constant() {
        return if u.constant_part().is_zero() {
            GFormula::True
        } else {
            GFormula::False
        };
    }
    GFormula::Eq(u)
}

fn gdiv(m: BigInt, u: GTerm) -> GFormula {
    if m.is_zero() {
        return GFormula::False;
    }
    let m = m.abs();
    if m.is_one() {
        return GFormula::True;
    }
    if u.is_constant() {
        return if (u.constant_part() % &m).is_zero() {
            GFormula::True
        } else {
            GFormula::False
        };
    }
    GFormula::Div(m, u)
}

fn gndiv(m: BigInt, u: GTerm) -> GFormula {
    gnot(gdiv(m, u))
}

fn gnot(f: GFormula) -> GFormula {
    match f {
        GFormula::True => GFormula::False,
        GFormula::False => GFormula::True,
        GFormula::Not(g) => *g,
        GFormula::Div(m, u) => GFormula::NDiv(m, u),
        GFormula::NDiv(m, u) => GFormula::Div(m, u),
        other => GFormula::Not(Box::new(other)),
    }
}

fn gand(items: Vec<GFormula>) -> GFormula {
    let mut out = Vec::with_capacity(items.len());
    let mut seen = HashSet::new();
    for f in items {
        match f {
            GFormula::True => {}
            GFormula::False => return GFormula::False,
            GFormula::And(inner) => {
                for g in inner {
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
            }
            other => {
                if seen.insert(other.clone()) {
                    out.push(other);
                }
            }
        }
    }
    match out.len() {
        0 => GFormula::True,
        1 => out.pop().unwrap(),
        _ => GFormula::And(out),
    }
}

fn gor(items: Vec<GFormula>) -> GFormula {
    let mut out = Vec::with_capacity(items.len());
    let mut seen = HashSet::new();
    for f in items {
        match f {
            GFormula::False => {}
            GFormula::True => return GFormula::True,
            GFormula::Or(inner) => {
                for g in inner {
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
            }
            other => {
                if seen.insert(other.clone()) {
                    out.push(other);
                }
            }
        }
    }
    match out.len() {
        0 => GFormula::False,
        1 => out.pop().unwrap(),
        _ => GFormula::Or(out),
    }
}

// -------------------------------------------------------------- grounding

/// Evaluates every polynomial at `t`, producing the classical formula for
/// that parameter value. Atoms that come out variable-free are decided on
/// the spot; a divisibility whose modulus evaluates to 0 is false.
pub fn ground(f: &Formula, t: u64) -> GFormula {
    let tb = BigInt::from(t);
    ground_at(f, &tb)
}

fn ground_term(u: &crate::ast::Term, t: &BigInt) -> GTerm {
    let mut out = GTerm::constant(u.constant_part().eval_big(t));
    for (v, p) in u.coeffs() {
        let c = p.eval_big(t);
        if !c.is_zero() {
            out.coeffs.insert(v.clone(), c);
        }
    }
    out
}

fn ground_at(f: &Formula, t: &BigInt) -> GFormula {
    match f {
        Formula::True => GFormula::True,
        Formula::False => GFormula::False,
        Formula::Atom(Atom::Lt(u)) => glt(ground_term(u, t)),
        Formula::Atom(Atom::Eq(u)) => geq(ground_term(u, t)),
        Formula::Atom(Atom::Div(m, u)) => gdiv(m.eval_big(t), ground_term(u, t)),
        Formula::Not(g) => gnot(ground_at(g, t)),
        Formula::And(gs) => gand(gs.iter().map(|g| ground_at(g, t)).collect()),
        Formula::Or(gs) => gor(gs.iter().map(|g| ground_at(g, t)).collect()),
        Formula::Exists(v, g) => GFormula::Exists(v.clone(), Box::new(ground_at(g, t))),
        Formula::Forall(v, g) => GFormula::Forall(v.clone(), Box::new(ground_at(g, t))),
        Formula::BExists(v, b, g) => {
            GFormula::BExists(v.clone(), b.eval_big(t), Box::new(ground_at(g, t)))
        }
        Formula::BForall(v, b, g) => {
            GFormula::BForall(v.clone(), b.eval_big(t), Box::new(ground_at(g, t)))
        }
    }
}

// ------------------------------------------------------------- evaluation

/// Truth of a ground formula by structural recursion; bounded quantifiers
/// enumerate their range, unbounded ones are an error.
pub fn geval(f: &GFormula, env: &HashMap<Var, BigInt>) -> Result<bool, EvalError> {
    let mut env = env.clone();
    geval_rec(f, &mut env)
}

fn geval_rec(f: &GFormula, env: &mut HashMap<Var, BigInt>) -> Result<bool, EvalError> {
    match f {
        GFormula::True => Ok(true),
        GFormula::False => Ok(false),
        GFormula::Lt(u) => Ok(u.eval(env)?.is_negative()),
        GFormula::Eq(u) => Ok(u.eval(env)?.is_zero()),
        GFormula::Div(m, u) => Ok((u.eval(env)? % m).is_zero()),
        GFormula::NDiv(m, u) => Ok(!(u.eval(env)? % m).is_zero()),
        GFormula::Not(g) => Ok(!geval_rec(g, env)?),
        GFormula::And(gs) => {
            for g in gs {
                if !geval_rec(g, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        GFormula::Or(gs) => {
            for g in gs {
                if geval_rec(g, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        GFormula::Exists(..) | GFormula::Forall(..) => Err(EvalError::UnboundedQuantifier),
        GFormula::BExists(v, bound, g) => {
            let saved = env.remove(v);
            let mut z = BigInt::zero();
            let mut result = false;
            while z <= *bound {
                env.insert(v.clone(), z.clone());
                if geval_rec(g, env)? {
                    result = true;
                    break;
                }
                z += 1;
            }
            restore(env, v, saved);
            Ok(result)
        }
        GFormula::BForall(v, bound, g) => {
            let saved = env.remove(v);
            let mut z = BigInt::zero();
            let mut result = true;
            while z <= *bound {
                env.insert(v.clone(), z.clone());
                if !geval_rec(g, env)? {
                    result = false;
                    break;
                }
                z += 1;
            }
            restore(env, v, saved);
            Ok(result)
        }
    }
}

fn restore(env: &mut HashMap<Var, BigInt>, v: &Var, old: Option<BigInt>) {
    match old {
        Some(x) => {
            env.insert(v.clone(), x);
        }
        None => {
            env.remove(v);
        }
    }
}

/// Finite-enumeration truth of a formula whose quantifiers are all bounded.
pub fn eval_bounded(f: &Formula, t: u64, env: &HashMap<Var, BigInt>) -> Result<bool, EvalError> {
    geval(&ground(f, t), env)
}

// -------------------------------------------------- Cooper's elimination

/// Removes every quantifier from a ground formula: bounded quantifiers are
/// unrolled (innermost first, after their bodies are already
/// quantifier-free), unbounded existentials are eliminated by Cooper's
/// method, and universals go through their existential dual.
pub fn cooper_eliminate(f: &GFormula) -> GFormula {
    match f {
        GFormula::True
        | GFormula::False
        | GFormula::Lt(_)
        | GFormula::Eq(_)
        | GFormula::Div(..)
        | GFormula::NDiv(..) => f.clone(),
        GFormula::Not(g) => gnot(cooper_eliminate(g)),
        GFormula::And(gs) => gand(gs.iter().map(cooper_eliminate).collect()),
        GFormula::Or(gs) => gor(gs.iter().map(cooper_eliminate).collect()),
        GFormula::Exists(v, g) => cooper_exists(v, cooper_eliminate(g)),
        GFormula::Forall(v, g) => gnot(cooper_exists(v, nnf(gnot(cooper_eliminate(g))))),
        GFormula::BExists(v, bound, g) => {
            let body = cooper_eliminate(g);
            expand_range(v, bound, &body, false)
        }
        GFormula::BForall(v, bound, g) => {
            let body = cooper_eliminate(g);
            expand_range(v, bound, &body, true)
        }
    }
}

/// Unrolls `Q v ∈ [0, bound]. body` into an explicit disjunction or
/// conjunction. An empty range gives the identity element.
fn expand_range(v: &Var, bound: &BigInt, body: &GFormula, universal: bool) -> GFormula {
    if bound.is_negative() {
        return if universal {
            GFormula::True
        } else {
            GFormula::False
        };
    }
    let width = (bound + 1u32)
        .to_u64()
        .filter(|&w| w <= EXPANSION_LIMIT)
        .unwrap_or_else(|| panic!("bounded-quantifier range 0..={bound} exceeds the oracle expansion limit"));
    let mut items = Vec::with_capacity(width as usize);
    for j in 0..width {
        let s = GTerm::constant(BigInt::from(j));
        items.push(subst_formula(body, v, &s));
    }
    if universal {
        gand(items)
    } else {
        gor(items)
    }
}

fn subst_formula(f: &GFormula, v: &Var, s: &GTerm) -> GFormula {
    match f {
        GFormula::True => GFormula::True,
        GFormula::False => GFormula::False,
        GFormula::Lt(u) => glt(u.subst(v, s)),
        GFormula::Eq(u) => geq(u.subst(v, s)),
        GFormula::Div(m, u) => gdiv(m.clone(), u.subst(v, s)),
        GFormula::NDiv(m, u) => gndiv(m.clone(), u.subst(v, s)),
        GFormula::Not(g) => gnot(subst_formula(g, v, s)),
        GFormula::And(gs) => gand(gs.iter().map(|g| subst_formula(g, v, s)).collect()),
        GFormula::Or(gs) => gor(gs.iter().map(|g| subst_formula(g, v, s)).collect()),
        // quantifier-free by the time substitution runs
        other => unreachable!("substitution into quantified ground formula: {other:?}"),
    }
}

/// Negation normal form for quantifier-free ground formulas, rewriting
/// equalities into strict inequalities on the way: `u = 0` becomes
/// `u < 1 ∧ -u < 1`, `u ≠ 0` becomes `u < 0 ∨ -u < 0`.
fn nnf(f: GFormula) -> GFormula {
    fn go(f: &GFormula, positive: bool) -> GFormula {
        match f {
            GFormula::True => {
                if positive {
                    GFormula::True
                } else {
                    GFormula::False
                }
            }
            GFormula::False => {
                if positive {
                    GFormula::False
                } else {
                    GFormula::True
                }
            }
            GFormula::Lt(u) => {
                if positive {
                    glt(u.clone())
                } else {
                    // ¬(u < 0) ⇔ -u - 1 < 0
                    glt(u.scale(&BigInt::from(-1)).add(&GTerm::constant(BigInt::from(-1))))
                }
            }
            GFormula::Eq(u) => {
                let minus = u.scale(&BigInt::from(-1));
                let one = GTerm::constant(BigInt::from(-1));
                if positive {
                    gand(vec![glt(u.add(&one)), glt(minus.add(&one))])
                } else {
                    gor(vec![glt(u.clone()), glt(minus)])
                }
            }
            GFormula::Div(m, u) => {
                if positive {
                    gdiv(m.clone(), u.clone())
                } else {
                    gndiv(m.clone(), u.clone())
                }
            }
            GFormula::NDiv(m, u) => {
                if positive {
                    gndiv(m.clone(), u.clone())
                } else {
                    gdiv(m.clone(), u.clone())
                }
            }
            GFormula::Not(g) => go(g, !positive),
            GFormula::And(gs) => {
                let items = gs.iter().map(|g| go(g, positive)).collect();
                if positive {
                    gand(items)
                } else {
                    gor(items)
                }
            }
            GFormula::Or(gs) => {
                let items = gs.iter().map(|g| go(g, positive)).collect();
                if positive {
                    gor(items)
                } else {
                    gand(items)
                }
            }
            other => unreachable!("nnf on quantified ground formula: {other:?}"),
        }
    }
    go(&f, true)
}

/// Classical Cooper elimination of `∃v. body` for a quantifier-free ground
/// `body`:
///
/// 1. normalize to literals `c·v + r < 0`, `D_m(c·v + r)`, `¬D_m(c·v + r)`;
/// 2. unify coefficients to ±1 via `x = lcm·v`, adding `D_lcm(x)`;
/// 3. build the −∞ variant (upper bounds true, lower bounds false) and the
///    set `B` of lower-bound terms;
/// 4. the result is `⋁_{j=1}^{δ} φ₋∞[x:=j] ∨ ⋁_{b∈B} ⋁_{j=1}^{δ} φ[x:=b+j]`
///    with `δ` the lcm of all moduli.
fn cooper_exists(v: &Var, body: GFormula) -> GFormula {
    let body = nnf(body);

    // lcm of |coefficients| of v
    let mut m = BigInt::one();
    collect_literals(&body, &mut |lit| {
        let c = match lit {
            Lit::Lt(u) | Lit::Div(_, u) | Lit::NDiv(_, u) => u.coeff(v),
        };
        if !c.is_zero() {
            m = m.lcm(&c.abs());
        }
    });

    // unify: every occurrence of v becomes coefficient ±1 on x (reusing v
    // as the unified variable), with the divisibility constraint D_m(x)
    let unified = map_literals(&body, &mut |lit| match lit {
        Lit::Lt(u) => {
            let c = u.coeff(v);
            if c.is_zero() {
                return glt(u.clone());
            }
            glt(rescale(u, v, &c, &m))
        }
        Lit::Div(d, u) => {
            let c = u.coeff(v);
            if c.is_zero() {
                return gdiv(d.clone(), u.clone());
            }
            let f = &m / c.abs();
            gdiv(d * &f, rescale(u, v, &c, &m))
        }
        Lit::NDiv(d, u) => {
            let c = u.coeff(v);
            if c.is_zero() {
                return gndiv(d.clone(), u.clone());
            }
            let f = &m / c.abs();
            gndiv(d * &f, rescale(u, v, &c, &m))
        }
    });
    let full = gand(vec![unified, gdiv(m.clone(), GTerm::var(v.clone()))]);

    // δ: lcm of every divisibility modulus mentioning x
    let mut delta = BigInt::one();
    collect_literals(&full, &mut |lit| {
        if let Lit::Div(d, u) | Lit::NDiv(d, u) = lit {
            if !u.coeff(v).is_zero() {
                delta = delta.lcm(d);
            }
        }
    });

    // −∞ variant and lower-bound terms
    let minus_inf = map_literals(&full, &mut |lit| match lit {
        Lit::Lt(u) => match u.coeff(v).sign() {
            num_bigint::Sign::Plus => GFormula::True,   // x < -r: satisfied at -∞
            num_bigint::Sign::Minus => GFormula::False, // r < x: violated at -∞
            num_bigint::Sign::NoSign => glt(u.clone()),
        },
        Lit::Div(d, u) => gdiv(d.clone(), u.clone()),
        Lit::NDiv(d, u) => gndiv(d.clone(), u.clone()),
    });
    let mut lower_bounds: BTreeSet<GTerm> = BTreeSet::new();
    collect_literals(&full, &mut |lit| {
        if let Lit::Lt(u) = lit {
            if u.coeff(v).is_negative() {
                // -x + r < 0, i.e. r < x: the bound term is r
                lower_bounds.insert(u.without(v));
            }
        }
    });

    let delta_w = delta
        .to_u64()
        .filter(|&d| d <= EXPANSION_LIMIT)
        .unwrap_or_else(|| panic!("Cooper period {delta} exceeds the oracle expansion limit"));

    let mut disjuncts = Vec::new();
    for j in 1..=delta_w {
        let s = GTerm::constant(BigInt::from(j));
        disjuncts.push(subst_formula(&minus_inf, v, &s));
    }
    for b in &lower_bounds {
        for j in 1..=delta_w {
            let s = b.add(&GTerm::constant(BigInt::from(j)));
            disjuncts.push(subst_formula(&full, v, &s));
        }
    }
    gor(disjuncts)
}

/// After unification, replace the `c·v` part of `u` (scaled by `m/|c|`)
/// with `sign(c)·v`.
fn rescale(u: &GTerm, v: &Var, c: &BigInt, m: &BigInt) -> GTerm {
    let f = m / c.abs();
    let scaled = u.scale(&f);
    let sign = if c.is_negative() {
        BigInt::from(-1)
    } else {
        BigInt::one()
    };
    let mut out = scaled.without(v);
    out.coeffs.insert(v.clone(), sign);
    out
}

enum Lit<'a> {
    Lt(&'a GTerm),
    Div(&'a BigInt, &'a GTerm),
    NDiv(&'a BigInt, &'a GTerm),
}

fn collect_literals(f: &GFormula, visit: &mut impl FnMut(Lit<'_>)) {
    match f {
        GFormula::True | GFormula::False => {}
        GFormula::Lt(u) => visit(Lit::Lt(u)),
        GFormula::Eq(u) => {
            // equalities are rewritten away by nnf before elimination; treat
            // a stray one as its two strict inequalities for collection
            visit(Lit::Lt(u));
            visit(Lit::Lt(u));
        }
        GFormula::Div(m, u) => visit(Lit::Div(m, u)),
        GFormula::NDiv(m, u) => visit(Lit::NDiv(m, u)),
        GFormula::Not(g) => collect_literals(g, visit),
        GFormula::And(gs) | GFormula::Or(gs) => {
            for g in gs {
                collect_literals(g, visit);
            }
        }
        other => unreachable!("literal scan on quantified ground formula: {other:?}"),
    }
}

fn map_literals(f: &GFormula, rewrite: &mut impl FnMut(Lit<'_>) -> GFormula) -> GFormula {
    match f {
        GFormula::True => GFormula::True,
        GFormula::False => GFormula::False,
        GFormula::Lt(u) => rewrite(Lit::Lt(u)),
        GFormula::Div(m, u) => rewrite(Lit::Div(m, u)),
        GFormula::NDiv(m, u) => rewrite(Lit::NDiv(m, u)),
        GFormula::And(gs) => gand(gs.iter().map(|g| map_literals(g, rewrite)).collect()),
        GFormula::Or(gs) => gor(gs.iter().map(|g| map_literals(g, rewrite)).collect()),
        other => unreachable!("literal rewrite on non-normalized formula: {other:?}"),
    }
}

/// Exact truth value of a ground formula under `env`, unbounded quantifiers
/// included.
pub fn classical_cooper_decide(f: &GFormula, env: &HashMap<Var, BigInt>) -> bool {
    let qf = cooper_eliminate(f);
    geval(&qf, env).expect("eliminated formula is quantifier-free over the given variables")
}

// ------------------------------------------------------ equivalence grid

/// Finite grid: parameter values `0..=t_max`, every free variable ranging
/// over `[-radius, radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub t_max: u64,
    pub radius: i64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            t_max: 12,
            radius: 15,
        }
    }
}

/// A failing grid point; re-evaluating both formulas here reproduces the
/// disagreement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub t: u64,
    pub assignment: BTreeMap<Var, BigInt>,
    pub lhs: bool,
    pub rhs: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Counterexample(Witness),
    /// Reserved for callers that cannot decide a side (not produced by
    /// [`check_equiv`] itself, whose oracle is total).
    Inconclusive { reason: String },
}

#[derive(Clone, Debug)]
pub struct EquivReport {
    pub verdict: Verdict,
    pub grid: Grid,
    /// Number of (t, assignment) points compared.
    pub points: u64,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }
}

/// One side of the comparison, prepared once per parameter value: formulas
/// with unbounded quantifiers go through Cooper elimination (symbolically,
/// free variables intact); bounded-only formulas are enumerated directly.
enum Decider {
    Eliminated(GFormula),
    Enumerate(GFormula),
}

impl Decider {
    fn new(f: &Formula, t: u64) -> Decider {
        let g = ground(f, t);
        if f.count_unbounded_quantifiers() > 0 {
            Decider::Eliminated(cooper_eliminate(&g))
        } else {
            Decider::Enumerate(g)
        }
    }

    fn decide(&self, env: &HashMap<Var, BigInt>) -> bool {
        let g = match self {
            Decider::Eliminated(g) | Decider::Enumerate(g) => g,
        };
        geval(g, env).expect("grid environment covers all free variables")
    }
}

/// Compares two formulas over every grid point, in parallel. The reported
/// counterexample, if any, is the one with the smallest `t`, then the
/// lexicographically least assignment (variables in sorted order).
pub fn check_equiv(lhs: &Formula, rhs: &Formula, grid: &Grid) -> EquivReport {
    let vars: Vec<Var> = {
        let mut s = lhs.free_vars();
        s.extend(rhs.free_vars());
        s.into_iter().collect()
    };
    let width = 2 * grid.radius + 1;
    let total: u64 = (width as u64).pow(vars.len() as u32);
    let mut points = 0u64;

    for t in 0..=grid.t_max {
        let da = Decider::new(lhs, t);
        let db = Decider::new(rhs, t);
        let hit = (0..total).into_par_iter().find_map_first(|idx| {
            let env = decode_point(idx, &vars, grid.radius);
            let a = da.decide(&env);
            let b = db.decide(&env);
            if a != b {
                Some(Witness {
                    t,
                    assignment: env.into_iter().collect(),
                    lhs: a,
                    rhs: b,
                })
            } else {
                None
            }
        });
        points += total;
        if let Some(w) = hit {
            return EquivReport {
                verdict: Verdict::Counterexample(w),
                grid: *grid,
                points,
            };
        }
    }
    EquivReport {
        verdict: Verdict::Pass,
        grid: *grid,
        points,
    }
}

/// Mixed-radix decoding of a grid index into an assignment, most
/// significant digit first so index order is lexicographic order.
fn decode_point(idx: u64, vars: &[Var], radius: i64) -> HashMap<Var, BigInt> {
    let width = (2 * radius + 1) as u64;
    let mut env = HashMap::with_capacity(vars.len());
    let mut rem = idx;
    for v in vars.iter().rev() {
        let digit = (rem % width) as i64 - radius;
        rem /= width;
        env.insert(v.clone(), BigInt::from(digit));
    }
    env
}
