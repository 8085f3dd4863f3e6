//! Formula representation: linear terms over `Z[t]`, atoms, and the formula
//! AST with both unbounded and bounded quantifiers.
//!
//! The parameter `t` is not a variable — it lives only inside polynomial
//! coefficients, and quantifying over it is not expressible.

use crate::poly::Poly;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU32, Ordering};

/// A variable. User-written variables have serial 0; variables minted by
/// [`FreshVars`] carry a positive serial and can never collide with them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub serial: u32,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Var {
        Var {
            name: name.into(),
            serial: 0,
        }
    }
}

impl std::fmt::Display for Var {
    /// Matches the concrete-syntax printer: user-written variables print
    /// bare, minted ones with their serial suffix.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.serial == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.serial)
        }
    }
}

/// Monotone fresh-variable source. Serials are never reused within one
/// pipeline run; safe to share across case branches built in parallel.
#[derive(Debug)]
pub struct FreshVars {
    next: AtomicU32,
}

impl FreshVars {
    pub fn new() -> FreshVars {
        FreshVars {
            next: AtomicU32::new(1),
        }
    }

    /// A generator whose serials are strictly above anything occurring in
    /// the given formulas, so re-entering the pipeline stays collision-free.
    pub fn above(formulas: &[&Formula]) -> FreshVars {
        let mut max = 0;
        for f in formulas {
            f.visit_vars(&mut |v| max = max.max(v.serial));
        }
        FreshVars {
            next: AtomicU32::new(max + 1),
        }
    }

    pub fn fresh(&self, hint: &str) -> Var {
        Var {
            name: hint.to_string(),
            serial: self.next.fetch_add(1, Ordering::Relaxed),
        }
    }
}

impl Default for FreshVars {
    fn default() -> Self {
        FreshVars::new()
    }
}

/// A linear term `Σᵢ pᵢ(t)·xᵢ + q(t)`.
///
/// Every syntactic term built from 0, 1, variables, `+`, `-` and scalar
/// multiplication normalizes to exactly one of these; variables with zero
/// coefficient are absent from the map.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    coeffs: BTreeMap<Var, Poly>,
    constant: Poly,
}

impl Term {
    pub fn zero() -> Term {
        Term {
            coeffs: BTreeMap::new(),
            constant: Poly::zero(),
        }
    }

    pub fn constant(p: impl Into<Poly>) -> Term {
        Term {
            coeffs: BTreeMap::new(),
            constant: p.into(),
        }
    }

    pub fn var(v: Var) -> Term {
        Term::zero().plus_var(v, Poly::one())
    }

    /// `self + p·v`.
    pub fn plus_var(mut self, v: Var, p: Poly) -> Term {
        if p.is_zero() {
            return self;
        }
        let slot = self.coeffs.entry(v.clone()).or_insert_with(Poly::zero);
        *slot = &*slot + &p;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
        self
    }

    pub fn add(&self, rhs: &Term) -> Term {
        let mut out = self.clone();
        for (v, p) in &rhs.coeffs {
            out = out.plus_var(v.clone(), p.clone());
        }
        out.constant = &out.constant + &rhs.constant;
        out
    }

    pub fn neg(&self) -> Term {
        Term {
            coeffs: self.coeffs.iter().map(|(v, p)| (v.clone(), -p)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn sub(&self, rhs: &Term) -> Term {
        self.add(&rhs.neg())
    }

    /// Scalar multiplication `f_p`: scales every coefficient and the constant.
    pub fn scale(&self, p: &Poly) -> Term {
        if p.is_zero() {
            return Term::zero();
        }
        Term {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * p)).collect(),
            constant: &self.constant * p,
        }
    }

    pub fn coeff(&self, v: &Var) -> Poly {
        self.coeffs.get(v).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn constant_part(&self) -> &Poly {
        &self.constant
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Var, &Poly)> {
        self.coeffs.iter()
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Splits off `v`: returns its coefficient and the `v`-free remainder.
    pub fn split_var(&self, v: &Var) -> (Poly, Term) {
        let mut rest = self.clone();
        let coeff = rest.coeffs.remove(v).unwrap_or_else(Poly::zero);
        (coeff, rest)
    }

    /// Capture-free at the term level: replaces `v` by `s`.
    pub fn subst(&self, v: &Var, s: &Term) -> Term {
        let (coeff, rest) = self.split_var(v);
        if coeff.is_zero() {
            return rest;
        }
        rest.add(&s.scale(&coeff))
    }

    fn rename(&self, map: &HashMap<Var, Var>) -> Term {
        let mut out = Term::constant(self.constant.clone());
        for (v, p) in &self.coeffs {
            let v2 = map.get(v).unwrap_or(v).clone();
            out = out.plus_var(v2, p.clone());
        }
        out
    }

    pub fn eval(&self, t: &BigInt, env: &HashMap<Var, BigInt>) -> Result<BigInt, EvalError> {
        let mut acc = self.constant.eval_big(t);
        for (v, p) in &self.coeffs {
            let val = env
                .get(v)
                .ok_or_else(|| EvalError::MissingBinding(v.name.clone()))?;
            acc += p.eval_big(t) * val;
        }
        Ok(acc)
    }
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (v, p) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({p})·{}#{}", v.name, v.serial)?;
            first = false;
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "{}", self.constant)
    }
}

/// Atomic formulas, stored one-sided: `Lt(s)` means `s < 0`, `Eq(s)` means
/// `s = 0`. The printer reconstructs a two-sided rendering.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Lt(Term),
    Eq(Term),
    /// `Div(m, s)`: `m(t)` divides the value of `s`. A modulus evaluating
    /// to 0 makes the atom false.
    Div(Poly, Term),
}

impl Atom {
    /// `lhs < rhs`.
    pub fn lt(lhs: Term, rhs: Term) -> Atom {
        Atom::Lt(lhs.sub(&rhs))
    }

    /// `lhs <= rhs`, i.e. `lhs < rhs + 1`.
    pub fn le(lhs: Term, rhs: Term) -> Atom {
        Atom::Lt(lhs.sub(&rhs).sub(&Term::constant(Poly::one())))
    }

    /// `lhs = rhs`.
    pub fn eq(lhs: Term, rhs: Term) -> Atom {
        Atom::Eq(lhs.sub(&rhs))
    }

    pub fn subst(&self, v: &Var, s: &Term) -> Atom {
        match self {
            Atom::Lt(u) => Atom::Lt(u.subst(v, s)),
            Atom::Eq(u) => Atom::Eq(u.subst(v, s)),
            Atom::Div(m, u) => Atom::Div(m.clone(), u.subst(v, s)),
        }
    }

    pub fn term(&self) -> &Term {
        match self {
            Atom::Lt(u) | Atom::Eq(u) | Atom::Div(_, u) => u,
        }
    }

    pub fn eval(&self, t: &BigInt, env: &HashMap<Var, BigInt>) -> Result<bool, EvalError> {
        match self {
            Atom::Lt(u) => Ok(u.eval(t, env)?.is_negative()),
            Atom::Eq(u) => Ok(u.eval(t, env)?.is_zero()),
            Atom::Div(m, u) => {
                let m = m.eval_big(t);
                if m.is_zero() {
                    return Ok(false);
                }
                Ok((u.eval(t, env)? % m).is_zero())
            }
        }
    }
}

/// First-order formulas over the atoms. `And`/`Or` are n-ary so that wide
/// case-split output stays flat. `BExists(v, b, φ)` abbreviates
/// `∃v (0 ≤ v ≤ b(t) ∧ φ)`; `BForall` is its dual. A bound that evaluates
/// below 0 gives an empty range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    BExists(Var, Poly, Box<Formula>),
    BForall(Var, Poly, Box<Formula>),
}

/// Errors from the finite-enumeration evaluator.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("formula contains an unbounded quantifier; decide it with the ground oracle instead")]
    UnboundedQuantifier,
    #[error("no value bound for variable `{0}`")]
    MissingBinding(String),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    /// Wraps an atom as a formula, deciding it immediately when it involves
    /// neither variables nor the parameter (so `0 = 0` becomes `True`).
    /// Divisibility by an identically-zero modulus is false for every `t`,
    /// and by a constant ±1 true, whatever the argument.
    pub fn atom_folded(a: Atom) -> Formula {
        let ground = |u: &Term| -> Option<BigInt> {
            if u.is_constant() {
                u.constant_part().as_constant()
            } else {
                None
            }
        };
        let decided = match &a {
            Atom::Lt(u) => ground(u).map(|c| c.is_negative()),
            Atom::Eq(u) => ground(u).map(|c| c.is_zero()),
            Atom::Div(m, u) => {
                if m.is_zero() {
                    Some(false)
                } else if m.as_constant().is_some_and(|c| c.abs().is_one()) {
                    Some(true)
                } else {
                    match (m.as_constant(), ground(u)) {
                        (Some(m), Some(c)) => Some(!m.is_zero() && (c % m).is_zero()),
                        _ => None,
                    }
                }
            }
        };
        match decided {
            Some(true) => Formula::True,
            Some(false) => Formula::False,
            None => Formula::Atom(a),
        }
    }

    /// Conjunction with flattening and constant folding; empty is `True`.
    pub fn and(items: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(items.len());
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with flattening and constant folding; empty is `False`.
    pub fn or(items: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(items.len());
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)] // constructor, not an operator on `self`
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn bexists(v: Var, bound: Poly, body: Formula) -> Formula {
        Formula::BExists(v, bound, Box::new(body))
    }

    pub fn bforall(v: Var, bound: Poly, body: Formula) -> Formula {
        Formula::BForall(v, bound, Box::new(body))
    }

    /// Visits every variable occurrence, bound or free, binders included.
    pub fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for (v, _) in a.term().coeffs() {
                    f(v);
                }
            }
            Formula::Not(g) => g.visit_vars(f),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.visit_vars(f);
                }
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                f(v);
                g.visit_vars(f);
            }
            Formula::BExists(v, _, g) | Formula::BForall(v, _, g) => {
                f(v);
                g.visit_vars(f);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn walk(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    for (v, _) in a.term().coeffs() {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(gs) | Formula::Or(gs) => {
                    for g in gs {
                        walk(g, bound, out);
                    }
                }
                Formula::Exists(v, g)
                | Formula::Forall(v, g)
                | Formula::BExists(v, _, g)
                | Formula::BForall(v, _, g) => {
                    bound.push(v.clone());
                    walk(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn count_unbounded_quantifiers(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(g) => g.count_unbounded_quantifiers(),
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().map(Formula::count_unbounded_quantifiers).sum()
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => {
                1 + g.count_unbounded_quantifiers()
            }
            Formula::BExists(_, _, g) | Formula::BForall(_, _, g) => {
                g.count_unbounded_quantifiers()
            }
        }
    }

    /// Counts quantifiers of every kind, bounded included.
    pub fn count_quantifiers(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(g) => g.count_quantifiers(),
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().map(Formula::count_quantifiers).sum()
            }
            Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::BExists(_, _, g)
            | Formula::BForall(_, _, g) => 1 + g.count_quantifiers(),
        }
    }

    /// Number of AST nodes; the size statistic reported by the CLI.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(g) => 1 + g.size(),
            Formula::And(gs) | Formula::Or(gs) => {
                1 + gs.iter().map(Formula::size).sum::<usize>()
            }
            Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::BExists(_, _, g)
            | Formula::BForall(_, _, g) => 1 + g.size(),
        }
    }

    /// Capture-avoiding substitution of `s` for free occurrences of `v`.
    /// Binders that would capture a variable of `s` are renamed first.
    pub fn substitute(&self, v: &Var, s: &Term, fresh: &FreshVars) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.subst(v, s)),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(v, s, fresh))),
            Formula::And(gs) => {
                Formula::And(gs.iter().map(|g| g.substitute(v, s, fresh)).collect())
            }
            Formula::Or(gs) => {
                Formula::Or(gs.iter().map(|g| g.substitute(v, s, fresh)).collect())
            }
            Formula::Exists(w, g) => {
                let (w, g) = subst_under_binder(w, g, v, s, fresh);
                Formula::Exists(w, Box::new(g))
            }
            Formula::Forall(w, g) => {
                let (w, g) = subst_under_binder(w, g, v, s, fresh);
                Formula::Forall(w, Box::new(g))
            }
            Formula::BExists(w, b, g) => {
                let (w, g) = subst_under_binder(w, g, v, s, fresh);
                Formula::BExists(w, b.clone(), Box::new(g))
            }
            Formula::BForall(w, b, g) => {
                let (w, g) = subst_under_binder(w, g, v, s, fresh);
                Formula::BForall(w, b.clone(), Box::new(g))
            }
        }
    }

    /// Alpha-renames every bound variable to a fresh one, so that bound
    /// variables are pairwise distinct and disjoint from all free variables.
    /// Pipeline stages assume this has run.
    pub fn refresh_bound(&self, fresh: &FreshVars) -> Formula {
        fn walk(f: &Formula, map: &mut HashMap<Var, Var>, fresh: &FreshVars) -> Formula {
            let under = |v: &Var, g: &Formula, map: &mut HashMap<Var, Var>, fresh: &FreshVars| {
                let v2 = fresh.fresh(&v.name);
                let old = map.insert(v.clone(), v2.clone());
                let g2 = walk(g, map, fresh);
                match old {
                    Some(prev) => map.insert(v.clone(), prev),
                    None => map.remove(v),
                };
                (v2, g2)
            };
            match f {
                Formula::True | Formula::False => f.clone(),
                Formula::Atom(a) => {
                    let rename = |u: &Term| u.rename(map);
                    Formula::Atom(match a {
                        Atom::Lt(u) => Atom::Lt(rename(u)),
                        Atom::Eq(u) => Atom::Eq(rename(u)),
                        Atom::Div(m, u) => Atom::Div(m.clone(), rename(u)),
                    })
                }
                Formula::Not(g) => Formula::Not(Box::new(walk(g, map, fresh))),
                Formula::And(gs) => {
                    Formula::And(gs.iter().map(|g| walk(g, map, fresh)).collect())
                }
                Formula::Or(gs) => {
                    Formula::Or(gs.iter().map(|g| walk(g, map, fresh)).collect())
                }
                Formula::Exists(v, g) => {
                    let (v2, g2) = under(v, g, map, fresh);
                    Formula::Exists(v2, Box::new(g2))
                }
                Formula::Forall(v, g) => {
                    let (v2, g2) = under(v, g, map, fresh);
                    Formula::Forall(v2, Box::new(g2))
                }
                Formula::BExists(v, b, g) => {
                    let (v2, g2) = under(v, g, map, fresh);
                    Formula::BExists(v2, b.clone(), Box::new(g2))
                }
                Formula::BForall(v, b, g) => {
                    let (v2, g2) = under(v, g, map, fresh);
                    Formula::BForall(v2, b.clone(), Box::new(g2))
                }
            }
        }
        walk(self, &mut HashMap::new(), fresh)
    }

    /// Truth of the formula at parameter value `t` under `env`, by finite
    /// enumeration of bounded-quantifier ranges. Unbounded quantifiers are
    /// an error — they have no finite semantics here.
    pub fn evaluate(&self, t: u64, env: &HashMap<Var, BigInt>) -> Result<bool, EvalError> {
        let mut env = env.clone();
        self.eval_rec(&BigInt::from(t), &mut env)
    }

    fn eval_rec(&self, t: &BigInt, env: &mut HashMap<Var, BigInt>) -> Result<bool, EvalError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(a) => a.eval(t, env),
            Formula::Not(g) => Ok(!g.eval_rec(t, env)?),
            Formula::And(gs) => {
                for g in gs {
                    if !g.eval_rec(t, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(gs) => {
                for g in gs {
                    if g.eval_rec(t, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Exists(..) | Formula::Forall(..) => Err(EvalError::UnboundedQuantifier),
            Formula::BExists(v, bound, g) => {
                let ub = bound.eval_big(t);
                let mut z = BigInt::zero();
                let saved = env.remove(v);
                let mut result = false;
                while z <= ub {
                    env.insert(v.clone(), z.clone());
                    if g.eval_rec(t, env)? {
                        result = true;
                        break;
                    }
                    z += 1;
                }
                restore(env, v, saved);
                Ok(result)
            }
            Formula::BForall(v, bound, g) => {
                let ub = bound.eval_big(t);
                let mut z = BigInt::zero();
                let saved = env.remove(v);
                let mut result = true;
                while z <= ub {
                    env.insert(v.clone(), z.clone());
                    if !g.eval_rec(t, env)? {
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

    /// Structural equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn term_eq(a: &Term, b: &Term, ma: &HashMap<Var, u32>, mb: &HashMap<Var, u32>) -> bool {
            if a.constant_part() != b.constant_part() {
                return false;
            }
            // Key each variable by its binder index if bound, name otherwise.
            let key = |v: &Var, m: &HashMap<Var, u32>| -> (Option<u32>, Option<Var>) {
                match m.get(v) {
                    Some(i) => (Some(*i), None),
                    None => (None, Some(v.clone())),
                }
            };
            let ka: BTreeMap<_, _> = a.coeffs().map(|(v, p)| (key(v, ma), p.clone())).collect();
            let kb: BTreeMap<_, _> = b.coeffs().map(|(v, p)| (key(v, mb), p.clone())).collect();
            ka == kb
        }
        fn walk(
            a: &Formula,
            b: &Formula,
            ma: &mut HashMap<Var, u32>,
            mb: &mut HashMap<Var, u32>,
            depth: u32,
        ) -> bool {
            let under = |va: &Var,
                         vb: &Var,
                         ga: &Formula,
                         gb: &Formula,
                         ma: &mut HashMap<Var, u32>,
                         mb: &mut HashMap<Var, u32>| {
                let olda = ma.insert(va.clone(), depth);
                let oldb = mb.insert(vb.clone(), depth);
                let r = walk(ga, gb, ma, mb, depth + 1);
                restore(ma, va, olda);
                restore(mb, vb, oldb);
                r
            };
            match (a, b) {
                (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
                (Formula::Atom(Atom::Lt(u)), Formula::Atom(Atom::Lt(w)))
                | (Formula::Atom(Atom::Eq(u)), Formula::Atom(Atom::Eq(w))) => {
                    term_eq(u, w, ma, mb)
                }
                (Formula::Atom(Atom::Div(m, u)), Formula::Atom(Atom::Div(n, w))) => {
                    m == n && term_eq(u, w, ma, mb)
                }
                (Formula::Not(ga), Formula::Not(gb)) => walk(ga, gb, ma, mb, depth),
                (Formula::And(gas), Formula::And(gbs)) | (Formula::Or(gas), Formula::Or(gbs)) => {
                    gas.len() == gbs.len()
                        && gas
                            .iter()
                            .zip(gbs)
                            .all(|(ga, gb)| walk(ga, gb, ma, mb, depth))
                }
                (Formula::Exists(va, ga), Formula::Exists(vb, gb))
                | (Formula::Forall(va, ga), Formula::Forall(vb, gb)) => {
                    under(va, vb, ga, gb, ma, mb)
                }
                (Formula::BExists(va, pa, ga), Formula::BExists(vb, pb, gb))
                | (Formula::BForall(va, pa, ga), Formula::BForall(vb, pb, gb)) => {
                    pa == pb && under(va, vb, ga, gb, ma, mb)
                }
                _ => false,
            }
        }
        walk(
            self,
            other,
            &mut HashMap::new(),
            &mut HashMap::new(),
            0,
        )
    }
}

fn restore<K: std::hash::Hash + Eq + Clone, V>(map: &mut HashMap<K, V>, k: &K, old: Option<V>) {
    match old {
        Some(v) => {
            map.insert(k.clone(), v);
        }
        None => {
            map.remove(k);
        }
    }
}

fn subst_under_binder(
    w: &Var,
    body: &Formula,
    v: &Var,
    s: &Term,
    fresh: &FreshVars,
) -> (Var, Formula) {
    if w == v {
        // Shadowed: no free occurrences of v below.
        return (w.clone(), body.clone());
    }
    if s.contains(w) {
        // The binder would capture a variable of s; rename it first.
        let w2 = fresh.fresh(&w.name);
        let body2 = body.substitute(w, &Term::var(w2.clone()), fresh);
        (w2, body2.substitute(v, s, fresh))
    } else {
        (w.clone(), body.substitute(v, s, fresh))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Var {
        Var::new(name)
    }

    fn tv(name: &str) -> Term {
        Term::var(v(name))
    }

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    fn env(pairs: &[(&str, i64)]) -> HashMap<Var, BigInt> {
        pairs
            .iter()
            .map(|(n, k)| (v(n), BigInt::from(*k)))
            .collect()
    }

    #[test]
    fn term_building_folds_scalars() {
        // f_t(x) + f_t(x) has coefficient 2t on x
        let s = tv("x").scale(&p("t")).add(&tv("x").scale(&p("t")));
        assert_eq!(s.coeff(&v("x")), p("2t"));
        // f_t(f_t(x)) folds to t^2
        let s = tv("x").scale(&p("t")).scale(&p("t"));
        assert_eq!(s.coeff(&v("x")), p("t^2"));
        // f_{2t+1}(1) - 1 = 2t
        let s = Term::constant(p("2t + 1")).sub(&Term::constant(p("1")));
        assert!(s.is_constant());
        assert_eq!(*s.constant_part(), p("2t"));
    }

    #[test]
    fn substitution_examples() {
        let fresh = FreshVars::new();
        // (y < x)[y := x+1] normalizes to 1 < 0
        let f = Formula::Atom(Atom::lt(tv("y"), tv("x")));
        let s = tv("x").add(&Term::constant(p("1")));
        let g = f.substitute(&v("y"), &s, &fresh);
        assert_eq!(
            g,
            Formula::Atom(Atom::Lt(Term::constant(p("1"))))
        );

        // D_t(y+3)[y := 2x] = D_t(2x+3)
        let f = Formula::Atom(Atom::Div(
            p("t"),
            tv("y").add(&Term::constant(p("3"))),
        ));
        let g = f.substitute(&v("y"), &tv("x").scale(&p("2")), &fresh);
        let want = Formula::Atom(Atom::Div(
            p("t"),
            tv("x").scale(&p("2")).add(&Term::constant(p("3"))),
        ));
        assert_eq!(g, want);
    }

    #[test]
    fn substitution_avoids_capture() {
        let fresh = FreshVars::new();
        // BExists(z, t, z < y)[y := z+1]: binder z must be renamed
        let f = Formula::bexists(v("z"), p("t"), Formula::Atom(Atom::lt(tv("z"), tv("y"))));
        let s = tv("z").add(&Term::constant(p("1")));
        let g = f.substitute(&v("y"), &s, &fresh);
        match &g {
            Formula::BExists(z2, bound, body) => {
                assert_ne!(*z2, v("z"));
                assert_eq!(*bound, p("t"));
                // body: z2 < z + 1, i.e. z2 - z - 1 < 0
                let want = Formula::Atom(Atom::lt(
                    Term::var(z2.clone()),
                    tv("z").add(&Term::constant(p("1"))),
                ));
                assert_eq!(**body, want);
            }
            other => panic!("expected BExists, got {other:?}"),
        }
        // And the original is alpha-equivalent to its own substitution identity.
        let id = f.substitute(&v("y"), &tv("y"), &fresh);
        assert!(id.alpha_eq(&f));
    }

    #[test]
    fn evaluate_examples() {
        // D_t(x) at t=0 is false regardless of x
        let f = Formula::Atom(Atom::Div(p("t"), tv("x")));
        assert_eq!(f.evaluate(0, &env(&[("x", 7)])), Ok(false));
        assert_eq!(f.evaluate(7, &env(&[("x", 14)])), Ok(true));

        // f_t(x) <= f_{t^2}(1) at t=3, x=2: 6 <= 9
        let f = Formula::Atom(Atom::le(tv("x").scale(&p("t")), Term::constant(p("t^2"))));
        assert_eq!(f.evaluate(3, &env(&[("x", 2)])), Ok(true));

        // bounded range empty when the bound is negative
        let f = Formula::bexists(v("z"), p("t - 2"), Formula::True);
        assert_eq!(f.evaluate(1, &env(&[])), Ok(false));
        assert_eq!(f.evaluate(2, &env(&[])), Ok(true));

        // dual: BForall over an empty range is vacuously true
        let f = Formula::bforall(v("z"), p("t - 2"), Formula::False);
        assert_eq!(f.evaluate(1, &env(&[])), Ok(true));

        // unbounded quantifiers are rejected
        let f = Formula::exists(v("y"), Formula::True);
        assert_eq!(f.evaluate(0, &env(&[])), Err(EvalError::UnboundedQuantifier));

        // missing binding is reported
        let f = Formula::Atom(Atom::lt(tv("x"), tv("w")));
        assert_eq!(
            f.evaluate(0, &env(&[("x", 1)])),
            Err(EvalError::MissingBinding("w".into()))
        );
    }

    #[test]
    fn quantifier_counting() {
        let bounded = Formula::bexists(v("z"), p("t"), Formula::Atom(Atom::lt(tv("z"), tv("x"))));
        assert_eq!(bounded.count_unbounded_quantifiers(), 0);
        assert_eq!(bounded.count_quantifiers(), 1);

        let f = Formula::exists(v("y"), Formula::Atom(Atom::lt(tv("y"), tv("x"))));
        assert_eq!(f.count_unbounded_quantifiers(), 1);

        let f = Formula::forall(
            v("y"),
            Formula::exists(v("z"), Formula::Atom(Atom::lt(tv("z"), tv("y")))),
        );
        assert_eq!(f.count_unbounded_quantifiers(), 2);
    }

    #[test]
    fn smart_constructors_fold() {
        let a = Formula::Atom(Atom::Lt(tv("x")));
        assert_eq!(Formula::and(vec![Formula::True, a.clone()]), a);
        assert_eq!(Formula::and(vec![]), Formula::True);
        assert_eq!(Formula::or(vec![]), Formula::False);
        assert_eq!(
            Formula::and(vec![a.clone(), Formula::False]),
            Formula::False
        );
        assert_eq!(Formula::not(Formula::not(a.clone())), a);
        // nested same-op flattening
        let b = Formula::Atom(Atom::Eq(tv("x")));
        let nested = Formula::and(vec![
            Formula::and(vec![a.clone(), b.clone()]),
            a.clone(),
        ]);
        assert_eq!(nested, Formula::And(vec![a.clone(), b.clone(), a.clone()]));
    }

    #[test]
    fn refresh_bound_separates_binders() {
        let fresh = FreshVars::new();
        // E y. (Eb y <= t. y < x) /\ y < x — inner y shadows outer
        let inner = Formula::bexists(v("y"), p("t"), Formula::Atom(Atom::lt(tv("y"), tv("x"))));
        let f = Formula::exists(
            v("y"),
            Formula::and(vec![inner, Formula::Atom(Atom::lt(tv("y"), tv("x")))]),
        );
        let g = f.refresh_bound(&fresh);
        assert!(g.alpha_eq(&f));
        // all binders now distinct, and none equals the free var x
        let mut binders = Vec::new();
        fn collect(f: &Formula, out: &mut Vec<Var>) {
            match f {
                Formula::Exists(v, g)
                | Formula::Forall(v, g)
                | Formula::BExists(v, _, g)
                | Formula::BForall(v, _, g) => {
                    out.push(v.clone());
                    collect(g, out);
                }
                Formula::Not(g) => collect(g, out),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect(g, out)),
                _ => {}
            }
        }
        collect(&g, &mut binders);
        assert_eq!(binders.len(), 2);
        assert_ne!(binders[0], binders[1]);
        assert!(binders.iter().all(|b| b.serial > 0));
    }

    #[test]
    fn alpha_eq_distinguishes_structure() {
        let f = Formula::exists(v("y"), Formula::Atom(Atom::lt(tv("y"), tv("x"))));
        let g = Formula::exists(v("w"), Formula::Atom(Atom::lt(tv("w"), tv("x"))));
        assert!(f.alpha_eq(&g));
        // different free variable: not alpha-equivalent
        let h = Formula::exists(v("w"), Formula::Atom(Atom::lt(tv("w"), tv("z"))));
        assert!(!f.alpha_eq(&h));
        // bound/free mixup: E w. w < x vs E w. x < w
        let k = Formula::exists(v("w"), Formula::Atom(Atom::lt(tv("x"), tv("w"))));
        assert!(!f.alpha_eq(&k));
    }

    #[test]
    fn de_morgan_on_grid() {
        let a = Formula::Atom(Atom::lt(tv("x"), Term::constant(p("t"))));
        let b = Formula::Atom(Atom::Div(p("2"), tv("x")));
        let lhs = Formula::not(Formula::and(vec![a.clone(), b.clone()]));
        let rhs = Formula::or(vec![Formula::not(a), Formula::not(b)]);
        for t in 0..5 {
            for x in -6..=6 {
                let e = env(&[("x", x)]);
                assert_eq!(lhs.evaluate(t, &e), rhs.evaluate(t, &e));
            }
        }
    }
}
