//! Shared fixtures for the integration suites: the pseudo-random formula
//! generator, the envelope check that keeps generated formulas inside the
//! advertised shape, corpus loading, and the `.expect` sidecar parser.
//!
//! Each integration target compiles its own copy, so items a given target
//! does not touch would otherwise trip dead-code lints.
#![allow(dead_code)]

use ppres::ast::{Atom, Formula, Term, Var};
use ppres::poly::Poly;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

/// Shape limits for generated formulas: at most 3 distinct variables, at
/// most 3 quantifiers with at least one unbounded, coefficient polynomials
/// of degree ≤ 2 with coefficient magnitude ≤ 5, and divisibility moduli
/// drawn from a fixed menu.
pub const MAX_VARS: usize = 3;
pub const MAX_QUANTIFIERS: usize = 3;
pub const MAX_COEFF_DEGREE: usize = 2;
pub const MAX_COEFF_MAGNITUDE: i64 = 5;

pub fn allowed_moduli() -> Vec<Poly> {
    vec![
        Poly::constant(2),
        Poly::constant(3),
        Poly::t(),
        &Poly::t() - &Poly::constant(2),
        &Poly::t() + &Poly::constant(1),
    ]
}

fn v(name: &str) -> Var {
    Var { name: name.into(), serial: 0 }
}

/// Deterministic corpus of `n` formulas within the envelope. The same seed
/// always yields the same formulas. Draws that land outside the envelope
/// (combined offsets can overshoot the coefficient cap) are redrawn.
pub fn generate_corpus(seed: u64, n: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0u32;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 10_000, "generator cannot satisfy its envelope");
        let f = generate_one(&mut rng);
        if check_envelope(&f).is_ok() {
            out.push(f);
        }
    }
    out
}

/// A small nonzero coefficient: usually a constant, occasionally linear in
/// t when `parametric` allows it.
fn coeff(rng: &mut ChaCha8Rng, parametric: bool) -> Poly {
    if parametric && rng.gen_bool(0.3) {
        match rng.gen_range(0..3) {
            0 => Poly::t(),
            1 => &Poly::t() + &Poly::constant(1),
            _ => &Poly::t() - &Poly::constant(2),
        }
    } else {
        let c = *[1i64, 1, 2, 2, 3, -1, -2].choose(rng).unwrap();
        Poly::constant(c)
    }
}

/// Additive constant for atoms; degree ≤ 2 with small coefficients, biased
/// towards plain integers.
fn offset(rng: &mut ChaCha8Rng) -> Poly {
    match rng.gen_range(0..6) {
        0 => Poly::zero(),
        1 | 2 => Poly::constant(rng.gen_range(-5..=5)),
        3 => Poly::from_coeffs([rng.gen_range(-5..=5), rng.gen_range(-3..=3i64)]),
        _ => Poly::from_coeffs([
            rng.gen_range(-5..=5),
            rng.gen_range(-2..=2),
            rng.gen_range(0..=2i64),
        ]),
    }
}

/// Range bound for a bounded quantifier: small, so enumeration stays cheap.
fn range_bound(rng: &mut ChaCha8Rng) -> Poly {
    match rng.gen_range(0..4) {
        0 => Poly::constant(rng.gen_range(1..=4)),
        1 => Poly::t(),
        2 => &Poly::t() + &Poly::constant(1),
        _ => &Poly::t() - &Poly::constant(1),
    }
}

/// One comparison or divisibility literal over `target` (the innermost
/// quantified variable, always present) and `others`.
fn literal(
    rng: &mut ChaCha8Rng,
    target: &Var,
    others: &[Var],
    parametric: bool,
    allow_div: bool,
) -> Formula {
    let mut side = Term::constant(offset(rng));
    // Distinct variables per pick so coefficients never stack past the cap.
    let mut idxs: Vec<usize> = (0..others.len()).collect();
    idxs.shuffle(rng);
    let picks = if others.is_empty() {
        0
    } else if others.len() > 1 && rng.gen_bool(0.25) {
        2
    } else if rng.gen_bool(0.85) {
        1
    } else {
        0
    };
    for &i in idxs.iter().take(picks) {
        side = side.add(&Term::var(others[i].clone()).scale(&coeff(rng, true)));
    }
    let lhs = Term::var(target.clone()).scale(&coeff(rng, parametric));
    if allow_div && rng.gen_bool(0.35) {
        let moduli = allowed_moduli();
        // Parametric moduli multiply the elimination period; keep them to
        // the single-quantifier shapes where the cost stays flat.
        let m = if parametric {
            moduli.choose(rng).unwrap().clone()
        } else {
            moduli[rng.gen_range(0..2)].clone()
        };
        let atom = Formula::atom_folded(Atom::Div(m, lhs.add(&side)));
        return if rng.gen_bool(0.25) { Formula::not(atom) } else { atom };
    }
    match rng.gen_range(0..5) {
        0 => Formula::atom_folded(Atom::lt(lhs, side)),
        1 => Formula::atom_folded(Atom::lt(side, lhs)),
        2 => Formula::atom_folded(Atom::le(lhs, side)),
        3 => Formula::atom_folded(Atom::le(side, lhs)),
        _ => {
            let atom = Formula::atom_folded(Atom::eq(lhs, side));
            if rng.gen_bool(0.3) {
                Formula::not(atom)
            } else {
                atom
            }
        }
    }
}

/// Conjunction/disjunction of 2–3 literals mentioning `target`.
fn matrix(
    rng: &mut ChaCha8Rng,
    target: &Var,
    others: &[Var],
    parametric: bool,
    allow_div: bool,
) -> Formula {
    let n = rng.gen_range(2..=3);
    let lits: Vec<Formula> = (0..n)
        .map(|_| literal(rng, target, others, parametric, allow_div))
        .collect();
    if rng.gen_bool(0.6) {
        Formula::and(lits)
    } else {
        let mut lits = lits;
        let extra = literal(rng, target, others, parametric, allow_div);
        lits.push(extra);
        Formula::or(lits)
    }
}

fn generate_one(rng: &mut ChaCha8Rng) -> Formula {
    let free_pool = [v("x"), v("z")];
    let bound_pool = [v("y"), v("w"), v("u")];
    // Shape classes, weighted towards the cheap single-quantifier case.
    let shape = rng.gen_range(0..100);
    let (n_unbounded, n_bounded) = match shape {
        0..=54 => (1, 0),
        55..=79 => (1, 1),
        80..=89 => (2, 0),
        _ => (1, 2),
    };
    let n_free = match MAX_VARS - (n_unbounded + n_bounded) {
        0 => 0,
        1 => 1,
        _ => rng.gen_range(1..=2),
    };
    let free: Vec<Var> = free_pool[..n_free].to_vec();
    // Parametric coefficients on the quantified variable multiply the
    // elimination period, so reserve them for single-quantifier formulas.
    let heavy = n_unbounded + n_bounded == 1;

    // Build innermost-out: each quantifier's matrix may mention every
    // variable bound further out plus the free ones.
    let mut binders: Vec<(bool, Var)> = Vec::new();
    for (i, var) in bound_pool.iter().take(n_unbounded + n_bounded).enumerate() {
        let unbounded = i >= n_bounded; // bounded quantifiers innermost
        binders.push((unbounded, var.clone()));
    }
    let mut scope: Vec<Var> = free.clone();
    for (_, var) in binders.iter().rev() {
        scope.push(var.clone());
    }

    let (_, innermost) = &binders[0];
    scope.retain(|u| u != innermost);
    let mut body = matrix(rng, innermost, &scope, heavy, true);
    let mut allow_div = heavy;
    for (i, (unbounded, var)) in binders.iter().enumerate() {
        if i > 0 {
            scope.retain(|u| u != var);
            // Outer quantifiers get a light side constraint of their own so
            // every quantified variable matters.
            let side = literal(rng, var, &scope, false, allow_div);
            allow_div = false;
            body = if rng.gen_bool(0.7) {
                Formula::and(vec![body, side])
            } else {
                Formula::or(vec![body, side])
            };
        }
        body = if *unbounded {
            if rng.gen_bool(0.75) {
                Formula::exists(var.clone(), body)
            } else {
                Formula::forall(var.clone(), body)
            }
        } else {
            let b = range_bound(rng);
            if rng.gen_bool(0.6) {
                Formula::bexists(var.clone(), b, body)
            } else {
                Formula::bforall(var.clone(), b, body)
            }
        };
    }
    body
}

/// Verifies a formula sits inside the generator envelope; returns a
/// description of the first violation otherwise.
pub fn check_envelope(f: &Formula) -> Result<(), String> {
    let mut vars = BTreeSet::new();
    f.visit_vars(&mut |u| {
        vars.insert(u.clone());
    });
    if vars.len() > MAX_VARS {
        return Err(format!("{} variables", vars.len()));
    }
    if f.count_quantifiers() > MAX_QUANTIFIERS {
        return Err(format!("{} quantifiers", f.count_quantifiers()));
    }
    if f.count_unbounded_quantifiers() == 0 {
        return Err("no unbounded quantifier".into());
    }
    fn poly_ok(p: &Poly) -> bool {
        p.degree().is_none_or(|d| d <= MAX_COEFF_DEGREE)
            && (0..=p.degree().unwrap_or(0)).all(|k| {
                i64::try_from(p.coeff(k))
                    .is_ok_and(|c| c.abs() <= MAX_COEFF_MAGNITUDE)
            })
    }
    fn term_ok(u: &Term) -> bool {
        u.coeffs().all(|(_, p)| poly_ok(p)) && poly_ok(u.constant_part())
    }
    fn walk(f: &Formula, moduli: &[Poly]) -> Result<(), String> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(a) => match a {
                Atom::Lt(u) | Atom::Eq(u) => {
                    if term_ok(u) {
                        Ok(())
                    } else {
                        Err(format!("coefficient out of envelope in {f}"))
                    }
                }
                Atom::Div(m, u) => {
                    if !moduli.contains(m) {
                        Err(format!("modulus {m} not in the menu"))
                    } else if !term_ok(u) {
                        Err(format!("coefficient out of envelope in {f}"))
                    } else {
                        Ok(())
                    }
                }
            },
            Formula::Not(g) => walk(g, moduli),
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().try_for_each(|g| walk(g, moduli))
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, moduli),
            Formula::BExists(_, b, g) | Formula::BForall(_, b, g) => {
                if !poly_ok(b) {
                    return Err(format!("range bound {b} out of envelope"));
                }
                walk(g, moduli)
            }
        }
    }
    walk(f, &allowed_moduli())
}

/// Path to the shared corpus directory at the workspace root.
pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// All corpus formulas as (file stem, source, parsed formula), sorted by
/// name for deterministic iteration.
pub fn load_corpus() -> Vec<(String, String, Formula)> {
    let mut out = Vec::new();
    let dir = corpus_dir();
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("corpus dir {}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "pp"))
        .collect();
    paths.sort();
    for path in paths {
        let src = fs::read_to_string(&path).unwrap();
        let formula = ppres::parser::parse(&src)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        out.push((stem, src, formula));
    }
    out
}

/// One expectation from a `.expect` sidecar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// `unbounded = N` — number of unbounded quantifiers in the source.
    Unbounded(usize),
    /// `qfree = eligible|ineligible` — full-elimination eligibility.
    Qfree(bool),
    /// `eval t=T x=3 z=-1 -> true` — truth at one point.
    Eval { t: u64, env: Vec<(String, i64)>, want: bool },
    /// `count box LO HI from T0 to T1 -> c0,c1,...` — family counts.
    Count { lo: Poly, hi: Poly, t_lo: u64, t_hi: u64, want: Vec<u64> },
}

/// Parses the sidecar format: one expectation per line, `#` comments.
pub fn parse_sidecar(text: &str) -> Vec<Expectation> {
    fn fail(idx: usize, raw: &str, msg: &str) -> ! {
        panic!("sidecar line {}: {msg}: {raw}", idx + 1)
    }
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "unbounded" => {
                if words.len() != 3 || words[1] != "=" {
                    fail(idx, raw, "expected `unbounded = N`");
                }
                out.push(Expectation::Unbounded(words[2].parse().unwrap()));
            }
            "qfree" => {
                if words.len() != 3 || words[1] != "=" {
                    fail(idx, raw, "expected `qfree = eligible|ineligible`");
                }
                out.push(Expectation::Qfree(match words[2] {
                    "eligible" => true,
                    "ineligible" => false,
                    _ => fail(idx, raw, "expected eligible or ineligible"),
                }));
            }
            "eval" => {
                let Some((bindings, want)) = line[4..].trim().split_once("->") else {
                    fail(idx, raw, "expected `eval bindings -> bool`");
                };
                let want = match want.trim() {
                    "true" => true,
                    "false" => false,
                    _ => fail(idx, raw, "expected true or false"),
                };
                let mut t = None;
                let mut env = Vec::new();
                for b in bindings.split_whitespace() {
                    let Some((name, value)) = b.split_once('=') else {
                        fail(idx, raw, "expected name=value");
                    };
                    if name == "t" {
                        t = Some(value.parse().unwrap());
                    } else {
                        env.push((name.to_string(), value.parse().unwrap()));
                    }
                }
                let Some(t) = t else { fail(idx, raw, "missing t=") };
                out.push(Expectation::Eval { t, env, want });
            }
            "count" => {
                // count box LO HI from T0 to T1 -> list
                let Some((head, want)) = line.split_once("->") else {
                    fail(idx, raw, "expected `->`");
                };
                let w: Vec<&str> = head.split_whitespace().collect();
                if w.len() != 8 || w[1] != "box" || w[4] != "from" || w[6] != "to" {
                    fail(idx, raw, "expected `count box LO HI from T0 to T1 -> ...`");
                }
                let want = want
                    .trim()
                    .split(',')
                    .map(|c| c.trim().parse().unwrap())
                    .collect();
                out.push(Expectation::Count {
                    lo: w[2].parse().unwrap(),
                    hi: w[3].parse().unwrap(),
                    t_lo: w[5].parse().unwrap(),
                    t_hi: w[7].parse().unwrap(),
                    want,
                });
            }
            _ => fail(idx, raw, "unknown directive"),
        }
    }
    out
}

/// Sidecar for a corpus entry, if present.
pub fn load_sidecar(stem: &str) -> Option<Vec<Expectation>> {
    let path = corpus_dir().join(format!("{stem}.expect"));
    fs::read_to_string(path).ok().map(|text| parse_sidecar(&text))
}
