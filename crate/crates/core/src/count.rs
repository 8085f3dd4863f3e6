//! Counting solution families over a parametric box.
//!
//! A formula with free variables defines, for each parameter value `t`, a
//! set of integer points. [`count_family`] enumerates that set inside a box
//! whose endpoints are polynomials in `t` (so a family whose support grows
//! with `t` still fits at every step) and reports one row per `t`. A row is
//! flagged `truncated` when some member lies on the box boundary — the set
//! may extend past the box, so the count is a lower bound there.
//!
//! [`fit_quasi_polynomial`] then fits the counts with one polynomial per
//! residue class of `t`, in exact rational arithmetic, and reports whether
//! the fit reproduces every data point exactly. This is an empirical check
//! on the shape of the counting function, not a proof of it.

use crate::ast::{EvalError, Formula, Var};
use crate::eliminate::eliminate;
use crate::oracle::eval_bounded;
use crate::poly::Poly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

/// Enumeration box `[lo(t), hi(t)]`, applied to every free variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountBox {
    pub lo: Poly,
    pub hi: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub t: u64,
    pub count: u64,
    /// Some member sits on the box boundary, so the family may continue
    /// beyond it and `count` is only a lower bound at this `t`.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub bounds: CountBox,
    pub rows: Vec<CountRow>,
}

/// Counts the members of the family defined by `f` inside `bounds` for each
/// `t` in `t_lo..=t_hi`. Unbounded quantifiers are eliminated first, so any
/// formula is accepted; with no free variables the count is 1 or 0 by truth
/// value. Counts are exact within the box at each `t`.
pub fn count_family(
    f: &Formula,
    t_lo: u64,
    t_hi: u64,
    bounds: &CountBox,
) -> Result<CountTable, EvalError> {
    let prepared = if f.count_unbounded_quantifiers() > 0 {
        eliminate(f)
    } else {
        f.clone()
    };
    let vars: Vec<Var> = prepared.free_vars().into_iter().collect();
    let mut rows = Vec::new();
    for t in t_lo..=t_hi {
        let lo = bounds.lo.eval(t);
        let hi = bounds.hi.eval(t);
        if vars.is_empty() {
            let member = eval_bounded(&prepared, t, &HashMap::new())?;
            rows.push(CountRow { t, count: member as u64, truncated: false });
            continue;
        }
        if lo > hi {
            rows.push(CountRow { t, count: 0, truncated: false });
            continue;
        }
        let mut count = 0u64;
        let mut truncated = false;
        let mut point = vec![lo.clone(); vars.len()];
        let mut env: HashMap<Var, BigInt> = HashMap::new();
        loop {
            for (v, value) in vars.iter().zip(&point) {
                env.insert(v.clone(), value.clone());
            }
            if eval_bounded(&prepared, t, &env)? {
                count += 1;
                if point.iter().any(|c| *c == lo || *c == hi) {
                    truncated = true;
                }
            }
            // Odometer step over the box, least significant coordinate last.
            let mut i = vars.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                point[i] += 1;
                if point[i] <= hi {
                    break;
                }
                point[i] = lo.clone();
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
        rows.push(CountRow { t, count, truncated });
    }
    Ok(CountTable { bounds: bounds.clone(), rows })
}

/// Fit of one residue class: `coeffs[k]` multiplies `t^k`. `exact` means
/// every data point in the class is reproduced with zero residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFit {
    pub residue: u64,
    pub points_used: usize,
    pub coeffs: Vec<BigRational>,
    pub exact: bool,
    pub max_abs_residual: BigRational,
}

impl ClassFit {
    /// The fitted polynomial when it is exact with integer coefficients.
    pub fn as_poly(&self) -> Option<Poly> {
        if !self.exact {
            return None;
        }
        let mut ints = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if !c.denom().is_one() {
                return None;
            }
            ints.push(c.numer().clone());
        }
        Some(Poly::from_coeffs(ints))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitReport {
    pub modulus: u64,
    pub degree: usize,
    pub classes: Vec<ClassFit>,
}

impl FitReport {
    /// True when every class with data fits exactly.
    pub fn all_exact(&self) -> bool {
        self.classes
            .iter()
            .all(|c| c.points_used == 0 || c.exact)
    }
}

/// Least-squares fit of `table` counts by polynomials of the given degree,
/// one per residue class of `t` mod `modulus`, in exact rational arithmetic.
/// All rows are used (including truncated ones — select the t-range so the
/// box is large enough if exactness matters); classes with fewer than
/// `degree + 1` points are fit through whatever they have.
pub fn fit_quasi_polynomial(table: &CountTable, modulus: u64, degree: usize) -> FitReport {
    let modulus = modulus.max(1);
    let mut classes = Vec::new();
    for residue in 0..modulus {
        let pts: Vec<(BigInt, BigInt)> = table
            .rows
            .iter()
            .filter(|r| r.t % modulus == residue)
            .map(|r| (BigInt::from(r.t), BigInt::from(r.count)))
            .collect();
        if pts.is_empty() {
            classes.push(ClassFit {
                residue,
                points_used: 0,
                coeffs: Vec::new(),
                exact: false,
                max_abs_residual: BigRational::zero(),
            });
            continue;
        }
        let coeffs = least_squares(&pts, degree);
        let mut max_abs = BigRational::zero();
        for (t, y) in &pts {
            let mut pred = BigRational::zero();
            let mut power = BigRational::one();
            let tr = BigRational::from_integer(t.clone());
            for c in &coeffs {
                pred += c * &power;
                power *= &tr;
            }
            let r = (BigRational::from_integer(y.clone()) - pred).abs();
            if r > max_abs {
                max_abs = r;
            }
        }
        classes.push(ClassFit {
            residue,
            points_used: pts.len(),
            coeffs,
            exact: max_abs.is_zero(),
            max_abs_residual: max_abs,
        });
    }
    FitReport { modulus, degree, classes }
}

/// Solves the normal equations of the Vandermonde system exactly. With
/// fewer points than unknowns the system is singular; free coefficients are
/// pinned to zero, which still interpolates the available points.
fn least_squares(pts: &[(BigInt, BigInt)], degree: usize) -> Vec<BigRational> {
    let k = degree + 1;
    let rat = |b: &BigInt| BigRational::from_integer(b.clone());
    // Row i of the design matrix is (1, t_i, …, t_i^degree).
    let design: Vec<Vec<BigRational>> = pts
        .iter()
        .map(|(t, _)| {
            let mut row = Vec::with_capacity(k);
            let mut power = BigRational::one();
            let tr = rat(t);
            for _ in 0..k {
                row.push(power.clone());
                power *= &tr;
            }
            row
        })
        .collect();
    let mut m = vec![vec![BigRational::zero(); k]; k];
    let mut rhs = vec![BigRational::zero(); k];
    for (row, (_, y)) in design.iter().zip(pts) {
        let yr = rat(y);
        for a in 0..k {
            for b in 0..k {
                m[a][b] += &row[a] * &row[b];
            }
            rhs[a] += &row[a] * &yr;
        }
    }
    // Gauss-Jordan with partial pivoting (exact, so any nonzero pivot does).
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; k];
    let mut rank = 0;
    for col in 0..k {
        let Some(p) = (rank..k).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        rhs.swap(rank, p);
        let inv = m[rank][col].clone();
        for cell in &mut m[rank] {
            *cell /= &inv;
        }
        rhs[rank] /= &inv;
        let pivot_row = m[rank].clone();
        let pivot_rhs = rhs[rank].clone();
        for r in 0..k {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for (cell, pivot) in m[r].iter_mut().zip(&pivot_row) {
                    let delta = &factor * pivot;
                    *cell -= delta;
                }
                let delta = &factor * &pivot_rhs;
                rhs[r] -= delta;
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    let mut coeffs = vec![BigRational::zero(); k];
    for col in 0..k {
        if let Some(r) = pivot_of_col[col] {
            coeffs[col] = rhs[r].clone();
        }
    }
    coeffs
}
