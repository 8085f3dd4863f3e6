//! Univariate integer polynomials in the parameter `t`.
//!
//! These are the ring elements that scale variables, index divisibility
//! predicates, and bound quantifiers. Coefficients are arbitrary-precision:
//! case-split products multiply coefficients together and can exceed 64 bits.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::iter::Product;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

/// An element of `Z[t]`, stored densely: `coeffs[i]` multiplies `t^i`.
///
/// Canonical form: the highest stored coefficient is nonzero, and the zero
/// polynomial stores an empty vector. Structural equality on canonical
/// coefficients is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

/// Exact sign classification of a polynomial, used to prune case splits
/// that are unsatisfiable for every value of `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstSign {
    /// The zero polynomial.
    Zero,
    /// A positive constant.
    Positive,
    /// A negative constant.
    Negative,
    /// Degree >= 1; the sign depends on `t`.
    Nonconstant,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(1)
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Poly::from_coeffs([0, 1])
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Poly::from_coeffs([c.into()])
    }

    /// Builds `c * t^k`.
    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    /// Builds a polynomial from low-to-high coefficients, canonicalizing.
    pub fn from_coeffs<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut p = Poly {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// The constant value, if degree <= 0.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.coeffs.len() {
            0 => Some(BigInt::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn leading_coeff(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_sign(&self) -> ConstSign {
        match self.coeffs.len() {
            0 => ConstSign::Zero,
            1 if self.coeffs[0].is_positive() => ConstSign::Positive,
            1 => ConstSign::Negative,
            _ => ConstSign::Nonconstant,
        }
    }

    /// Exact evaluation at a natural parameter value, by Horner's rule.
    pub fn eval(&self, t: u64) -> BigInt {
        self.eval_big(&BigInt::from(t))
    }

    pub fn eval_big(&self, t: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Product of a list of polynomials; the empty product is 1.
    pub fn product<'a, I>(ps: I) -> Poly
    where
        I: IntoIterator<Item = &'a Poly>,
    {
        ps.into_iter().fold(Poly::one(), |acc, p| &acc * p)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + rhs.coeff(i));
        }
        let mut p = Poly { coeffs };
        p.canonicalize();
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &-rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut p = Poly { coeffs };
        p.canonicalize();
        p
    }
}

impl Product<Poly> for Poly {
    fn product<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        iter.fold(Poly::one(), |acc, p| &acc * &p)
    }
}

impl From<i64> for Poly {
    fn from(c: i64) -> Self {
        Poly::constant(c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if k == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Error produced when parsing the textual polynomial syntax.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid polynomial `{input}`: {reason}")]
pub struct PolyParseError {
    pub input: String,
    pub reason: String,
}

impl FromStr for Poly {
    type Err = PolyParseError;

    /// Parses signed integer monomials in `t`, e.g. `2t^2 - 3t + 1`, `-t`, `7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| PolyParseError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let bytes: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut acc = Poly::zero();
        let mut seen_term = false;
        loop {
            while i < bytes.len() && bytes[i].is_whitespace() {
                i += 1;
            }
            if i == bytes.len() {
                break;
            }
            let mut sign = 1i64;
            match bytes[i] {
                '+' => i += 1,
                '-' => {
                    sign = -1;
                    i += 1;
                }
                _ if seen_term => return Err(err("expected `+` or `-` between terms")),
                _ => {}
            }
            while i < bytes.len() && bytes[i].is_whitespace() {
                i += 1;
            }
            // coefficient digits (optional when the monomial is a power of t)
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff = if start == i {
                None
            } else {
                let digits: String = bytes[start..i].iter().collect();
                Some(
                    digits
                        .parse::<BigInt>()
                        .map_err(|_| err("bad integer literal"))?,
                )
            };
            // optional t or t^k
            let power = if i < bytes.len() && bytes[i] == 't' {
                i += 1;
                if i < bytes.len() && bytes[i] == '^' {
                    i += 1;
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(err("expected exponent after `^`"));
                    }
                    let digits: String = bytes[start..i].iter().collect();
                    digits.parse::<usize>().map_err(|_| err("bad exponent"))?
                } else {
                    1
                }
            } else {
                0
            };
            let coeff = match coeff {
                Some(c) => c,
                None if power > 0 => BigInt::one(),
                None => return Err(err("expected a monomial")),
            };
            acc = &acc + &Poly::monomial(coeff * sign, power);
            seen_term = true;
        }
        if !seen_term {
            return Err(err("empty input"));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("2t + 1").eval(3), BigInt::from(7));
        assert_eq!(Poly::zero().eval(5), BigInt::from(0));
        assert_eq!(p("t^2 - t").eval(4), BigInt::from(12));
    }

    #[test]
    fn ring_ops() {
        assert_eq!(&Poly::t() * &p("t + 1"), p("t^2 + t"));
        assert_eq!(&p("2t - 1") + &p("1 - 2t"), Poly::zero());
        assert_eq!(&Poly::constant(2) * &Poly::constant(-3), Poly::constant(-6));
    }

    #[test]
    fn products() {
        assert_eq!(Poly::product([]), Poly::one());
        assert_eq!(Poly::product([&Poly::t(), &Poly::constant(2)]), p("2t"));
        assert_eq!(Poly::product([&p("t - 1"), &p("t + 1")]), p("t^2 - 1"));
    }

    #[test]
    fn signs() {
        assert_eq!(Poly::zero().constant_sign(), ConstSign::Zero);
        assert_eq!(Poly::constant(-4).constant_sign(), ConstSign::Negative);
        assert_eq!(p("t - 3").constant_sign(), ConstSign::Nonconstant);
    }

    #[test]
    fn display_round_trip() {
        for s in ["2t^2 - 3t + 1", "-t", "7", "0", "t^3 + t", "-2t^2 - 1"] {
            let parsed = p(s);
            assert_eq!(parsed.to_string(), s);
            assert_eq!(p(&parsed.to_string()), parsed);
        }
    }
}
