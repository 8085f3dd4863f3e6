//! Quantifier bounding for parametric Presburger arithmetic.
//!
//! Formulas over integer variables may use coefficients, divisibility moduli,
//! and quantifier bounds drawn from `Z[t]`, where `t` ranges over the natural
//! numbers. The [`eliminate`] pipeline rewrites any such formula into a
//! logically equivalent one (for every value of `t`) whose quantifiers are
//! all of the bounded form `∃z (0 ≤ z ≤ p(t) ∧ …)`, and [`qfree`] removes
//! quantifiers entirely when the input satisfies a syntactic criterion.
//! The [`oracle`] module provides an independent ground-truth decision
//! procedure used to machine-check equivalence at fixed parameter values.

pub mod ast;
pub mod count;
pub mod eliminate;
pub mod normalize;
pub mod oracle;
pub mod parser;
pub mod poly;
pub mod qfree;
