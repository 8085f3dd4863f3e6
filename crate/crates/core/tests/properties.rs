//! Randomized semantic checks: generated formulas survive printing,
//! re-parsing, binder renaming, and the rewriting passes without changing
//! meaning at sampled grid points.

mod support;

use std::collections::HashMap;

use num_bigint::BigInt;
use ppres::ast::{Formula, FreshVars, Term, Var};
use ppres::eliminate::simplify;
use ppres::normalize::to_nnf;
use ppres::oracle::{classical_cooper_decide, ground};
use ppres::parser::parse;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::generate_corpus;

fn formula_from_seed(seed: u64) -> Formula {
    generate_corpus(seed, 1).pop().unwrap()
}

/// A deterministic assignment for the formula's free variables.
fn sample_env(f: &Formula, seed: u64) -> HashMap<Var, BigInt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    f.free_vars()
        .into_iter()
        .map(|v| (v, BigInt::from(rng.gen_range(-8i64..=8))))
        .collect()
}

fn decide(f: &Formula, t: u64, env: &HashMap<Var, BigInt>) -> bool {
    classical_cooper_decide(&ground(f, t), env)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let f = formula_from_seed(seed);
        let text = f.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
    }

    #[test]
    fn negation_normal_form_preserves_truth(seed in any::<u64>(), t in 0u64..=4) {
        let f = formula_from_seed(seed);
        let env = sample_env(&f, seed);
        prop_assert_eq!(decide(&to_nnf(&f), t, &env), decide(&f, t, &env));
    }

    #[test]
    fn double_negation_preserves_truth(seed in any::<u64>(), t in 0u64..=4) {
        let f = formula_from_seed(seed);
        let env = sample_env(&f, seed);
        let doubled = Formula::not(Formula::not(f.clone()));
        prop_assert_eq!(decide(&doubled, t, &env), decide(&f, t, &env));
    }

    #[test]
    fn binder_refresh_preserves_truth(seed in any::<u64>(), t in 0u64..=4) {
        let f = formula_from_seed(seed);
        let env = sample_env(&f, seed);
        let renamed = f.refresh_bound(&FreshVars::above(&[&f]));
        prop_assert!(renamed.alpha_eq(&f));
        prop_assert_eq!(decide(&renamed, t, &env), decide(&f, t, &env));
    }

    #[test]
    fn simplification_preserves_truth(seed in any::<u64>(), t in 0u64..=4) {
        let f = formula_from_seed(seed);
        let env = sample_env(&f, seed);
        prop_assert_eq!(decide(&simplify(&f), t, &env), decide(&f, t, &env));
    }

    #[test]
    fn substituting_an_absent_variable_is_inert(seed in any::<u64>()) {
        let f = formula_from_seed(seed);
        let fresh = FreshVars::above(&[&f]);
        let ghost = fresh.fresh("ghost");
        let g = f.substitute(&ghost, &Term::constant(7), &fresh);
        prop_assert!(g.alpha_eq(&f));
    }
}
