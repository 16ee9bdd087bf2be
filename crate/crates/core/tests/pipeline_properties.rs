//! End-to-end checks of the pipeline against the brute-force oracles.

use ct_euclid_core::apps::{
    brute_ehrhart, diophantine_count, diophantine_problem, ehrhart_series, knapsack_count, knapsack_problem,
    series_coeffs,
};
use ct_euclid_core::oracle::{brute_count, dp_knapsack};
use ct_euclid_core::pipeline::{choose_lambda, finish_with, run_ct, Arithmetic, CtProblem, DEFAULT_PRIMES};
use ct_euclid_core::slack::{pick_lambda, pure_factors, summand_audit, LambdaStrategy};
use ct_euclid_core::{
    magic_square_system, DiophantineSystem, Error, OrderPolicy, PipelineOptions, Role, SlackPolicy, Value,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn exact() -> PipelineOptions {
    PipelineOptions::default()
}

fn modular(crt: bool) -> PipelineOptions {
    PipelineOptions { arithmetic: Arithmetic::Modular { primes: DEFAULT_PRIMES.to_vec(), crt }, ..exact() }
}

/// A random bounded counting instance: the first row is positive.
fn random_system(rng: &mut ChaCha8Rng) -> DiophantineSystem {
    let r = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=4);
    let rows: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..n).map(|_| if i == 0 { rng.gen_range(1..=5) } else { rng.gen_range(-5..=5) }).collect())
        .collect();
    // a zero column is not allowed; the positive first row rules it out
    let rhs: Vec<i64> = (0..r).map(|i| if i == 0 { rng.gen_range(0..=8) } else { rng.gen_range(-8..=8) }).collect();
    DiophantineSystem::from_i64(&rows, &rhs).unwrap()
}

/// Two distinct `lambda` valid for the same post-elimination sum.
fn two_lambdas(
    problem: &CtProblem,
) -> (ct_euclid_core::TermSum, ct_euclid_core::LambdaVector, ct_euclid_core::LambdaVector) {
    let opts = exact();
    let out = run_ct(problem, &opts).unwrap();
    let a = choose_lambda(&out.sum.table, &out.sum.terms, &opts).unwrap();
    let pure = pure_factors(&out.sum.table, &out.sum.terms);
    let nslack = out.sum.table.ids_with_role(Role::Slack).len();
    let b = pick_lambda(nslack, &pure, LambdaStrategy::MomentCurve, 0, None).unwrap();
    (out.sum, a, b)
}

#[test]
fn lambda_invariance_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 20 {
        let problem = if checked % 2 == 0 {
            let n = rng.gen_range(1..=4);
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=30)).collect();
            knapsack_problem(&BigInt::from(rng.gen_range(0..=200)), &big(&a)).unwrap()
        } else {
            diophantine_problem(&random_system(&mut rng)).unwrap()
        };
        let (sum, a, b) = two_lambdas(&problem);
        if !a.0.is_empty() {
            assert_ne!(a, b);
        }
        let va = finish_with(&sum, &a, &exact(), &problem.scale).unwrap().0;
        let vb = finish_with(&sum, &b, &exact(), &problem.scale).unwrap().0;
        assert_eq!(va, vb);
        checked += 1;
    }
}

#[test]
fn modular_results_match_exact_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let sys = random_system(&mut rng);
        let want = match diophantine_count(&sys, &exact(), false) {
            Ok(v) => v,
            Err(Error::Unbounded) => continue,
            Err(e) => panic!("{e}"),
        };
        let residues = diophantine_count(&sys, &modular(false), true);
        assert!(residues.is_err(), "uncombined residues are not an integer");
        let problem = diophantine_problem(&sys).unwrap();
        let sol = ct_euclid_core::solve(&problem, &modular(false)).unwrap();
        let Value::Residues(rs) = &sol.value else { panic!("expected residues") };
        for (p, r) in rs {
            let ct_euclid_core::pipeline::Residue::Scalar(v) = r else { panic!("expected a scalar") };
            assert_eq!(BigInt::from(*v), want.mod_floor(&BigInt::from(*p)));
        }
        assert_eq!(diophantine_count(&sys, &modular(true), true).unwrap(), want);
    }
}

#[test]
fn modular_series_match_exact_ones() {
    let sys = magic_square_system(3);
    let e = ehrhart_series(&sys, &exact()).unwrap();
    let m = ehrhart_series(&sys, &modular(true)).unwrap();
    assert_eq!(e, m);
}

#[test]
fn diophantine_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..60 {
        let sys = random_system(&mut rng);
        match diophantine_count(&sys, &exact(), false) {
            Ok(n) => {
                assert_eq!(n, BigInt::from(brute_count(&sys).unwrap()), "{sys:?}");
                checked += 1;
            }
            Err(Error::Unbounded) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(checked >= 40);
}

#[test]
fn ehrhart_series_do_not_depend_on_order_or_seed() {
    let sys = magic_square_system(3);
    let base = ehrhart_series(&sys, &exact()).unwrap();
    let coeffs = series_coeffs(&base, 8).unwrap();
    assert_eq!(coeffs[0], BigInt::from(1));
    assert!(coeffs.iter().all(|c| c >= &BigInt::from(0)));
    for (order, slack, seed) in [
        (OrderPolicy::SparseFirst, SlackPolicy::Eager, 0),
        (OrderPolicy::Given, SlackPolicy::Eager, 99),
        (OrderPolicy::SparseFirst, SlackPolicy::Delayed, 5),
    ] {
        let mut o = exact();
        o.engine.order = order;
        o.engine.slack = slack;
        o.seed = seed;
        assert_eq!(ehrhart_series(&sys, &o).unwrap(), base, "{order:?} {slack:?} {seed}");
    }
    let seg = DiophantineSystem::from_i64(&[vec![1, 2, 3]], &[2]).unwrap();
    let want: Vec<BigInt> = brute_ehrhart(&seg, 6).unwrap().into_iter().map(BigInt::from).collect();
    for seed in [0, 1, 2] {
        let o = PipelineOptions { seed, ..exact() };
        assert_eq!(series_coeffs(&ehrhart_series(&seg, &o).unwrap(), 6).unwrap(), want);
    }
}

/// Counts 6x6 permutation matrices whose two diagonals each hold one 1.
fn permutation_count(n: usize) -> usize {
    fn go(row: usize, n: usize, used: &mut Vec<bool>, d: usize, a: usize, count: &mut usize) {
        if row == n {
            if d == 1 && a == 1 {
                *count += 1;
            }
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                go(row + 1, n, used, d + usize::from(c == row), a + usize::from(c + row == n - 1), count);
                used[c] = false;
            }
        }
    }
    let mut count = 0;
    go(0, n, &mut vec![false; n], 0, 0, &mut count);
    count
}

#[test]
fn six_by_six_magic_squares_low_dilations() {
    assert_eq!(permutation_count(6), 96);
    let sys = magic_square_system(6);
    assert_eq!(brute_count(&sys.dilate(1)).unwrap(), 96);
    assert_eq!(brute_count(&sys.dilate(2)).unwrap(), 14763);
}

#[test]
fn slack_summands_stay_within_bound() {
    knapsack_count(&BigInt::from(41), &big(&[1, 5, 14]), &exact()).unwrap();
    ehrhart_series(&magic_square_system(3), &exact()).unwrap();
    let (calls, violations) = summand_audit();
    assert!(calls > 0);
    assert_eq!(violations, 0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn knapsack_counts_match_dynamic_programming(
        a0 in 0u64..=1_000_000,
        a in prop::collection::vec(1u64..=2000, 1..=6),
    ) {
        let want = dp_knapsack(a0, &a).unwrap();
        let got = knapsack_count(&BigInt::from(a0), &a.iter().map(|&w| BigInt::from(w)).collect::<Vec<_>>(), &exact()).unwrap();
        prop_assert_eq!(got.to_u128().unwrap(), want);
    }

    #[test]
    fn knapsack_counts_ignore_weight_order(
        a0 in 0u64..=5000,
        a in prop::collection::vec(1i64..=40, 2..=5),
        rot in 0usize..5,
    ) {
        let mut b = a.clone();
        b.reverse();
        let k = rot % b.len();
        b.rotate_left(k);
        let x = knapsack_count(&BigInt::from(a0), &big(&a), &exact()).unwrap();
        let y = knapsack_count(&BigInt::from(a0), &big(&b), &exact()).unwrap();
        prop_assert_eq!(x, y);
    }
}
