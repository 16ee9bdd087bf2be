//! Randomized checks of the constant-term engine against naive truncated
//! series expansion.

use std::sync::Arc;

use ct_euclid_core::engine::{ct_var_dual, ct_var_proper, euclid_contribution, normalize_for_var};
use ct_euclid_core::oracle::{expand, expand_sum, naive_ct, TruncationBox};
use ct_euclid_core::poly::{rem, srem, LinearFactorView};
use ct_euclid_core::{collect_terms, ct_var, ElliottTerm, Error, Exponents, Poly, TermSum, VarId, VariableTable};
use num_bigint::BigInt;
use proptest::prelude::*;

// variable order: z1, z2, x
const X: VarId = 2;
const LEAD: i128 = 3;

fn table() -> VariableTable {
    VariableTable::builder().slack("z1").slack("z2").ct("x").build().unwrap()
}

/// Every factor carries a nonzero z part, as after slack insertion, so the
/// truncated expansions stay small.
fn factor(x_range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = Exponents> {
    (-2i64..=2, -2i64..=2, x_range)
        .prop_filter("needs a z part", |(a, b, _)| *a != 0 || *b != 0)
        .prop_map(|(a, b, c)| Exponents::from_vec(vec![a, b, c]))
}

fn numerator(x_range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = Poly> {
    prop::collection::vec((-3i64..=3, -2i64..=2, -2i64..=2, x_range), 1..=2).prop_map(|ms| {
        let mut p = Poly::zero();
        for (c, a, b, x) in ms {
            if c != 0 {
                p.add_term(Exponents::from_vec(vec![a, b, x]), BigInt::from(c));
            }
        }
        if p.is_zero() {
            p.add_term(Exponents::one(3), BigInt::from(1));
        }
        p
    })
}

fn term() -> impl Strategy<Value = ElliottTerm> {
    (numerator(-4..=4), prop::collection::vec(factor(-3..=3), 1..=3)).prop_map(|(n, d)| ElliottTerm::new(n, d))
}

/// Terms proper in `x` and finite at `x = 0`: all factors have positive
/// `x` exponent and the numerator degree is below the denominator degree.
fn proper_finite_term() -> impl Strategy<Value = ElliottTerm> {
    prop::collection::vec(factor(1..=3), 1..=3).prop_flat_map(|d| {
        let deg: i64 = d.iter().map(|f| f.get(X)).sum();
        (numerator(0..=deg - 1), Just(d)).prop_map(|(n, d)| ElliottTerm::new(n, d))
    })
}

fn boxed<'a>(terms: impl IntoIterator<Item = &'a ElliottTerm>) -> TruncationBox {
    TruncationBox::for_terms(3, terms, LEAD)
}

/// Collisions are legitimate engine outcomes for non-coprime random
/// factors; such cases are skipped.
fn skip_collision<T>(r: Result<T, Error>) -> Result<T, TestCaseError> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::Collision { .. }) => Err(TestCaseError::reject("collision")),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

fn no_x(terms: &[ElliottTerm]) -> bool {
    terms.iter().all(|t| !t.mentions(X))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, max_global_rejects: 4096, ..ProptestConfig::default() })]

    #[test]
    fn ct_var_matches_naive_expansion(t in term()) {
        let tb = table();
        let out = skip_collision(ct_var(&t, X, &tb))?;
        prop_assert!(no_x(&out));
        let bx = boxed(std::iter::once(&t).chain(&out));
        let want = naive_ct(&t, X, &bx).unwrap();
        let got = expand_sum(&out, &bx).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn proper_and_dual_formulas_agree(t in proper_finite_term()) {
        let tb = table();
        let proper = skip_collision(ct_var_proper(&t, X, &tb))?;
        let dual = skip_collision(ct_var_dual(&t, X, &tb))?;
        prop_assert!(no_x(&proper) && no_x(&dual));
        let bx = boxed(std::iter::once(&t).chain(&proper).chain(&dual));
        let a = expand_sum(&proper, &bx).unwrap();
        prop_assert_eq!(&a, &expand_sum(&dual, &bx).unwrap());
        prop_assert_eq!(&a, &naive_ct(&t, X, &bx).unwrap());
    }

    #[test]
    fn contribution_of_absent_factor_vanishes(t in term(), extra in factor(1..=3)) {
        // multiplying the numerator by 1 - f cancels f: the pole is absent
        let t = normalize_for_var(&t, X).unwrap();
        let cancel = Poly::from_terms([(Exponents::one(3), BigInt::from(1)), (extra.clone(), BigInt::from(-1))]);
        let mut den = t.denominator.clone();
        den.push(extra);
        let pivot = den.len() - 1;
        let t = ElliottTerm::new(t.numerator.mul(&cancel).unwrap(), den);
        let out = skip_collision(euclid_contribution(&t, pivot, X, &table()))?;
        prop_assert!(no_x(&out));
        let bx = boxed(std::iter::once(&t).chain(&out));
        prop_assert!(expand_sum(&out, &bx).unwrap().is_zero());
    }

    #[test]
    fn ct_var_is_linear(a in term(), extra in numerator(-4..=4)) {
        let tb = table();
        let b = ElliottTerm::new(extra, a.denominator.clone());
        let sum = ElliottTerm::new({ let mut n = a.numerator.clone(); n.add_assign(&b.numerator); n }, a.denominator.clone());
        let oa = skip_collision(ct_var(&a, X, &tb))?;
        let ob = skip_collision(ct_var(&b, X, &tb))?;
        let os = skip_collision(ct_var(&sum, X, &tb))?;
        let bx = boxed([&a, &b, &sum].into_iter().chain(&oa).chain(&ob).chain(&os));
        let mut lhs = expand_sum(&oa, &bx).unwrap();
        lhs.add_assign(&expand_sum(&ob, &bx).unwrap());
        prop_assert_eq!(lhs, expand_sum(&os, &bx).unwrap());
    }

    #[test]
    fn collecting_preserves_value(ts in prop::collection::vec(term(), 1..=4)) {
        let tb = Arc::new(table());
        let mut out = Vec::new();
        for t in &ts {
            out.extend(skip_collision(ct_var(t, X, &tb))?);
        }
        let collected = collect_terms(TermSum::new(tb, out.clone())).unwrap();
        prop_assert!(collected.len() <= out.len());
        let bx = boxed(out.iter().chain(&collected.terms));
        prop_assert_eq!(expand_sum(&out, &bx).unwrap(), expand_sum(&collected.terms, &bx).unwrap());
    }

    #[test]
    fn normalization_keeps_the_series(t in term()) {
        let n = normalize_for_var(&t, X).unwrap();
        prop_assert!(n.denominator.iter().all(|f| f.get(X) >= 0));
        let bx = boxed([&t, &n]);
        prop_assert_eq!(expand(&t, &bx).unwrap(), expand(&n, &bx).unwrap());
    }

    #[test]
    fn remainders_are_congruent_and_in_range(
        m in prop::collection::vec(-50i64..=50, 3),
        u in prop::collection::vec(-5i64..=5, 2),
        a in 1i64..=12,
    ) {
        let m = Exponents::from_vec(m);
        let u = Exponents::from_vec(vec![u[0], u[1], 0]);
        let f = LinearFactorView { u: &u, a };
        for (r, signed) in [(rem(&m, f, X).unwrap(), false), (srem(&m, f, X).unwrap(), true)] {
            let e = r.get(X);
            if signed {
                prop_assert!(-a < 2 * e && 2 * e <= a, "srem exponent {} for a = {}", e, a);
            } else {
                prop_assert!((0..a).contains(&e), "rem exponent {} for a = {}", e, a);
            }
            // m = r * (u x^a)^l for the integer l = (m_x - r_x) / a
            let diff = m.get(X) - e;
            prop_assert_eq!(diff % a, 0);
            let l = diff / a;
            for v in 0..2 {
                prop_assert_eq!(m.get(v), r.get(v) + l * u.get(v));
            }
        }
    }
}

#[test]
fn knapsack_contribution_collapses() {
    // <(x^-41 - x z3^3) / ((1 - x z1)(1 - x^5 z2)(1 - x^14 z3)), 1 - x^5 z2|
    let tb = VariableTable::builder().slack("z1").slack("z2").slack("z3").ct("x").build().unwrap();
    let e = |v: &[i64]| Exponents::from_vec(v.to_vec());
    let num = Poly::from_terms([(e(&[0, 0, 0, -41]), BigInt::from(1)), (e(&[0, 0, 3, 1]), BigInt::from(-1))]);
    let t = ElliottTerm::new(num, vec![e(&[1, 0, 0, 1]), e(&[0, 1, 0, 5]), e(&[0, 0, 1, 14])]);
    let out = euclid_contribution(&t, 1, 3, &tb).unwrap();
    assert!(out.iter().all(|t| !t.mentions(3)));
    let collected = collect_terms(TermSum::new(Arc::new(tb), out)).unwrap();
    assert!(collected.len() <= 2);
}
