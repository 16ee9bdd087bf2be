//! Acceptance suite: one PASS/FAIL line per criterion, then a nonzero exit
//! if any criterion failed. Runs without the libtest harness so the lines
//! are always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ct_euclid_cli::{resume, run, CliError, RunConfig, TaskSpec};
use ct_euclid_core::apps::{
    brute_ehrhart, diophantine_count, diophantine_problem, ehrhart_series, knapsack_count, knapsack_problem,
    series_coeffs,
};
use ct_euclid_core::engine::{ct_var_dual, ct_var_proper, euclid_contribution, normalize_for_var};
use ct_euclid_core::oracle::{brute_count, expand_sum, naive_ct, TruncationBox};
use ct_euclid_core::pipeline::{choose_lambda, finish_with, run_ct, Residue, DEFAULT_PRIMES};
use ct_euclid_core::poly::{rem, srem, LinearFactorView};
use ct_euclid_core::slack::{
    ct_s_term, pick_lambda, pure_factors, summand_audit, LambdaStrategy, SeriesTables, SlackTerm,
};
use ct_euclid_core::{
    ct_var, magic_square_system, solve, Arithmetic, DiophantineSystem, ElliottTerm, Error, Exponents, PipelineOptions,
    Poly, Rationals, Role, Value, VariableTable,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = Box<dyn Fn() -> Outcome>;

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn exact() -> PipelineOptions {
    PipelineOptions::default()
}

fn modular(crt: bool) -> PipelineOptions {
    PipelineOptions { arithmetic: Arithmetic::Modular { primes: DEFAULT_PRIMES.to_vec(), crt }, ..exact() }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(t < limit, format!("{what} took {t:.2?}, limit {limit:?}"))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn knapsack_golden() -> Outcome {
    let t = Instant::now();
    let n = knapsack_count(&BigInt::from(41), &big(&[1, 5, 14]), &exact()).map_err(err)?;
    let took = t.elapsed();
    ensure(n == BigInt::from(18), format!("got {n}"))?;
    within(took, Duration::from_secs(1), "count")?;
    Ok(format!("18 in {took:.2?}"))
}

fn infeasibility() -> Outcome {
    let t = Instant::now();
    let n = knapsack_count(&BigInt::from(149389505), &big(&[12223, 12224, 36671]), &exact()).map_err(err)?;
    let took = t.elapsed();
    ensure(n == BigInt::from(0), format!("got {n}"))?;
    within(took, Duration::from_secs(10), "count")?;
    // -t^12223 / ((1-t)(1-t^12223)) under t = e^s
    let first =
        SlackTerm { numerator: vec![(BigInt::from(-1), vec![], 12223)], factors: vec![(vec![], 1), (vec![], 12223)] };
    let (f, _) = ct_s_term(&Rationals, &first, &SeriesTables::new(2)).map_err(err)?;
    let v = f.numerator.scalar(&Rationals);
    let want = BigRational::new(BigInt::from(-149365061), BigInt::from(146676));
    ensure(v == want, format!("first term {v}"))?;
    Ok(format!("0 in {took:.2?}, first term {v}"))
}

fn aardal_lenstra() -> Outcome {
    let w = big(&[12223, 12224, 36674, 61119, 85569]);
    let base = BigInt::from(89643481);
    let t = Instant::now();
    let n = knapsack_count(&base, &w, &exact()).map_err(err)?;
    let t0 = t.elapsed();
    ensure(n == BigInt::from(0), format!("base instance gave {n}"))?;
    within(t0, Duration::from_secs(60), "base instance")?;
    let t = Instant::now();
    let n = knapsack_count(&(&base * 1001), &w, &exact()).map_err(err)?;
    let t1 = t.elapsed();
    let want: BigInt = "94267024658624993843".parse().unwrap();
    ensure(n == want, format!("x1001 instance gave {n}"))?;
    within(t1, Duration::from_secs(60), "x1001 instance")?;
    Ok(format!("0 in {t0:.2?}, {want} in {t1:.2?}"))
}

fn magic_series(n: usize, k: usize, limit: Duration) -> Outcome {
    let sys = magic_square_system(n);
    let t = Instant::now();
    let r = ehrhart_series(&sys, &exact()).map_err(err)?;
    let got = series_coeffs(&r, k).map_err(err)?;
    let took = t.elapsed();
    let want: Vec<BigInt> = brute_ehrhart(&sys, k).map_err(err)?.into_iter().map(BigInt::from).collect();
    ensure(got == want, format!("series {got:?}, enumeration {want:?}"))?;
    within(took, limit, "series")?;
    let shown: Vec<String> = got.iter().map(|c| c.to_string()).collect();
    Ok(format!("{} in {took:.2?}", shown.join(",")))
}

/// Permutation matrices of order `n` with exactly one 1 on each diagonal.
fn permutation_count(n: usize) -> usize {
    fn go(row: usize, n: usize, used: &mut [bool], d: usize, a: usize) -> usize {
        if row == n {
            return usize::from(d == 1 && a == 1);
        }
        let mut count = 0;
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                count += go(row + 1, n, used, d + usize::from(c == row), a + usize::from(c + row == n - 1));
                used[c] = false;
            }
        }
        count
    }
    go(0, n, &mut vec![false; n], 0, 0)
}

fn order_six_low_dilations() -> Outcome {
    let perms = permutation_count(6);
    ensure(perms == 96, format!("{perms} permutation matrices"))?;
    let sys = magic_square_system(6);
    let one = brute_count(&sys.dilate(1)).map_err(err)?;
    let two = brute_count(&sys.dilate(2)).map_err(err)?;
    ensure(one == 96 && two == 14763, format!("i(1) = {one}, i(2) = {two}"))?;
    Ok("1 + 96q + 14763q^2".into())
}

// Random Elliott terms over z1, z2 (slack) and x (ct).
const X: usize = 2;

fn term_table() -> VariableTable {
    VariableTable::builder().slack("z1").slack("z2").ct("x").build().unwrap()
}

fn random_factor(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Exponents {
    loop {
        let (a, b) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        if a != 0 || b != 0 {
            return Exponents::from_vec(vec![a, b, rng.gen_range(lo..=hi)]);
        }
    }
}

fn random_numerator(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let e = Exponents::from_vec(vec![rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(lo..=hi)]);
        p.add_term(e, BigInt::from(rng.gen_range(1..=3) * if rng.gen() { 1 } else { -1 }));
    }
    if p.is_zero() {
        p.add_term(Exponents::one(3), BigInt::from(1));
    }
    p
}

fn random_term(rng: &mut ChaCha8Rng) -> ElliottTerm {
    let n = random_numerator(rng, -4, 4);
    let d = (0..rng.gen_range(1..=3)).map(|_| random_factor(rng, -3, 3)).collect();
    ElliottTerm::new(n, d)
}

fn truncation<'a>(terms: impl IntoIterator<Item = &'a ElliottTerm>) -> TruncationBox {
    TruncationBox::for_terms(3, terms, 3)
}

/// `Ok(None)` for a collision, which random non-coprime factors may cause.
fn allow_collision<T>(r: Result<T, Error>) -> Result<Option<T>, String> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Collision { .. }) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

fn property_suite() -> Outcome {
    const WANT: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tb = term_table();
    let no_x = |ts: &[ElliottTerm]| ts.iter().all(|t| !t.mentions(X));

    let mut naive = 0;
    while naive < WANT {
        let t = random_term(&mut rng);
        let Some(out) = allow_collision(ct_var(&t, X, &tb))? else { continue };
        ensure(no_x(&out), "ct_var output still mentions x")?;
        let bx = truncation(std::iter::once(&t).chain(&out));
        let want = naive_ct(&t, X, &bx).map_err(err)?;
        ensure(expand_sum(&out, &bx).map_err(err)? == want, format!("ct_var differs from naive expansion on {t:?}"))?;
        naive += 1;
    }

    let mut dual = 0;
    while dual < WANT {
        let d: Vec<Exponents> = (0..rng.gen_range(1..=3)).map(|_| random_factor(&mut rng, 1, 3)).collect();
        let deg: i64 = d.iter().map(|f| f.get(X)).sum();
        let t = ElliottTerm::new(random_numerator(&mut rng, 0, deg - 1), d);
        let Some(p) = allow_collision(ct_var_proper(&t, X, &tb))? else { continue };
        let Some(q) = allow_collision(ct_var_dual(&t, X, &tb))? else { continue };
        let bx = truncation(std::iter::once(&t).chain(&p).chain(&q));
        let a = expand_sum(&p, &bx).map_err(err)?;
        ensure(a == expand_sum(&q, &bx).map_err(err)?, format!("proper and dual formulas differ on {t:?}"))?;
        ensure(a == naive_ct(&t, X, &bx).map_err(err)?, format!("proper formula differs from naive on {t:?}"))?;
        dual += 1;
    }

    let mut absent = 0;
    while absent < WANT {
        let t = normalize_for_var(&random_term(&mut rng), X).map_err(err)?;
        let extra = random_factor(&mut rng, 1, 3);
        let cancel = Poly::from_terms([(Exponents::one(3), BigInt::from(1)), (extra.clone(), BigInt::from(-1))]);
        let mut den = t.denominator.clone();
        den.push(extra);
        let pivot = den.len() - 1;
        let t = ElliottTerm::new(t.numerator.mul(&cancel).map_err(err)?, den);
        let Some(out) = allow_collision(euclid_contribution(&t, pivot, X, &tb))? else { continue };
        let bx = truncation(std::iter::once(&t).chain(&out));
        ensure(expand_sum(&out, &bx).map_err(err)?.is_zero(), format!("absent factor contributes on {t:?}"))?;
        absent += 1;
    }

    for _ in 0..WANT {
        let m = Exponents::from_vec((0..3).map(|_| rng.gen_range(-50..=50)).collect());
        let u = Exponents::from_vec(vec![rng.gen_range(-5..=5), rng.gen_range(-5..=5), 0]);
        let a = rng.gen_range(1..=12);
        let f = LinearFactorView { u: &u, a };
        for (r, signed) in [(rem(&m, f, X).map_err(err)?, false), (srem(&m, f, X).map_err(err)?, true)] {
            let e = r.get(X);
            let in_range = if signed { -a < 2 * e && 2 * e <= a } else { (0..a).contains(&e) };
            ensure(in_range, format!("remainder exponent {e} out of range for a = {a}"))?;
            let diff = m.get(X) - e;
            ensure(diff % a == 0, "remainder not congruent")?;
            let l = diff / a;
            ensure((0..2).all(|v| m.get(v) == r.get(v) + l * u.get(v)), "remainder pays the wrong power of u")?;
        }
    }
    Ok(format!("{naive} naive, {dual} dual, {absent} absent-factor, {WANT} remainder cases"))
}

fn random_system(rng: &mut ChaCha8Rng) -> DiophantineSystem {
    let r = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=4);
    let rows: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..n).map(|_| if i == 0 { rng.gen_range(1..=5) } else { rng.gen_range(-5..=5) }).collect())
        .collect();
    let rhs: Vec<i64> = (0..r).map(|i| if i == 0 { rng.gen_range(0..=8) } else { rng.gen_range(-8..=8) }).collect();
    DiophantineSystem::from_i64(&rows, &rhs).unwrap()
}

fn lambda_and_modular() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut instances = 0;
    while instances < 20 {
        let (problem, sys) = if instances % 2 == 0 {
            let n = rng.gen_range(1..=4);
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=30)).collect();
            (knapsack_problem(&BigInt::from(rng.gen_range(0..=200)), &big(&a)).map_err(err)?, None)
        } else {
            let sys = random_system(&mut rng);
            if diophantine_count(&sys, &exact(), false).is_err() {
                continue;
            }
            (diophantine_problem(&sys).map_err(err)?, Some(sys))
        };
        let out = run_ct(&problem, &exact()).map_err(err)?;
        let a = choose_lambda(&out.sum.table, &out.sum.terms, &exact()).map_err(err)?;
        let pure = pure_factors(&out.sum.table, &out.sum.terms);
        let nslack = out.sum.table.ids_with_role(Role::Slack).len();
        let b = pick_lambda(nslack, &pure, LambdaStrategy::MomentCurve, 0, None).map_err(err)?;
        ensure(a.0.is_empty() || a != b, "the two lambda coincide")?;
        let va = finish_with(&out.sum, &a, &exact(), &problem.scale).map_err(err)?.0;
        let vb = finish_with(&out.sum, &b, &exact(), &problem.scale).map_err(err)?.0;
        ensure(va == vb, format!("lambda {a:?} and {b:?} disagree"))?;

        let want = solve(&problem, &exact()).map_err(err)?.value.integer().map_err(err)?;
        let Value::Residues(rs) = solve(&problem, &modular(false)).map_err(err)?.value else {
            return Err("expected residues".into());
        };
        ensure(rs.len() == 3, "expected three residues")?;
        for (p, r) in rs {
            let Residue::Scalar(v) = r else { return Err("expected a scalar residue".into()) };
            ensure(
                BigInt::from(v) == want.mod_floor(&BigInt::from(p)),
                format!("residue mod {p} is {v}, exact {want}"),
            )?;
        }
        let crt = solve(&problem, &modular(true)).map_err(err)?.value.integer().map_err(err)?;
        ensure(crt == want, format!("CRT gave {crt}, exact {want}"))?;
        if let Some(sys) = sys {
            ensure(want == BigInt::from(brute_count(&sys).map_err(err)?), "count differs from enumeration")?;
        }
        instances += 1;
    }
    Ok(format!("{instances} instances"))
}

fn summand_bound() -> Outcome {
    let (calls, violations) = summand_audit();
    ensure(calls > 0, "no slack elimination was audited")?;
    ensure(violations == 0, format!("{violations} of {calls} invocations exceed the bound"))?;
    Ok(format!("{calls} invocations within the bound"))
}

fn checkpoint_determinism() -> Outcome {
    let config = |dir: &std::path::Path| {
        let mut cfg = RunConfig::new(TaskSpec::Magic { n: 3 });
        cfg.checkpoint_dir = Some(dir.to_path_buf());
        cfg.chunk_size = 3;
        cfg.coeffs = Some(8);
        cfg
    };
    let fresh_dir = tempfile::tempdir().map_err(err)?;
    let fresh = run(&config(fresh_dir.path())).map_err(err)?;

    let dir = tempfile::tempdir().map_err(err)?;
    let mut cfg = config(dir.path());
    cfg.halt_after_chunks = Some(2);
    match run(&cfg) {
        Err(CliError::Interrupted(_)) => {}
        Err(e) => return Err(format!("interrupted run failed: {e}")),
        Ok(_) => return Err("the run was not interrupted".into()),
    }
    let resumed = resume(dir.path(), None, None, None).map_err(err)?;
    ensure(resumed.reused >= 2, format!("only {} partials reused", resumed.reused))?;
    let a = std::fs::read(fresh.result_path.unwrap()).map_err(err)?;
    let b = std::fs::read(resumed.result_path.unwrap()).map_err(err)?;
    ensure(a == b, "resumed result file differs from the fresh one")?;
    Ok(format!("{} bytes identical, {} partials reused", a.len(), resumed.reused))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Check)> = vec![
        ("knapsack golden value", Box::new(knapsack_golden)),
        ("infeasible knapsack", Box::new(infeasibility)),
        ("Aardal-Lenstra family", Box::new(aardal_lenstra)),
        ("order 3 magic squares", Box::new(|| magic_series(3, 8, Duration::from_secs(30)))),
        ("order 4 magic squares", Box::new(|| magic_series(4, 4, Duration::from_secs(30 * 60)))),
        ("order 6 magic squares, low dilations", Box::new(order_six_low_dilations)),
        ("engine property suite", Box::new(property_suite)),
        ("lambda invariance and modular soundness", Box::new(lambda_and_modular)),
        ("slack summand bound", Box::new(summand_bound)),
        ("checkpoint determinism", Box::new(checkpoint_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
