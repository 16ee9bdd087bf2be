//! Chunked execution with optional checkpoints.
//!
//! Constant-term elimination runs in one piece; its output is cut into
//! chunks of `chunk_size` terms. Slack elimination then runs per chunk and
//! per coefficient ring, and each partial result is saved before the next
//! chunk starts. A resumed run reuses every partial whose table, ring and
//! `lambda` still match.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ct_euclid_core::apps::{self, brute_ehrhart, EhrhartResult};
use ct_euclid_core::checkpoint::{self, Manifest, Partial};
use ct_euclid_core::oracle;
use ct_euclid_core::pipeline::{self, combine_modular, run_ct, CtProblem, PipelineOptions, Residue, Value};
use ct_euclid_core::slack::{SlackStats, SlackValue};
use ct_euclid_core::system::parse_system;
use ct_euclid_core::{
    CoefficientRing, DiophantineSystem, ElliottTerm, EngineStats, Error, ExactValue, Field, LambdaVector, PrimeField,
    Rationals, Role, Task, TermSum, VariableTable,
};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::config::{sha256_hex, RunConfig, TaskSpec};
use crate::error::{CliError, CliResult};
use crate::input::parse_ct_problem;
use crate::report::{push_kv, value_lines};

pub const CONFIG_FILE: &str = "config.json";
pub const RESULT_FILE: &str = "result.txt";

/// What the problem was built from; drives the oracle check.
#[derive(Debug, Clone)]
pub enum Source {
    Raw,
    Knapsack { a0: BigInt, weights: Vec<BigInt> },
    Count(DiophantineSystem),
    Ehrhart(DiophantineSystem),
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: CtProblem,
    pub source: Source,
    pub problem_hash: String,
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_int(s: &str) -> CliResult<BigInt> {
    s.trim().parse().map_err(|_| CliError::Parse(format!("bad integer `{s}`")))
}

fn read_system(path: &Path, want: Task) -> CliResult<DiophantineSystem> {
    let (sys, task) = parse_system(&read_input(path)?).map_err(|e| CliError::Parse(e.to_string()))?;
    match task {
        Some(t) if t != want => {
            Err(CliError::Parse(format!("{} declares task {t:?}, but {want:?} was requested", path.display())))
        }
        _ => Ok(sys),
    }
}

/// Builds the constant-term problem for a task.
pub fn prepare(task: &TaskSpec) -> CliResult<Prepared> {
    let (problem, source) = match task {
        TaskSpec::Ct { input } => (parse_ct_problem(&read_input(input)?)?, Source::Raw),
        TaskSpec::Knapsack { a0, weights } => {
            let a0 = parse_int(a0)?;
            let weights = weights.iter().map(|w| parse_int(w)).collect::<CliResult<Vec<_>>>()?;
            (apps::knapsack_problem(&a0, &weights)?, Source::Knapsack { a0, weights })
        }
        TaskSpec::Count { input, assume_bounded } => {
            let sys = read_system(input, Task::Count)?;
            if !assume_bounded {
                apps::check_bounded(&sys)?;
            }
            (apps::diophantine_problem(&sys)?, Source::Count(sys))
        }
        TaskSpec::Ehrhart { input } => {
            let sys = read_system(input, Task::Ehrhart)?;
            (apps::ehrhart_problem(&sys)?, Source::Ehrhart(sys))
        }
        TaskSpec::Magic { n } => {
            if *n == 0 {
                return Err(CliError::Parse("magic square size must be at least 1".into()));
            }
            let sys = ct_euclid_core::magic_square_system(*n);
            (apps::ehrhart_problem(&sys)?, Source::Ehrhart(sys))
        }
    };
    let text = format!(
        "task {}\nscope {:?}\nscale {}\n{}",
        task.name(),
        problem.scope,
        problem.scale,
        checkpoint::format_terms(&problem.sum.table, &problem.sum.terms)
    );
    Ok(Prepared { problem, source, problem_hash: sha256_hex(text.as_bytes()) })
}

/// Output of constant-term elimination, cut into chunks.
struct CtStage {
    table: Arc<VariableTable>,
    chunks: Vec<Vec<ElliottTerm>>,
    stats: EngineStats,
    collided: usize,
}

impl CtStage {
    fn terms(&self) -> usize {
        self.chunks.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub value: Value,
    /// Contents of the result file.
    pub result_text: String,
    pub result_path: Option<std::path::PathBuf>,
    pub timings: Vec<(&'static str, Duration)>,
    /// Partials computed in this run and partials loaded from disk.
    pub computed: usize,
    pub reused: usize,
}

fn manifest_for(cfg: &RunConfig, prep: &Prepared) -> Manifest {
    Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        task: cfg.task.name().to_string(),
        problem_hash: prep.problem_hash.clone(),
        table: String::new(),
        seed: cfg.seed,
        order: cfg.order,
        slack: cfg.slack,
        chunk_size: cfg.chunk_size,
        chunks: 0,
        terms: 0,
        ct_complete: false,
        ct_stats: EngineStats::default(),
        collided: 0,
        scale: prep.problem.scale.to_string(),
    }
}

fn check_manifest(saved: &Manifest, expected: &Manifest) -> CliResult<()> {
    let mismatch = |what: &str| Err(CliError::ResumeMismatch(format!("{what} differs from the checkpoint")));
    if saved.tool_version != expected.tool_version {
        return mismatch("tool version");
    }
    if saved.task != expected.task || saved.problem_hash != expected.problem_hash || saved.scale != expected.scale {
        return mismatch("input problem");
    }
    if saved.seed != expected.seed {
        return mismatch("seed");
    }
    if saved.order != expected.order || saved.slack != expected.slack {
        return mismatch("engine policy");
    }
    if saved.chunk_size != expected.chunk_size {
        return mismatch("chunk size");
    }
    Ok(())
}

fn ct_stage(cfg: &RunConfig, prep: &Prepared, opts: &PipelineOptions) -> CliResult<CtStage> {
    let dir = cfg.checkpoint_dir.as_deref();
    let mut manifest = manifest_for(cfg, prep);
    if let Some(dir) = dir {
        if Manifest::path(dir).exists() {
            if !cfg.resume {
                return Err(CliError::ResumeMismatch(format!(
                    "{} already holds a run; pass --resume to continue it",
                    dir.display()
                )));
            }
            let saved = Manifest::load(dir)?;
            check_manifest(&saved, &manifest)?;
            if saved.ct_complete {
                let mut chunks = Vec::with_capacity(saved.chunks);
                for i in 0..saved.chunks {
                    let (table, terms) = checkpoint::read_terms(&dir.join(checkpoint::chunk_file_name(i)))?;
                    if table.header() != saved.table {
                        return Err(CliError::ResumeMismatch(format!("chunk {i} has a different variable table")));
                    }
                    chunks.push(terms);
                }
                let table = Arc::new(VariableTable::parse_header(&saved.table)?);
                return Ok(CtStage { table, chunks, stats: saved.ct_stats, collided: saved.collided });
            }
        } else if cfg.resume {
            return Err(CliError::ResumeMismatch(format!("no checkpoint in {}", dir.display())));
        }
        fs::create_dir_all(dir)?;
        checkpoint::write_atomic(
            &dir.join(CONFIG_FILE),
            &serde_json::to_string_pretty(cfg).expect("config serializes"),
        )?;
        manifest.store(dir)?;
    }

    let outcome = run_ct(&prep.problem, opts)?;
    let table = outcome.sum.table.clone();
    let chunks: Vec<Vec<ElliottTerm>> = outcome.sum.terms.chunks(cfg.chunk_size).map(<[_]>::to_vec).collect();
    if let Some(dir) = dir {
        for (i, c) in chunks.iter().enumerate() {
            checkpoint::write_terms(&dir.join(checkpoint::chunk_file_name(i)), &table, c)?;
        }
        checkpoint::write_terms(&dir.join(checkpoint::BAD_TERMS), &prep.problem.sum.table, &outcome.collided)?;
        manifest.table = table.header();
        manifest.chunks = chunks.len();
        manifest.terms = outcome.sum.len();
        manifest.ct_complete = true;
        manifest.ct_stats = outcome.stats.clone();
        manifest.collided = outcome.collided.len();
        manifest.store(dir)?;
    }
    Ok(CtStage { table, chunks, stats: outcome.stats, collided: outcome.collided.len() })
}

/// Counts chunk computations and stops the run on request.
struct Budget {
    limit: Option<usize>,
    computed: usize,
    reused: usize,
}

fn slack_stage<F: Field>(
    field: &F,
    ring: CoefficientRing,
    ct: &CtStage,
    lambda: &LambdaVector,
    dir: Option<&Path>,
    budget: &mut Budget,
) -> CliResult<(SlackValue<F>, SlackStats)> {
    let nfree = ct.table.ids_with_role(Role::Free).len();
    let header = ct.table.header();
    let mut acc = SlackValue::zero(field, nfree);
    let mut stats = SlackStats::default();
    for (i, chunk) in ct.chunks.iter().enumerate() {
        let path = dir.map(|d| d.join(checkpoint::partial_file_name(i, ring)));
        let saved = path
            .as_ref()
            .filter(|p| p.exists())
            .and_then(|p| fs::read_to_string(p).ok())
            .and_then(|text| checkpoint::parse_partial(field, &text, nfree).ok())
            .filter(|p| p.table == header && p.ring == ring && &p.lambda == lambda);
        let (value, s) = match saved {
            Some(p) => {
                budget.reused += 1;
                (p.value, p.stats)
            }
            None => {
                if budget.limit.is_some_and(|n| budget.computed >= n) {
                    return Err(CliError::Interrupted(budget.computed));
                }
                let ts = TermSum::new(ct.table.clone(), chunk.clone());
                let (value, s) = ct_euclid_core::eliminate_slack(field, &ts, lambda)?;
                if let Some(path) = &path {
                    let p = Partial { table: header.clone(), ring, lambda: lambda.clone(), stats: s.clone(), value };
                    checkpoint::write_atomic(path, &checkpoint::format_partial(&p))?;
                    budget.computed += 1;
                    (p.value, s)
                } else {
                    budget.computed += 1;
                    (value, s)
                }
            }
        };
        acc = acc.add(field, value)?;
        stats.merge(&s);
    }
    Ok((acc, stats))
}

fn oracle_check(source: &Source, value: &Value, coeffs: Option<usize>) -> CliResult<String> {
    let agree = |name: &str, ok: bool, detail: String| {
        if ok {
            Ok(format!("agrees with {name} ({detail})"))
        } else {
            Err(CliError::OracleMismatch(format!("{name}: {detail}")))
        }
    };
    let scalar_check = |name: &str, expected: u128| match value {
        Value::Residues(rs) => {
            let ok = rs.iter().all(|(p, r)| matches!(r, Residue::Scalar(v) if *v as u128 == expected % *p as u128));
            agree(name, ok, format!("expected {expected} modulo each prime"))
        }
        _ => {
            let got = value.integer()?;
            agree(name, got == BigInt::from(expected), format!("expected {expected}, got {got}"))
        }
    };
    match source {
        Source::Raw => Err(Error::OracleRefused("no oracle for raw constant-term problems".into()).into()),
        Source::Knapsack { a0, weights } => {
            let a0 = a0.to_u64().ok_or_else(|| Error::OracleRefused("right-hand side too large".into()))?;
            let w = weights
                .iter()
                .map(|x| x.to_u64().ok_or_else(|| Error::OracleRefused("weight too large".into())))
                .collect::<Result<Vec<_>, _>>()?;
            scalar_check("dp_knapsack", oracle::dp_knapsack(a0, &w)?)
        }
        Source::Count(sys) => {
            if sys.keep_variables {
                return Err(
                    Error::OracleRefused("the oracle counts; it does not build generating functions".into()).into()
                );
            }
            scalar_check("brute_count", oracle::brute_count(sys)?)
        }
        Source::Ehrhart(sys) => {
            let k = coeffs.unwrap_or(4);
            let rf = value.rational_function().map_err(|_| {
                CliError::Core(Error::OracleRefused("series check needs an exact rational function".into()))
            })?;
            let got = apps::series_coeffs(&EhrhartResult::new(rf.clone()), k)?;
            let expected: Vec<BigInt> = brute_ehrhart(sys, k)?.into_iter().map(BigInt::from).collect();
            agree("brute-force dilation counts", got == expected, format!("k = 0..={k}"))
        }
    }
}

/// Runs a configuration from scratch or, with `resume`, from its
/// checkpoint.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let opts = cfg.pipeline_options()?;
    let start = Instant::now();
    let prep = prepare(&cfg.task)?;
    let dir = cfg.checkpoint_dir.as_deref();

    let ct = ct_stage(cfg, &prep, &opts)?;
    let t_ct = start.elapsed();

    let lambda = pipeline::choose_lambda(&ct.table, ct.chunks.iter().flatten(), &opts)?;
    let mut budget = Budget { limit: cfg.halt_after_chunks, computed: 0, reused: 0 };
    let primes = cfg.effective_primes();
    let (value, slack) = if primes.is_empty() {
        let (v, s) = slack_stage(&Rationals, CoefficientRing::ExactRational, &ct, &lambda, dir, &mut budget)?;
        (Value::Exact(pipeline::unscale(ExactValue::from_slack(v)?, &prep.problem.scale)?), s)
    } else {
        let mut parts = Vec::with_capacity(primes.len());
        let mut stats = SlackStats::default();
        for &p in &primes {
            let field = PrimeField::new(p)?;
            let (v, s) = slack_stage(&field, CoefficientRing::PrimeField(p), &ct, &lambda, dir, &mut budget)?;
            stats = s;
            parts.push((field, v));
        }
        (combine_modular(parts, cfg.crt, &prep.problem.scale)?, stats)
    };
    let t_slack = start.elapsed() - t_ct;

    let oracle = if cfg.oracle_check { Some(oracle_check(&prep.source, &value, cfg.coeffs)?) } else { None };

    let free: Vec<String> =
        ct.table.ids_with_role(Role::Free).into_iter().map(|v| ct.table.name(v).to_string()).collect();
    let mut text = String::from("ct-euclid result\n");
    push_kv(&mut text, "version", env!("CARGO_PKG_VERSION"));
    push_kv(&mut text, "config", cfg.hash(&prep.problem_hash));
    push_kv(&mut text, "task", cfg.task.name());
    push_kv(&mut text, "table", ct.table.header());
    for line in value_lines(&value, &free) {
        text.push_str(&line);
        text.push('\n');
    }
    if let (Some(k), Source::Ehrhart(_)) = (cfg.coeffs, &prep.source) {
        match value.rational_function() {
            Ok(rf) => {
                let c = apps::series_coeffs(&EhrhartResult::new(rf.clone()), k)?;
                push_kv(&mut text, "coefficients", c.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
            }
            Err(_) => push_kv(&mut text, "coefficients", "unavailable without an exact value"),
        }
    }
    text.push_str("diagnostics:\n");
    let d = &ct.stats;
    push_kv(&mut text, "  terms-raw", d.raw_terms);
    push_kv(&mut text, "  terms-collected", d.collected_terms);
    for v in &d.per_var {
        push_kv(
            &mut text,
            &format!("  terms[{}]", v.var),
            format!("raw {} collected {}", v.raw_terms, v.collected_terms),
        );
    }
    push_kv(&mut text, "  recursion-nodes", d.recursion_nodes);
    push_kv(&mut text, "  collision-restarts", ct.collided);
    push_kv(&mut text, "  terms-after-ct", ct.terms());
    push_kv(&mut text, "  chunks", ct.chunks.len());
    push_kv(&mut text, "  lambda", lambda.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
    push_kv(&mut text, "  slack-summands", slack.summands);
    push_kv(&mut text, "  slack-max-summands", slack.max_summands);
    push_kv(&mut text, "  summand-bound-violations", slack.bound_violations);
    if let Value::Reconstructed { confidence, .. } = &value {
        push_kv(&mut text, "  crt-confidence", format!("{confidence:.6e}"));
    }
    if let Some(o) = oracle {
        push_kv(&mut text, "  oracle", o);
    }

    let result_path = cfg.output.clone().or_else(|| dir.map(|d| d.join(RESULT_FILE)));
    if let Some(p) = &result_path {
        checkpoint::write_atomic(p, &text)?;
    }
    let total = start.elapsed();
    Ok(RunOutcome {
        value,
        result_text: text,
        result_path,
        timings: vec![("ct", t_ct), ("slack", t_slack), ("total", total)],
        computed: budget.computed,
        reused: budget.reused,
    })
}

/// Continues the run saved in `dir`. Optional overrides change the prime
/// set; partials for other primes are then recomputed.
pub fn resume(dir: &Path, primes: Option<Vec<u64>>, crt: Option<bool>, halt: Option<usize>) -> CliResult<RunOutcome> {
    let text = fs::read_to_string(dir.join(CONFIG_FILE))
        .map_err(|e| CliError::ResumeMismatch(format!("no saved configuration in {}: {e}", dir.display())))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| CliError::ResumeMismatch(format!("saved configuration: {e}")))?;
    if let Some(p) = primes {
        cfg.primes = p;
    }
    if let Some(c) = crt {
        cfg.crt = c;
    }
    cfg.checkpoint_dir = Some(dir.to_path_buf());
    cfg.resume = true;
    cfg.halt_after_chunks = halt;
    run(&cfg)
}
