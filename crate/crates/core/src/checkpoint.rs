//! Plain-text checkpoint files.
//!
//! A chunk file starts with `# table: <VariableTable header>` and holds one
//! term per line:
//!
//! ```text
//! num: 3@1,0,-2;-1@0,0,0 | den: 1,-1,0;0,1,5
//! ```
//!
//! Partial results from slack elimination add `# ring:` and `# lambda:`
//! lines and one value line (or one line per fraction).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::engine::EngineStats;
use crate::error::{Error, Result};
use crate::field::{CoefficientRing, Field};
use crate::monomial::Exponents;
use crate::slack::{FreePoly, LambdaVector, SimpleFraction, SlackStats, SlackValue, UniFraction};
use crate::term::{ElliottTerm, Poly};
use crate::vars::VariableTable;

pub const MANIFEST: &str = "manifest.json";
pub const BAD_TERMS: &str = "bad_factors.txt";

pub fn chunk_file_name(index: usize) -> String {
    format!("chunk_{index:05}.txt")
}

pub fn ring_tag(ring: CoefficientRing) -> String {
    match ring {
        CoefficientRing::ExactRational => "exact".into(),
        CoefficientRing::PrimeField(p) => p.to_string(),
    }
}

pub fn partial_file_name(index: usize, ring: CoefficientRing) -> String {
    format!("partial_{index:05}_{}.txt", ring_tag(ring))
}

/// Everything needed to resume a run and to check that it still matches
/// its input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub task: String,
    /// Hash of the canonical problem description.
    pub problem_hash: String,
    /// Header of the table the chunks are written over.
    pub table: String,
    pub seed: u64,
    pub order: crate::engine::OrderPolicy,
    pub slack: crate::engine::SlackPolicy,
    pub chunk_size: usize,
    pub chunks: usize,
    pub terms: usize,
    pub ct_complete: bool,
    pub ct_stats: EngineStats,
    pub collided: usize,
    /// Decimal integer the input was scaled by.
    pub scale: String,
}

impl Manifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(Self::path(dir)).map_err(io_err)?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("manifest: {e}")))
    }

    pub fn store(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&Self::path(dir), &text)
    }
}

pub fn io_err(e: std::io::Error) -> Error {
    Error::Invalid(format!("i/o: {e}"))
}

/// Writes through a temporary file so an interruption never leaves a
/// half-written checkpoint behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn fmt_exps(out: &mut String, e: &[i64]) {
    for (i, v) in e.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
}

fn parse_exps(s: &str, nvars: usize) -> Result<Vec<i64>> {
    let v: Vec<i64> = if s.trim().is_empty() && nvars == 0 {
        Vec::new()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::Invalid(format!("bad exponent `{t}`"))))
            .collect::<Result<_>>()?
    };
    if v.len() != nvars {
        return Err(Error::Invalid(format!("exponent vector `{s}` has {} entries, expected {nvars}", v.len())));
    }
    Ok(v)
}

pub fn format_term(t: &ElliottTerm) -> String {
    let mut out = String::from("num: ");
    for (i, (e, c)) in t.numerator.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{c}@");
        fmt_exps(&mut out, e.as_slice());
    }
    out.push_str(" | den: ");
    for (i, f) in t.denominator.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        fmt_exps(&mut out, f.as_slice());
    }
    out
}

pub fn parse_term(line: &str, nvars: usize) -> Result<ElliottTerm> {
    let bad = || Error::Invalid(format!("bad term line `{line}`"));
    let (num, den) = line.split_once('|').ok_or_else(bad)?;
    let num = num.trim().strip_prefix("num:").ok_or_else(bad)?.trim();
    let den = den.trim().strip_prefix("den:").ok_or_else(bad)?.trim();
    let mut numerator = Poly::zero();
    for m in num.split(';').filter(|s| !s.trim().is_empty()) {
        let (c, e) = m.split_once('@').ok_or_else(bad)?;
        let c: BigInt = c.trim().parse().map_err(|_| bad())?;
        numerator.add_term(Exponents::from_vec(parse_exps(e, nvars)?), c);
    }
    let denominator = den
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|f| Ok(Exponents::from_vec(parse_exps(f, nvars)?)))
        .collect::<Result<_>>()?;
    Ok(ElliottTerm::new(numerator, denominator))
}

pub fn format_terms(table: &VariableTable, terms: &[ElliottTerm]) -> String {
    let mut out = format!("# table: {}\n", table.header());
    for t in terms {
        out.push_str(&format_term(t));
        out.push('\n');
    }
    out
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    line.and_then(|l| l.strip_prefix("# "))
        .and_then(|l| l.strip_prefix(key))
        .and_then(|l| l.strip_prefix(':'))
        .map(str::trim)
        .ok_or_else(|| Error::Invalid(format!("missing `# {key}:` header")))
}

pub fn parse_terms(text: &str) -> Result<(VariableTable, Vec<ElliottTerm>)> {
    let mut lines = text.lines();
    let table = VariableTable::parse_header(header_value(lines.next(), "table")?)?;
    let terms = lines.filter(|l| !l.trim().is_empty()).map(|l| parse_term(l, table.len())).collect::<Result<_>>()?;
    Ok((table, terms))
}

pub fn write_terms(path: &Path, table: &VariableTable, terms: &[ElliottTerm]) -> Result<()> {
    write_atomic(path, &format_terms(table, terms))
}

pub fn read_terms(path: &Path) -> Result<(VariableTable, Vec<ElliottTerm>)> {
    parse_terms(&fs::read_to_string(path).map_err(io_err)?)
}

/// A per-chunk slack-elimination result with the context it was made in.
#[derive(Clone, PartialEq)]
pub struct Partial<F: Field> {
    pub table: String,
    pub ring: CoefficientRing,
    pub lambda: LambdaVector,
    pub stats: SlackStats,
    pub value: SlackValue<F>,
}

fn fmt_free(out: &mut String, p: &FreePoly<impl Field>) {
    for (i, (e, c)) in p.terms.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{c}@");
        fmt_exps(out, e);
    }
}

pub fn format_partial<F: Field>(p: &Partial<F>) -> String {
    let mut out = format!("# table: {}\n# ring: {}\n# lambda: ", p.table, ring_tag(p.ring));
    fmt_exps(&mut out, &p.lambda.0);
    let _ = writeln!(out, "\n# stats: {}", serde_json::to_string(&p.stats).expect("stats serialize"));
    match &p.value {
        SlackValue::Scalar(v) => {
            let _ = writeln!(out, "scalar: {v}");
        }
        SlackValue::Univariate(u) => {
            let _ = write!(out, "univariate: shift={} den=", u.shift);
            for (i, (k, e)) in u.denominator.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{k}^{e}");
            }
            out.push_str(" num=");
            for (i, c) in u.numerator.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        SlackValue::Multivariate(fs) => {
            let _ = writeln!(out, "fractions: {}", fs.len());
            for f in fs {
                out.push_str("den=");
                for (i, (m, e)) in f.denominator.iter().enumerate() {
                    if i > 0 {
                        out.push(';');
                    }
                    fmt_exps(&mut out, m);
                    let _ = write!(out, "^{e}");
                }
                out.push_str(" num=");
                fmt_free(&mut out, &f.numerator);
                out.push('\n');
            }
        }
    }
    out
}

fn parse_elem<F: Field>(s: &str) -> Result<F::Elem> {
    s.trim().parse().map_err(|_| Error::Invalid(format!("bad coefficient `{s}`")))
}

pub fn parse_partial<F: Field>(field: &F, text: &str, nfree: usize) -> Result<Partial<F>> {
    let mut lines = text.lines();
    let table = header_value(lines.next(), "table")?.to_string();
    let ring = match header_value(lines.next(), "ring")? {
        "exact" => CoefficientRing::ExactRational,
        p => CoefficientRing::PrimeField(p.parse().map_err(|_| Error::Invalid(format!("bad ring `{p}`")))?),
    };
    let lam = header_value(lines.next(), "lambda")?;
    let lambda = if lam.is_empty() {
        LambdaVector(Vec::new())
    } else {
        LambdaVector(
            lam.split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Invalid(format!("bad lambda `{lam}`"))))
                .collect::<Result<_>>()?,
        )
    };
    let stats = serde_json::from_str(header_value(lines.next(), "stats")?)
        .map_err(|e| Error::Invalid(format!("bad stats line: {e}")))?;
    let body = lines.next().ok_or_else(|| Error::Invalid("partial file has no value".into()))?;
    let value = if let Some(v) = body.strip_prefix("scalar:") {
        SlackValue::Scalar(parse_elem::<F>(v)?)
    } else if let Some(rest) = body.strip_prefix("univariate:") {
        let mut shift = 0;
        let mut denominator = BTreeMap::new();
        let mut numerator = Vec::new();
        for part in rest.split_whitespace() {
            if let Some(s) = part.strip_prefix("shift=") {
                shift = s.parse().map_err(|_| Error::Invalid(format!("bad shift `{s}`")))?;
            } else if let Some(d) = part.strip_prefix("den=") {
                for kv in d.split(',').filter(|s| !s.is_empty()) {
                    let (k, e) = kv.split_once('^').ok_or_else(|| Error::Invalid(format!("bad factor `{kv}`")))?;
                    let k: u64 = k.parse().map_err(|_| Error::Invalid(format!("bad factor `{kv}`")))?;
                    let e: u32 = e.parse().map_err(|_| Error::Invalid(format!("bad factor `{kv}`")))?;
                    denominator.insert(k, e);
                }
            } else if let Some(n) = part.strip_prefix("num=") {
                numerator = n.split(',').filter(|s| !s.is_empty()).map(parse_elem::<F>).collect::<Result<_>>()?;
            }
        }
        SlackValue::Univariate(UniFraction { shift, numerator, denominator })
    } else if let Some(n) = body.strip_prefix("fractions:") {
        let n: usize = n.trim().parse().map_err(|_| Error::Invalid("bad fraction count".into()))?;
        let mut fs = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| Error::Invalid("truncated partial file".into()))?;
            let (den, num) =
                line.split_once(" num=").ok_or_else(|| Error::Invalid(format!("bad fraction `{line}`")))?;
            let den = den.strip_prefix("den=").ok_or_else(|| Error::Invalid(format!("bad fraction `{line}`")))?;
            let mut denominator = Vec::new();
            for f in den.split(';').filter(|s| !s.is_empty()) {
                let (m, e) = f.rsplit_once('^').ok_or_else(|| Error::Invalid(format!("bad factor `{f}`")))?;
                let e: u32 = e.parse().map_err(|_| Error::Invalid(format!("bad factor `{f}`")))?;
                denominator.push((parse_exps(m, nfree)?, e));
            }
            let mut numerator = FreePoly::zero();
            for m in num.split(';').filter(|s| !s.is_empty()) {
                let (c, e) = m.split_once('@').ok_or_else(|| Error::Invalid(format!("bad monomial `{m}`")))?;
                numerator.add_term(field, parse_exps(e, nfree)?, parse_elem::<F>(c)?);
            }
            fs.push(SimpleFraction { numerator, denominator });
        }
        SlackValue::Multivariate(fs)
    } else {
        return Err(Error::Invalid(format!("bad partial value `{body}`")));
    };
    Ok(Partial { table, ring, lambda, stats, value })
}
