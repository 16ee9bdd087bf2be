//! Plain-text rendering of results.

use std::fmt::Write as _;

use ct_euclid_core::pipeline::{Residue, Value};
use ct_euclid_core::slack::{FreePoly, SimpleFraction};
use ct_euclid_core::{ExactValue, Field, Rationals};

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn monomial(names: &[String], e: &[i64]) -> String {
    let parts: Vec<String> = names
        .iter()
        .zip(e)
        .filter(|(_, &k)| k != 0)
        .map(|(n, &k)| if k == 1 { n.clone() } else { format!("{n}^{k}") })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn free_poly<F: Field>(names: &[String], p: &FreePoly<F>) -> String {
    if p.terms.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = p.terms.iter().map(|(e, c)| format!("({c})*{}", monomial(names, e))).collect();
    parts.join(" + ")
}

fn fraction(names: &[String], f: &SimpleFraction<Rationals>) -> String {
    let den: Vec<String> = f.denominator.iter().map(|(m, e)| format!("(1 - {})^{e}", monomial(names, m))).collect();
    if den.is_empty() {
        free_poly(names, &f.numerator)
    } else {
        format!("({}) / ({})", free_poly(names, &f.numerator), den.join(" * "))
    }
}

/// Value lines of the result file. `free` names the free variables.
pub fn value_lines(value: &Value, free: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    match value {
        Value::Exact(v) | Value::Reconstructed { value: v, .. } => match v {
            ExactValue::Scalar(q) => out.push(format!("value: {q}")),
            ExactValue::Univariate(r) => {
                let var = free.first().map(String::as_str).unwrap_or("q");
                out.push(format!("value: rational function in {var}"));
                out.push(format!("shift: {}", r.shift));
                out.push(format!("numerator: {}", join(&r.numerator)));
                out.push(format!("denominator: {}", join(&r.denominator)));
                out.push(format!("fraction: {r}"));
                if let Some(pf) = r.product_form() {
                    out.push(format!("product-form: {pf}"));
                }
            }
            ExactValue::Multivariate(fs) => {
                out.push(format!("value: sum of {} fractions in {}", fs.len(), free.join(",")));
                for f in fs {
                    out.push(format!("fraction: {}", fraction(free, f)));
                }
            }
        },
        Value::Residues(rs) => {
            out.push(format!("value: residues modulo {} primes", rs.len()));
            for (p, r) in rs {
                match r {
                    Residue::Scalar(v) => out.push(format!("residue mod {p}: {v}")),
                    Residue::Univariate(u) => {
                        let den = join(u.denominator.iter().map(|(k, e)| format!("{k}^{e}")));
                        out.push(format!(
                            "residue mod {p}: shift={} numerator={} denominator-factors={den}",
                            u.shift,
                            join(&u.numerator)
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Appends `key: value` lines.
pub fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}: {value}");
}
