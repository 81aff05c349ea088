//! String forms of the library's option types.

use crate::error::CliError;
use strong_taylor::coeff::WeightProfile;
use strong_taylor::noise::QSet;
use strong_taylor::oracle::{IndexPattern, Order};
use strong_taylor::schemes::{Calculus, IntegralRoute, QPolicy};

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn profile(s: &str) -> Result<WeightProfile, CliError> {
    s.parse().map_err(usage)
}

pub fn order(s: &str) -> Result<Order, CliError> {
    s.parse().map_err(usage)
}

pub fn calculus(s: &str) -> Result<Calculus, CliError> {
    s.parse().map_err(usage)
}

pub fn route(s: &str) -> Result<IntegralRoute, CliError> {
    s.parse().map_err(usage)
}

pub fn pattern(s: &str) -> Result<IndexPattern, CliError> {
    s.parse().map_err(usage)
}

/// `auto`, `auto:C`, `N`, or comma-separated items `N` / `profile=N`
/// applied left to right; families never mentioned get 0.
pub fn q_policy(s: &str) -> Result<QPolicy, CliError> {
    let s = s.trim();
    if s == "auto" {
        return Ok(QPolicy::Auto { constant: 1.0 });
    }
    if let Some(c) = s.strip_prefix("auto:") {
        let constant: f64 = c.trim().parse().map_err(|_| usage(format!("bad constant in `{s}`")))?;
        if !(constant > 0.0) {
            return Err(usage("the auto constant must be positive"));
        }
        return Ok(QPolicy::Auto { constant });
    }
    let mut q = QSet::uniform(0);
    for item in s.split(',').map(str::trim) {
        let bad = || usage(format!("bad q item `{item}`"));
        match item.split_once('=') {
            None => q = QSet::uniform(item.parse().map_err(|_| bad())?),
            Some((p, n)) => q.set(profile(p.trim())?, n.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(QPolicy::Fixed(q))
}

pub fn components(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|c| c.trim().parse::<usize>().map_err(|_| usage(format!("bad component `{c}`"))))
        .collect()
}

pub fn steps_list(s: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| usage(format!("bad step `{c}`"))))
        .collect::<Result<_, _>>()?;
    if v.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(usage("steps must be positive"));
    }
    Ok(v)
}
