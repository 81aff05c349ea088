use crate::error::CliError;
use crate::output::{num, Sink};
use std::path::{Path, PathBuf};
use strong_taylor::coeff::{build_table_with_max, CoeffStore, WeightProfile};
use strong_taylor::oracle::{closed_form_pair_mse, error_report, exact_mse, select_q, IndexPattern, OracleError, Order};
use WeightProfile::*;

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSummary {
    pub profile: WeightProfile,
    pub q: usize,
    pub entries: usize,
    pub parseval_sum: f64,
    pub residual: f64,
    pub path: PathBuf,
}

/// Builds the exact table, writes it under `dir`, and reports `S(q)` and `I_k - S(q)` at Δ = 1.
pub fn coeffs(store: &CoeffStore, profile: WeightProfile, q: usize, dir: &Path) -> Result<CoeffSummary, CliError> {
    let table = build_table_with_max(profile, q, store.max_index())?;
    let path = table.save(dir)?;
    Ok(CoeffSummary {
        profile,
        q,
        entries: table.len(),
        parseval_sum: table.parseval_sum(1.0),
        residual: table.parseval_residual(1.0),
        path,
    })
}

pub fn write_coeffs(sink: &mut Sink, s: &CoeffSummary) -> Result<(), CliError> {
    sink.row(["profile", "q", "entries", "parseval_sum", "residual", "file"])?;
    sink.row([
        s.profile.label(),
        s.q.to_string(),
        s.entries.to_string(),
        num(s.parseval_sum),
        num(s.residual),
        s.path.display().to_string(),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseRow {
    pub profile: WeightProfile,
    pub pattern: IndexPattern,
    pub q: usize,
    pub delta: f64,
    pub mse: f64,
    pub method: &'static str,
}

/// The six reference settings for pairwise-distinct indices.
pub const DISTINCT_SETTINGS: [(WeightProfile, usize); 6] =
    [(P000, 6), (P100, 2), (P010, 2), (P001, 2), (P0000, 2), (P00000, 1)];

pub fn mse_table(store: &CoeffStore, delta: f64) -> Result<Vec<MseRow>, CliError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CliError::Usage(format!("step must be positive, got {delta}")));
    }
    let mut rows = Vec::new();
    for (p, q) in DISTINCT_SETTINGS {
        let pattern = IndexPattern::distinct(p.k());
        let mse = exact_mse(store, p, &pattern, q, delta)?;
        rows.push(MseRow { profile: p, pattern, q, delta, mse, method: "parseval-residual" });
    }
    for p in [P00, P01, P10] {
        for pattern in [IndexPattern::distinct(2), IndexPattern::all_equal(2)] {
            for q in 0..=8 {
                let closed = closed_form_pair_mse(p, &pattern, q, delta)?;
                rows.push(MseRow { profile: p, pattern: pattern.clone(), q, delta, mse: closed, method: "closed-form" });
                let series = exact_mse(store, p, &pattern, q, delta)?;
                rows.push(MseRow { profile: p, pattern: pattern.clone(), q, delta, mse: series, method: "series" });
            }
        }
    }
    Ok(rows)
}

pub fn write_mse_table(sink: &mut Sink, rows: &[MseRow]) -> Result<(), CliError> {
    sink.row(["profile", "pattern", "q", "delta", "mse", "method"])?;
    for r in rows {
        sink.row([
            r.profile.label(),
            r.pattern.to_string(),
            r.q.to_string(),
            num(r.delta),
            num(r.mse),
            r.method.to_string(),
        ])?;
    }
    Ok(())
}

/// Every index pattern of length `k`, as restricted growth strings.
pub fn all_patterns(k: usize) -> Vec<IndexPattern> {
    fn rec(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<IndexPattern>) {
        if prefix.len() == k {
            out.push(IndexPattern::of(prefix));
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            rec(prefix, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectRow {
    pub profile: WeightProfile,
    pub pattern: IndexPattern,
    /// `None` when no tabulated order reaches the tolerance.
    pub q: Option<usize>,
    pub error: f64,
    pub tolerance: f64,
}

pub fn select_rows(
    store: &CoeffStore,
    profile: Option<WeightProfile>,
    pattern: Option<&IndexPattern>,
    delta: f64,
    order: Order,
    constant: f64,
) -> Result<Vec<SelectRow>, CliError> {
    let profiles: Vec<WeightProfile> = match profile {
        Some(p) => vec![p],
        None => WeightProfile::TRUNCATED.to_vec(),
    };
    let tolerance = constant * delta.powi(order.target_exponent());
    let mut rows = Vec::new();
    for p in profiles {
        let patterns = match pattern {
            Some(pt) => vec![pt.clone()],
            None => all_patterns(p.k()),
        };
        for pt in patterns {
            let row = match select_q(store, p, &pt, delta, order, constant) {
                Ok(q) => {
                    let error = error_report(store, p, &pt, q, delta)?.best();
                    SelectRow { profile: p, pattern: pt, q: Some(q), error, tolerance }
                }
                Err(OracleError::ToleranceUnreachable { best, .. }) => {
                    SelectRow { profile: p, pattern: pt, q: None, error: best, tolerance }
                }
                Err(e) => return Err(e.into()),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_select(sink: &mut Sink, rows: &[SelectRow]) -> Result<(), CliError> {
    sink.row(["profile", "pattern", "q", "error", "tolerance"])?;
    for r in rows {
        let q = r.q.map_or_else(|| "unreachable".to_string(), |q| q.to_string());
        sink.row([r.profile.label(), r.pattern.to_string(), q, num(r.error), num(r.tolerance)])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use strong_taylor::coeff::CoeffConfig;

    #[test]
    fn pattern_enumeration_is_bell() {
        let counts: Vec<usize> = (1..=5).map(|k| all_patterns(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52]);
    }

    #[test]
    fn coeffs_table_size() {
        let dir = tempfile::tempdir().unwrap();
        let store = CoeffStore::new(CoeffConfig::default());
        let s = coeffs(&store, P000, 2, dir.path()).unwrap();
        assert_eq!(s.entries, 27);
        assert_eq!(std::fs::read_to_string(&s.path).unwrap().lines().count(), 27);
        assert!((s.parseval_sum + s.residual - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mse_table_scales_with_step() {
        let store = CoeffStore::new(CoeffConfig::default());
        let one = mse_table(&store, 1.0).unwrap();
        let two = mse_table(&store, 2.0).unwrap();
        assert_eq!(one.len(), 6 + 3 * 2 * 9 * 2);
        let k4 = |rows: &[MseRow]| rows.iter().find(|r| r.profile == P0000).unwrap().mse;
        assert!((k4(&two) - 16.0 * k4(&one)).abs() < 1e-14);
    }

    #[test]
    fn unreachable_rows_are_reported() {
        let store = CoeffStore::new(CoeffConfig::default());
        let rows = select_rows(&store, Some(P00), Some(&IndexPattern::distinct(2)), 0.0625, Order::TwoHalf, 1.0).unwrap();
        assert_eq!(rows[0].q, None);
        let rows = select_rows(&store, Some(P00), None, 0.5, Order::TwoHalf, 1.0).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.q.is_some() && r.error <= r.tolerance));
    }
}
