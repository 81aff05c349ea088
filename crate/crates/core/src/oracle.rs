//! Mean-square errors of the truncated expansions, their bounds, and the
//! choice of truncation order.

use crate::coeff::{CoeffError, CoeffStore, WeightProfile};
use crate::noise::{strat_pair_weighted, GaussianBasis, PairWeight};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;
use WeightProfile::*;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("no closed-form error for {profile} with pattern {pattern}")]
    PatternNotClosedForm { profile: WeightProfile, pattern: IndexPattern },
    #[error(
        "tolerance {tolerance:.3e} for {profile} ({pattern}) not reached by q <= {max_q}; error there is {best:.3e}"
    )]
    ToleranceUnreachable { profile: WeightProfile, pattern: IndexPattern, tolerance: f64, max_q: usize, best: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Which component indices coincide, as class labels in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexPattern {
    labels: Vec<u8>,
}

impl IndexPattern {
    pub fn distinct(k: usize) -> Self {
        Self { labels: (0..k as u8).collect() }
    }

    pub fn all_equal(k: usize) -> Self {
        Self { labels: vec![0; k] }
    }

    /// Pattern of a concrete component tuple.
    pub fn of(components: &[usize]) -> Self {
        let mut seen: Vec<usize> = Vec::new();
        let labels = components
            .iter()
            .map(|c| match seen.iter().position(|s| s == c) {
                Some(p) => p as u8,
                None => {
                    seen.push(*c);
                    (seen.len() - 1) as u8
                }
            })
            .collect();
        Self { labels }
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Representative components `0, 1, ...` for the classes.
    pub fn components(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| l as usize).collect()
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn is_distinct(&self) -> bool {
        let mut s = self.labels.clone();
        s.sort_unstable();
        s.dedup();
        s.len() == self.labels.len()
    }

    pub fn is_all_equal(&self) -> bool {
        self.labels.iter().all(|&l| l == self.labels[0])
    }

    /// Permutations `π` of the positions with `i_{π(l)} = i_l` for all `l`.
    pub fn stabilizer(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..k).collect();
        permutations(&mut perm, 0, &mut |p| {
            if (0..k).all(|l| self.labels[p[l]] == self.labels[l]) {
                out.push(p.to_vec());
            }
        });
        out
    }
}

fn permutations(p: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        f(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, f);
        p.swap(start, i);
    }
}

impl fmt::Display for IndexPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|l| (l + 1).to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

impl FromStr for IndexPattern {
    type Err = OracleError;

    /// Accepts `1-2-2` (or commas) for explicit classes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let comps: Result<Vec<usize>, _> = s.split(['-', ',']).map(|t| t.trim().parse::<usize>()).collect();
        match comps {
            Ok(c) if !c.is_empty() && c.len() <= 5 => Ok(Self::of(&c)),
            _ => Err(OracleError::Invalid(format!("bad index pattern `{s}`"))),
        }
    }
}

fn check_pattern(profile: WeightProfile, pattern: &IndexPattern) -> Result<(), OracleError> {
    if pattern.k() != profile.k() {
        return Err(OracleError::Invalid(format!(
            "pattern {pattern} has {} positions, {profile} needs {}",
            pattern.k(),
            profile.k()
        )));
    }
    Ok(())
}

/// Dense `f64` coefficients of profile `p` at Δ = 1, order `q`.
fn unit_coefficients(store: &CoeffStore, p: WeightProfile, q: usize) -> Result<Vec<f64>, OracleError> {
    Ok(store.table(p, q)?.scaled(1.0).dense().to_vec())
}

fn index_of(idx: &[usize], q: usize) -> usize {
    idx.iter().fold(0, |acc, &j| acc * (q + 1) + j)
}

/// `Σ_{π} Σ_j x_j y_{π(j)}` over dense tensors of the same order `q`.
fn coupled_sum(x: &[f64], y: &[f64], k: usize, q: usize, perms: &[Vec<usize>]) -> f64 {
    let n = (q + 1).pow(k as u32);
    let mut idx = vec![0usize; k];
    let mut pidx = vec![0usize; k];
    let mut total = 0.0;
    for perm in perms {
        let mut s = 0.0;
        for f in 0..n {
            if x[f] == 0.0 {
                continue;
            }
            let mut r = f;
            for slot in idx.iter_mut().rev() {
                *slot = r % (q + 1);
                r /= q + 1;
            }
            for l in 0..k {
                pidx[l] = idx[perm[l]];
            }
            s += x[f] * y[index_of(&pidx, q)];
        }
        total += s;
    }
    total
}

/// Error of an approximation `Σ_j A_j (Wick product of ζ)` of an Itô integral
/// whose kernel has coefficients `C`:
/// `I_k - 2 Σ_π <C, A∘π> + Σ_π <A, A∘π>`, with π over the pattern's stabilizer.
pub fn approximation_mse(kernel_norm: f64, c: &[f64], a: &[f64], k: usize, q: usize, pattern: &IndexPattern) -> f64 {
    let perms = pattern.stabilizer();
    kernel_norm - 2.0 * coupled_sum(c, a, k, q, &perms) + coupled_sum(a, a, k, q, &perms)
}

/// Coefficient matrix of the weighted-pair series at order `q`, laid out on
/// indices `0..=q+2`. Read off the bilinear form on unit basis vectors.
pub fn weighted_pair_coefficients(which: PairWeight, q: usize, delta: f64) -> Vec<f64> {
    let n = q + 3;
    let mut a = vec![0.0; n * n];
    for j1 in 0..n {
        for j2 in 0..n {
            let mut b = GaussianBasis::zeros(2, q + 2, delta);
            b.set(j1, 0, 1.0);
            b.set(j2, 1, 1.0);
            a[j1 * n + j2] = strat_pair_weighted(&b, 0, 1, q, which).expect("basis sized for the series");
        }
    }
    a
}

/// `E[(I - I^q)^2]` for the Itô expansion at step Δ.
///
/// Covered: single integrals (exact, 0); every pattern for `k = 2, 3`;
/// pairwise-distinct and all-equal patterns for `k = 4, 5`.
pub fn exact_mse(
    store: &CoeffStore,
    profile: WeightProfile,
    pattern: &IndexPattern,
    q: usize,
    delta: f64,
) -> Result<f64, OracleError> {
    check_pattern(profile, pattern)?;
    let k = profile.k();
    let scale = delta.powi(profile.mse_exponent());
    let unit = match profile {
        P0 | P1 | P2 => 0.0,
        P01 | P10 => {
            let which = if profile == P01 { PairWeight::W01 } else { PairWeight::W10 };
            let c = unit_coefficients(store, profile, q + 2)?;
            let a = weighted_pair_coefficients(which, q, 1.0);
            approximation_mse(profile.kernel_norm(1.0), &c, &a, 2, q + 2, pattern).max(0.0)
        }
        _ if pattern.is_distinct() => store.table(profile, q)?.parseval_residual(1.0),
        _ if k <= 3 || pattern.is_all_equal() => {
            let c = unit_coefficients(store, profile, q)?;
            let perms = pattern.stabilizer();
            (profile.kernel_norm(1.0) - coupled_sum(&c, &c, k, q, &perms)).max(0.0)
        }
        _ => return Err(OracleError::PatternNotClosedForm { profile, pattern: pattern.clone() }),
    };
    Ok(unit * scale)
}

/// Printed finite sums for the pair errors.
///
/// `P00` with equal indices returns 0 (the series is exact there). The
/// weighted forms agree with the series for `q >= 1`.
pub fn closed_form_pair_mse(profile: WeightProfile, pattern: &IndexPattern, q: usize, delta: f64) -> Result<f64, OracleError> {
    check_pattern(profile, pattern)?;
    let qf = |i: usize| i as f64;
    let distinct = pattern.is_distinct();
    let v = match profile {
        P00 if distinct => {
            let s: f64 = (1..=q).map(|i| 1.0 / (4.0 * qf(i) * qf(i) - 1.0)).sum();
            delta.powi(2) / 2.0 * (0.5 - s)
        }
        P00 => 0.0,
        P01 | P10 => {
            let tri: f64 = (0..=q)
                .map(|i| {
                    let x = qf(i);
                    ((x + 2.0).powi(2) + (x + 1.0).powi(2)) / ((2.0 * x + 1.0) * (2.0 * x + 5.0) * (2.0 * x + 3.0).powi(2))
                })
                .sum();
            let sq: f64 = (1..=q).map(|i| 1.0 / ((2.0 * qf(i) - 1.0).powi(2) * (2.0 * qf(i) + 3.0).powi(2))).sum();
            if distinct {
                let pair: f64 = (2..=q).map(|i| 1.0 / (4.0 * qf(i) * qf(i) - 1.0)).sum();
                delta.powi(4) / 16.0 * (5.0 / 9.0 - 2.0 * pair - sq - tri)
            } else {
                let one: f64 = (0..=q)
                    .map(|i| {
                        let x = qf(i);
                        1.0 / ((2.0 * x + 1.0) * (2.0 * x + 5.0) * (2.0 * x + 3.0).powi(2))
                    })
                    .sum();
                delta.powi(4) / 16.0 * (1.0 / 9.0 - one - 2.0 * sq)
            }
        }
        _ => return Err(OracleError::Invalid(format!("{profile} is not a pair family"))),
    };
    Ok(v)
}

/// `k! (I_k - S(q))`, valid for every index pattern.
pub fn mse_upper_bound(store: &CoeffStore, profile: WeightProfile, q: usize, delta: f64) -> Result<f64, OracleError> {
    if profile.k() == 1 {
        return Ok(0.0);
    }
    let fact: f64 = (1..=profile.k()).map(|x| x as f64).product();
    Ok(fact * store.table(profile, q)?.parseval_residual(delta).max(0.0))
}

/// `I_k - S(q)`: the Stratonovich error for pairwise-distinct indices.
pub fn strat_mse_distinct(store: &CoeffStore, profile: WeightProfile, q: usize, delta: f64) -> Result<f64, OracleError> {
    if profile.k() == 1 {
        return Ok(0.0);
    }
    Ok(store.table(profile, q)?.parseval_residual(delta))
}

/// Terms of the Stratonovich triple bound at step Δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleBound {
    pub ito_mse: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub bound: f64,
}

/// `4 (E + 1_{12} F + 1_{23} G + 1_{13} H)` for `I*_(000)`.
///
/// `F` and `G` are squared distances between the traced coefficient sums and
/// the expansions of `½ ∫∫ ds df` and `½ ∫∫ df ds`; `H` is the squared norm of
/// the outer-inner trace.
pub fn strat_error_bound_triple(
    store: &CoeffStore,
    pattern: &IndexPattern,
    q: usize,
    delta: f64,
) -> Result<TripleBound, OracleError> {
    check_pattern(P000, pattern)?;
    let c = unit_coefficients(store, P000, q)?;
    let at = |j1: usize, j2: usize, j3: usize| c[index_of(&[j1, j2, j3], q)];
    let r3 = 3f64.sqrt();
    let g_f = [0.25, 0.25 / r3];
    let g_g = [0.25, -0.25 / r3];
    let gap = |target: &[f64; 2], traced: &dyn Fn(usize) -> f64| -> f64 {
        let mut s = 0.0;
        for cidx in 0..=q.max(1) {
            let t = target.get(cidx).copied().unwrap_or(0.0);
            let d = if cidx <= q { traced(cidx) } else { 0.0 };
            s += (t - d).powi(2);
        }
        s
    };
    let f = gap(&g_f, &|cc| (0..=q).map(|j| at(j, j, cc)).sum());
    let g = gap(&g_g, &|cc| (0..=q).map(|j| at(cc, j, j)).sum());
    let h: f64 = (0..=q).map(|cc| (0..=q).map(|j| at(j, cc, j)).sum::<f64>().powi(2)).sum();
    let ito = exact_mse(store, P000, pattern, q, 1.0)?;
    let ind = |a, b| if pattern.same(a, b) { 1.0 } else { 0.0 };
    let bound = 4.0 * (ito + ind(0, 1) * f + ind(1, 2) * g + ind(0, 2) * h);
    let s = delta.powi(3);
    Ok(TripleBound { ito_mse: ito * s, f: f * s, g: g * s, h: h * s, bound: bound * s })
}

/// Everything known about one `(profile, pattern, q)` at step Δ.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub profile: WeightProfile,
    pub pattern: IndexPattern,
    pub q: usize,
    pub exact_mse: Option<f64>,
    pub upper_bound: f64,
    pub kernel_norm: f64,
}

impl ErrorReport {
    /// The exact error when known, otherwise the bound.
    pub fn best(&self) -> f64 {
        self.exact_mse.unwrap_or(self.upper_bound)
    }
}

pub fn error_report(
    store: &CoeffStore,
    profile: WeightProfile,
    pattern: &IndexPattern,
    q: usize,
    delta: f64,
) -> Result<ErrorReport, OracleError> {
    let exact = match exact_mse(store, profile, pattern, q, delta) {
        Ok(v) => Some(v),
        Err(OracleError::PatternNotClosedForm { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ErrorReport {
        profile,
        pattern: pattern.clone(),
        q,
        exact_mse: exact,
        upper_bound: mse_upper_bound(store, profile, q, delta)?,
        kernel_norm: profile.kernel_norm(delta),
    })
}

/// Scheme order for the approximation condition `E <= C Δ^{2γ+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Two,
    TwoHalf,
}

impl Order {
    /// `2γ + 1`.
    pub fn target_exponent(self) -> i32 {
        match self {
            Order::Two => 5,
            Order::TwoHalf => 6,
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            Order::Two => 2.0,
            Order::TwoHalf => 2.5,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Two => "2.0",
            Order::TwoHalf => "2.5",
        })
    }
}

impl FromStr for Order {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "2" | "2.0" => Ok(Order::Two),
            "2.5" => Ok(Order::TwoHalf),
            other => Err(OracleError::Invalid(format!("scheme order must be 2.0 or 2.5, got `{other}`"))),
        }
    }
}

/// Largest table, in entries, that `select_q` will build for one family.
pub const SEARCH_ENTRY_BUDGET: usize = 20_000;

/// Largest q `select_q` tries: the store's index cap, lowered so that the
/// `(q+1)^k` entries stay within [`SEARCH_ENTRY_BUDGET`].
pub fn search_cap(store: &CoeffStore, profile: WeightProfile) -> usize {
    if profile.k() == 2 && !profile.is_unweighted() {
        return store.max_index().saturating_sub(2);
    }
    let k = profile.k() as u32;
    let mut q = store.max_index();
    while q > 0 && (q + 1).pow(k) > SEARCH_ENTRY_BUDGET {
        q -= 1;
    }
    q
}

/// Smallest `q` whose error (exact where available, else the bound) is at most
/// `C Δ^{2γ+1}`.
pub fn select_q(
    store: &CoeffStore,
    profile: WeightProfile,
    pattern: &IndexPattern,
    delta: f64,
    order: Order,
    constant: f64,
) -> Result<usize, OracleError> {
    check_pattern(profile, pattern)?;
    if !(delta > 0.0) || !(constant > 0.0) {
        return Err(OracleError::Invalid("step and constant must be positive".into()));
    }
    if profile.k() == 1 || (profile.is_unweighted() && pattern.is_all_equal()) {
        return Ok(0);
    }
    let tol = constant * delta.powi(order.target_exponent());
    let max_q = search_cap(store, profile);
    if profile.k() >= 3 {
        // Build the largest table once; smaller orders are truncations of it.
        store.table(profile, max_q)?;
    }
    let mut best = f64::INFINITY;
    for q in 0..=max_q {
        let e = error_report(store, profile, pattern, q, delta)?.best();
        if e <= tol {
            return Ok(q);
        }
        best = e;
    }
    Err(OracleError::ToleranceUnreachable { profile, pattern: pattern.clone(), tolerance: tol, max_q, best })
}
