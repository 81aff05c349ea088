//! Fourier–Legendre coefficients of the nested-integral kernels.
//!
//! For a weight profile `(l_1, ..., l_k)` the raw coefficient is
//!
//! `C̄_{j_k..j_1} = ∫ P_{j_k}(x_k) w_k(x_k) ∫^{x_k} ... ∫^{x_2} P_{j_1}(x_1) w_1(x_1) dx_1 ... dx_k`
//!
//! on `[-1, 1]` with `w_i(x) = (-(x+1))^{l_i}`. The scaled coefficient is
//! `sqrt(Π(2j_i+1)) / 2^{k+Σl} · Δ^{k/2+Σl} · C̄`. Tables are stored with the
//! index tuple written as `(j_1, ..., j_k)`, innermost integration first, in
//! lexicographic order.

use crate::legendre::{legendre_table, rat, to_f64, Rational, RationalPolynomial, DEFAULT_MAX_INDEX};
use num::{BigInt, One, Zero};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoeffError {
    #[error("unsupported weight profile `{0}`")]
    UnsupportedProfile(String),
    #[error("index {index} exceeds the configured maximum {max}")]
    IndexTooLarge { index: usize, max: usize },
    #[error("expected {expected} indices, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("coefficient cache {}: {message}", path.display())]
    Cache { path: PathBuf, message: String },
}

/// The twelve integral families that appear in the order 2.0 and 2.5 schemes.
///
/// Exponents are listed innermost first: `P100` is `(l_1, l_2, l_3) = (1, 0, 0)`,
/// so the weight `(t - τ)` sits on the innermost integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightProfile {
    P0,
    P1,
    P2,
    P00,
    P01,
    P10,
    P000,
    P100,
    P010,
    P001,
    P0000,
    P00000,
}

impl WeightProfile {
    pub const ALL: [WeightProfile; 12] = [
        Self::P0,
        Self::P1,
        Self::P2,
        Self::P00,
        Self::P01,
        Self::P10,
        Self::P000,
        Self::P100,
        Self::P010,
        Self::P001,
        Self::P0000,
        Self::P00000,
    ];

    /// Families whose approximation depends on a truncation order.
    pub const TRUNCATED: [WeightProfile; 9] = [
        Self::P00,
        Self::P01,
        Self::P10,
        Self::P000,
        Self::P100,
        Self::P010,
        Self::P001,
        Self::P0000,
        Self::P00000,
    ];

    pub fn exponents(self) -> &'static [u8] {
        match self {
            Self::P0 => &[0],
            Self::P1 => &[1],
            Self::P2 => &[2],
            Self::P00 => &[0, 0],
            Self::P01 => &[0, 1],
            Self::P10 => &[1, 0],
            Self::P000 => &[0, 0, 0],
            Self::P100 => &[1, 0, 0],
            Self::P010 => &[0, 1, 0],
            Self::P001 => &[0, 0, 1],
            Self::P0000 => &[0, 0, 0, 0],
            Self::P00000 => &[0, 0, 0, 0, 0],
        }
    }

    pub fn from_exponents(l: &[u8]) -> Result<Self, CoeffError> {
        Self::ALL
            .into_iter()
            .find(|p| p.exponents() == l)
            .ok_or_else(|| CoeffError::UnsupportedProfile(l.iter().map(|d| d.to_string()).collect()))
    }

    /// Multiplicity `k`.
    pub fn k(self) -> usize {
        self.exponents().len()
    }

    pub fn weight_sum(self) -> usize {
        self.exponents().iter().map(|&l| l as usize).sum()
    }

    /// True when every exponent is zero.
    pub fn is_unweighted(self) -> bool {
        self.weight_sum() == 0
    }

    /// Power of Δ carried by a single coefficient: `k/2 + Σl`.
    pub fn coeff_exponent(self) -> f64 {
        self.k() as f64 / 2.0 + self.weight_sum() as f64
    }

    /// Power of Δ carried by mean-square quantities: `k + 2Σl`.
    pub fn mse_exponent(self) -> i32 {
        (self.k() + 2 * self.weight_sum()) as i32
    }

    /// `2^{k+Σl}`.
    pub fn divisor(self) -> u64 {
        1u64 << (self.k() + self.weight_sum())
    }

    /// Digits of the exponents, e.g. `"100"`.
    pub fn label(self) -> String {
        self.exponents().iter().map(|d| d.to_string()).collect()
    }

    /// Exact squared `L²` norm of the kernel at Δ = 1:
    /// `∫_{0<s_1<...<s_k<1} Π s_i^{2 l_i} ds`.
    pub fn kernel_norm_exact(self) -> Rational {
        let zero = Rational::zero();
        let mut f = RationalPolynomial::one();
        for &l in self.exponents() {
            let w = RationalPolynomial::monomial(Rational::one(), 2 * l as usize);
            f = (&w * &f).antiderivative_from(&zero);
        }
        f.eval(&Rational::one())
    }

    /// `I_k` at step Δ.
    pub fn kernel_norm(self, delta: f64) -> f64 {
        to_f64(&self.kernel_norm_exact()) * delta.powi(self.mse_exponent())
    }
}

impl fmt::Display for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for WeightProfile {
    type Err = CoeffError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits: Option<Vec<u8>> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect();
        match digits {
            Some(d) => Self::from_exponents(&d),
            None => Err(CoeffError::UnsupportedProfile(s.to_string())),
        }
    }
}

/// `(-(x+1))^l`.
fn weight_poly(l: u8) -> RationalPolynomial {
    let base = RationalPolynomial::from_ratios(&[(-1, 1), (-1, 1)]);
    (0..l).fold(RationalPolynomial::one(), |acc, _| &acc * &base)
}

/// Per-level factors `P_j(x) w_i(x)` for `j = 0..=q`.
fn level_factors(profile: WeightProfile, q: usize) -> Vec<Vec<RationalPolynomial>> {
    let p = legendre_table(q);
    profile
        .exponents()
        .iter()
        .map(|&l| {
            let w = weight_poly(l);
            p.iter().map(|pj| pj * &w).collect()
        })
        .collect()
}

fn check_indices(profile: WeightProfile, indices: &[usize], max: usize) -> Result<(), CoeffError> {
    if indices.len() != profile.k() {
        return Err(CoeffError::Arity { expected: profile.k(), got: indices.len() });
    }
    if let Some(&index) = indices.iter().find(|&&j| j > max) {
        return Err(CoeffError::IndexTooLarge { index, max });
    }
    Ok(())
}

/// One raw coefficient `C̄`, with indices `(j_1, ..., j_k)` innermost first.
pub fn raw_coefficient(profile: WeightProfile, indices: &[usize]) -> Result<Rational, CoeffError> {
    raw_coefficient_with_max(profile, indices, DEFAULT_MAX_INDEX)
}

pub fn raw_coefficient_with_max(
    profile: WeightProfile,
    indices: &[usize],
    max_index: usize,
) -> Result<Rational, CoeffError> {
    check_indices(profile, indices, max_index)?;
    let q = indices.iter().copied().max().unwrap_or(0);
    let factors = level_factors(profile, q);
    let m1 = rat(-1, 1);
    let mut inner = RationalPolynomial::one();
    let k = profile.k();
    for (level, &j) in indices.iter().enumerate() {
        let integrand = &factors[level][j] * &inner;
        if level + 1 == k {
            return Ok(integrand.definite_integral(&m1, &Rational::one()));
        }
        inner = integrand.antiderivative_from(&m1);
    }
    unreachable!("profiles have k >= 1")
}

/// Scales a raw coefficient to its value on a step of length `delta`.
pub fn scaled_coefficient(raw: &Rational, profile: WeightProfile, indices: &[usize], delta: f64) -> f64 {
    let norm: f64 = indices.iter().map(|&j| (2 * j + 1) as f64).product::<f64>().sqrt();
    norm / profile.divisor() as f64 * delta.powf(profile.coeff_exponent()) * to_f64(raw)
}

/// Exact `C²` at Δ = 1: `Π(2j+1) / 4^{k+Σl} · C̄²`. Also used for products
/// `C_j C_{π(j)}`, which share the same normalization.
pub(crate) fn unit_norm_factor(profile: WeightProfile, indices: &[usize]) -> Rational {
    let num: u64 = indices.iter().map(|&j| 2 * j as u64 + 1).product();
    let d = profile.divisor();
    Rational::new(BigInt::from(num), BigInt::from(d) * BigInt::from(d))
}

/// Flat position of `(j_1, ..., j_k)` in a table of order `q`.
pub fn flat_index(indices: &[usize], q: usize) -> usize {
    indices.iter().fold(0, |acc, &j| acc * (q + 1) + j)
}

/// Inverse of [`flat_index`].
pub fn unflatten(mut flat: usize, k: usize, q: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = flat % (q + 1);
        flat /= q + 1;
    }
    out
}

/// Exact table of raw coefficients for all `0 <= j_i <= q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTensor {
    profile: WeightProfile,
    q: usize,
    entries: Vec<Rational>,
}

impl CoefficientTensor {
    pub fn profile(&self) -> WeightProfile {
        self.profile
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, indices: &[usize]) -> &Rational {
        &self.entries[flat_index(indices, self.q)]
    }

    /// The same table restricted to indices `<= q`.
    pub fn truncate(&self, q: usize) -> CoefficientTensor {
        assert!(q <= self.q, "cannot extend a table by truncation");
        let k = self.profile.k();
        let n = (q + 1).pow(k as u32);
        let entries = (0..n)
            .map(|f| self.get(&unflatten(f, k, q)).clone())
            .collect();
        CoefficientTensor { profile: self.profile, q, entries }
    }

    /// Exact partial Parseval sum `S(q) = Σ C²` at Δ = 1.
    pub fn parseval_sum_exact(&self) -> Rational {
        let k = self.profile.k();
        let mut s = Rational::zero();
        for (f, c) in self.entries.iter().enumerate() {
            if !c.is_zero() {
                s += unit_norm_factor(self.profile, &unflatten(f, k, self.q)) * c * c;
            }
        }
        s
    }

    /// `S(q)` at step Δ.
    pub fn parseval_sum(&self, delta: f64) -> f64 {
        to_f64(&self.parseval_sum_exact()) * delta.powi(self.profile.mse_exponent())
    }

    /// `I_k - S(q)` at step Δ, evaluated exactly before rounding.
    pub fn parseval_residual(&self, delta: f64) -> f64 {
        let r = self.profile.kernel_norm_exact() - self.parseval_sum_exact();
        to_f64(&r) * delta.powi(self.profile.mse_exponent())
    }

    /// Floating coefficients for a concrete step.
    pub fn scaled(&self, delta: f64) -> ScaledTensor {
        let k = self.profile.k();
        let mut dense = Vec::with_capacity(self.entries.len());
        let mut nonzero = Vec::new();
        for (f, c) in self.entries.iter().enumerate() {
            let idx = unflatten(f, k, self.q);
            let v = scaled_coefficient(c, self.profile, &idx, delta);
            if !c.is_zero() {
                let mut packed = [0u8; 5];
                for (slot, &j) in packed.iter_mut().zip(&idx) {
                    *slot = j as u8;
                }
                nonzero.push((packed, v));
            }
            dense.push(v);
        }
        ScaledTensor { profile: self.profile, q: self.q, delta, dense, nonzero }
    }

    /// Cache file name for this table.
    pub fn file_name(profile: WeightProfile, q: usize) -> String {
        format!("coeff_k{}_l{}_q{}.txt", profile.k(), profile.label(), q)
    }

    /// Text serialization: one `j_1 ... j_k num/den` line per entry.
    pub fn to_text(&self) -> String {
        let k = self.profile.k();
        let mut out = String::new();
        for (f, c) in self.entries.iter().enumerate() {
            for j in unflatten(f, k, self.q) {
                out.push_str(&j.to_string());
                out.push(' ');
            }
            out.push_str(&format!("{}/{}\n", c.numer(), c.denom()));
        }
        out
    }

    pub fn from_text(profile: WeightProfile, q: usize, text: &str) -> Result<Self, String> {
        let k = profile.k();
        let n = (q + 1).pow(k as u32);
        let mut entries = Vec::with_capacity(n);
        for (line_no, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != k + 1 {
                return Err(format!("line {}: expected {} fields", line_no + 1, k + 1));
            }
            let idx: Vec<usize> = fields[..k]
                .iter()
                .map(|s| s.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", line_no + 1))?;
            if idx != unflatten(entries.len(), k, q) || idx.iter().any(|&j| j > q) {
                return Err(format!("line {}: indices out of order", line_no + 1));
            }
            let (num, den) = fields[k]
                .split_once('/')
                .ok_or_else(|| format!("line {}: missing `/`", line_no + 1))?;
            let num: BigInt = num.parse().map_err(|_| format!("line {}: bad numerator", line_no + 1))?;
            let den: BigInt = den.parse().map_err(|_| format!("line {}: bad denominator", line_no + 1))?;
            if den.is_zero() {
                return Err(format!("line {}: zero denominator", line_no + 1));
            }
            entries.push(Rational::new(num, den));
        }
        if entries.len() != n {
            return Err(format!("expected {n} entries, found {}", entries.len()));
        }
        Ok(Self { profile, q, entries })
    }

    /// Writes the table into `dir` and returns the file path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, CoeffError> {
        let path = dir.join(Self::file_name(self.profile, self.q));
        let err = |e: std::io::Error| CoeffError::Cache { path: path.clone(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(err)?;
        let tmp = path.with_extension("txt.tmp");
        let mut file = fs::File::create(&tmp).map_err(err)?;
        file.write_all(self.to_text().as_bytes()).map_err(err)?;
        file.sync_all().map_err(err)?;
        fs::rename(&tmp, &path).map_err(err)?;
        Ok(path)
    }

    /// Reads a cached table; `Ok(None)` when the file does not exist.
    pub fn load(dir: &Path, profile: WeightProfile, q: usize) -> Result<Option<Self>, CoeffError> {
        let path = dir.join(Self::file_name(profile, q));
        match fs::read_to_string(&path) {
            Ok(text) => Self::from_text(profile, q, &text)
                .map(Some)
                .map_err(|message| CoeffError::Cache { path, message }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(CoeffError::Cache { path, message: e.to_string() }),
        }
    }
}

fn table_entries(profile: WeightProfile, q: usize) -> Vec<Rational> {
    let factors = level_factors(profile, q);
    let k = profile.k();
    let m1 = rat(-1, 1);
    let one = Rational::one();

    fn descend(
        factors: &[Vec<RationalPolynomial>],
        level: usize,
        inner: &RationalPolynomial,
        m1: &Rational,
        one: &Rational,
        out: &mut Vec<Rational>,
    ) {
        let last = level + 1 == factors.len();
        for f in &factors[level] {
            let integrand = f * inner;
            if last {
                out.push(integrand.definite_integral(m1, one));
            } else {
                let next = integrand.antiderivative_from(m1);
                descend(factors, level + 1, &next, m1, one, out);
            }
        }
    }

    if k == 1 {
        return factors[0].iter().map(|f| f.definite_integral(&m1, &one)).collect();
    }
    let branches: Vec<Vec<Rational>> = factors[0]
        .par_iter()
        .map(|f| {
            let first = f.antiderivative_from(&m1);
            let mut out = Vec::with_capacity((q + 1).pow(k as u32 - 1));
            descend(&factors, 1, &first, &m1, &one, &mut out);
            out
        })
        .collect();
    branches.into_iter().flatten().collect()
}

/// Computes a complete table without touching any cache.
pub fn build_table(profile: WeightProfile, q: usize) -> Result<CoefficientTensor, CoeffError> {
    build_table_with_max(profile, q, DEFAULT_MAX_INDEX)
}

pub fn build_table_with_max(profile: WeightProfile, q: usize, max_index: usize) -> Result<CoefficientTensor, CoeffError> {
    if q > max_index {
        return Err(CoeffError::IndexTooLarge { index: q, max: max_index });
    }
    Ok(CoefficientTensor { profile, q, entries: table_entries(profile, q) })
}

/// Floating coefficients `C` for one step size, with a sparse list of the
/// nonzero entries for fast contraction.
#[derive(Clone, Debug)]
pub struct ScaledTensor {
    profile: WeightProfile,
    q: usize,
    delta: f64,
    dense: Vec<f64>,
    nonzero: Vec<([u8; 5], f64)>,
}

impl ScaledTensor {
    pub fn profile(&self) -> WeightProfile {
        self.profile
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        self.dense[flat_index(indices, self.q)]
    }

    /// Value at arbitrary indices, zero outside the table.
    pub fn get_or_zero(&self, indices: &[usize]) -> f64 {
        if indices.iter().any(|&j| j > self.q) {
            0.0
        } else {
            self.get(indices)
        }
    }

    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    /// Nonzero entries as `(indices, value)`; only the first `k` index slots are meaningful.
    pub fn nonzero(&self) -> &[([u8; 5], f64)] {
        &self.nonzero
    }
}

/// Settings for [`CoeffStore`].
#[derive(Clone, Debug)]
pub struct CoeffConfig {
    pub max_index: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for CoeffConfig {
    fn default() -> Self {
        Self { max_index: DEFAULT_MAX_INDEX, cache_dir: None }
    }
}

/// Memoizing source of coefficient tables, optionally backed by a cache directory.
///
/// Cache failures never abort a computation: the table is computed in memory
/// and the failure is kept for [`CoeffStore::take_cache_errors`].
#[derive(Debug, Default)]
pub struct CoeffStore {
    config: CoeffConfig,
    tables: Mutex<HashMap<WeightProfile, Arc<CoefficientTensor>>>,
    cache_errors: Mutex<Vec<CoeffError>>,
}

impl CoeffStore {
    pub fn new(config: CoeffConfig) -> Self {
        Self { config, ..Default::default() }
    }

    pub fn config(&self) -> &CoeffConfig {
        &self.config
    }

    pub fn max_index(&self) -> usize {
        self.config.max_index
    }

    /// Cache problems recorded so far (drained).
    pub fn take_cache_errors(&self) -> Vec<CoeffError> {
        std::mem::take(&mut *self.cache_errors.lock().expect("cache error lock"))
    }

    pub fn table(&self, profile: WeightProfile, q: usize) -> Result<Arc<CoefficientTensor>, CoeffError> {
        if q > self.config.max_index {
            return Err(CoeffError::IndexTooLarge { index: q, max: self.config.max_index });
        }
        if let Some(t) = self.tables.lock().expect("table lock").get(&profile) {
            if t.q() == q {
                return Ok(Arc::clone(t));
            }
            if t.q() > q {
                return Ok(Arc::new(t.truncate(q)));
            }
        }
        let table = Arc::new(self.load_or_build(profile, q));
        let mut tables = self.tables.lock().expect("table lock");
        let keep = tables.get(&profile).is_none_or(|t| t.q() < q);
        if keep {
            tables.insert(profile, Arc::clone(&table));
        }
        Ok(table)
    }

    fn record(&self, e: CoeffError) {
        self.cache_errors.lock().expect("cache error lock").push(e);
    }

    fn load_or_build(&self, profile: WeightProfile, q: usize) -> CoefficientTensor {
        if let Some(dir) = &self.config.cache_dir {
            match CoefficientTensor::load(dir, profile, q) {
                Ok(Some(t)) => return t,
                Ok(None) => {}
                Err(e) => self.record(e),
            }
        }
        let t = CoefficientTensor { profile, q, entries: table_entries(profile, q) };
        if let Some(dir) = &self.config.cache_dir {
            if let Err(e) = t.save(dir) {
                self.record(e);
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_metadata() {
        assert_eq!(WeightProfile::P0000.divisor(), 16);
        assert_eq!(WeightProfile::P0000.coeff_exponent(), 2.0);
        assert_eq!(WeightProfile::P100.divisor(), 16);
        assert_eq!("100".parse::<WeightProfile>().unwrap(), WeightProfile::P100);
        assert_eq!("(0,0,1)".parse::<WeightProfile>().unwrap(), WeightProfile::P001);
        assert!("110".parse::<WeightProfile>().is_err());
        assert!("x".parse::<WeightProfile>().is_err());
        for p in WeightProfile::ALL {
            assert_eq!(p.label().parse::<WeightProfile>().unwrap(), p);
        }
    }

    #[test]
    fn kernel_norms() {
        let cases = [
            (WeightProfile::P0, rat(1, 1)),
            (WeightProfile::P1, rat(1, 3)),
            (WeightProfile::P2, rat(1, 5)),
            (WeightProfile::P00, rat(1, 2)),
            (WeightProfile::P01, rat(1, 4)),
            (WeightProfile::P10, rat(1, 12)),
            (WeightProfile::P000, rat(1, 6)),
            (WeightProfile::P100, rat(1, 60)),
            (WeightProfile::P010, rat(1, 20)),
            (WeightProfile::P001, rat(1, 10)),
            (WeightProfile::P0000, rat(1, 24)),
            (WeightProfile::P00000, rat(1, 120)),
        ];
        for (p, want) in cases {
            assert_eq!(p.kernel_norm_exact(), want, "{p}");
        }
        assert!((WeightProfile::P001.kernel_norm(2.0) - 3.2).abs() < 1e-12);
    }

    #[test]
    fn raw_examples() {
        assert_eq!(raw_coefficient(WeightProfile::P000, &[0, 0, 0]).unwrap(), rat(4, 3));
        assert_eq!(raw_coefficient(WeightProfile::P0, &[0]).unwrap(), rat(2, 1));
        let a = raw_coefficient(WeightProfile::P00, &[0, 1]).unwrap();
        let b = raw_coefficient(WeightProfile::P00, &[1, 0]).unwrap();
        assert!((a + b).is_zero());
        assert!(matches!(
            raw_coefficient(WeightProfile::P00, &[0]),
            Err(CoeffError::Arity { expected: 2, got: 1 })
        ));
        assert!(matches!(
            raw_coefficient(WeightProfile::P000, &[0, 17, 0]),
            Err(CoeffError::IndexTooLarge { index: 17, max: 16 })
        ));
    }

    #[test]
    fn scaling() {
        let raw = rat(4, 3);
        let c = scaled_coefficient(&raw, WeightProfile::P000, &[0, 0, 0], 1.0);
        assert!((c - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(scaled_coefficient(&raw, WeightProfile::P000, &[0, 0, 0], 0.0), 0.0);
        let raw = rat(3, 7);
        let idx = [1, 2, 0, 3];
        let base = scaled_coefficient(&raw, WeightProfile::P0000, &idx, 1.0);
        let scaled = scaled_coefficient(&raw, WeightProfile::P0000, &idx, 0.5);
        assert!((scaled - base * 0.25).abs() < 1e-15);
    }

    #[test]
    fn tables_match_single_entries() {
        for p in [WeightProfile::P00, WeightProfile::P01, WeightProfile::P100, WeightProfile::P0000] {
            let t = build_table(p, 2).unwrap();
            assert_eq!(t.len(), 3usize.pow(p.k() as u32));
            for f in 0..t.len() {
                let idx = unflatten(f, p.k(), 2);
                assert_eq!(t.get(&idx), &raw_coefficient(p, &idx).unwrap(), "{p} {idx:?}");
            }
        }
        let t = build_table(WeightProfile::P00, 1).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.get(&[0, 0]), &rat(2, 1));
        assert!((t.scaled(1.0).get(&[0, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(build_table(WeightProfile::P00000, 1).unwrap().len(), 32);
        assert!(build_table(WeightProfile::P000, 17).is_err());
    }

    #[test]
    fn triple_residual_constant() {
        let t = build_table(WeightProfile::P000, 6).unwrap();
        let r = t.parseval_residual(1.0);
        // Frozen from the exact rational sum, cross-checked with an independent symbolic run.
        assert!((r - 0.019553857606871314).abs() < 1e-15, "{r}");
    }

    #[test]
    fn truncation_matches_direct_build() {
        let big = build_table(WeightProfile::P010, 4).unwrap();
        assert_eq!(big.truncate(2), build_table(WeightProfile::P010, 2).unwrap());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let t = build_table(WeightProfile::P100, 2).unwrap();
        let text = t.to_text();
        assert_eq!(text.lines().count(), 27);
        assert!(text.starts_with("0 0 0 "));
        assert_eq!(CoefficientTensor::from_text(WeightProfile::P100, 2, &text).unwrap(), t);
        assert!(CoefficientTensor::from_text(WeightProfile::P100, 3, &text).is_err());
        assert!(CoefficientTensor::from_text(WeightProfile::P100, 2, "0 0 0 1/0\n").is_err());
        assert_eq!(CoefficientTensor::file_name(WeightProfile::P100, 2), "coeff_k3_l100_q2.txt");
    }

    #[test]
    fn store_uses_cache_and_reports_failures() {
        let dir = tempfile::tempdir().unwrap();
        let store = CoeffStore::new(CoeffConfig { cache_dir: Some(dir.path().to_path_buf()), ..Default::default() });
        let t = store.table(WeightProfile::P000, 3).unwrap();
        let path = dir.path().join("coeff_k3_l000_q3.txt");
        assert!(path.exists());
        let bytes = fs::read(&path).unwrap();
        let again = CoeffStore::new(store.config().clone());
        assert_eq!(*again.table(WeightProfile::P000, 3).unwrap(), *t);
        assert_eq!(fs::read(&path).unwrap(), bytes);
        assert_eq!(*store.table(WeightProfile::P000, 1).unwrap(), t.truncate(1));
        assert!(store.take_cache_errors().is_empty());

        fs::write(&path, "garbage\n").unwrap();
        let third = CoeffStore::new(store.config().clone());
        assert_eq!(*third.table(WeightProfile::P000, 3).unwrap(), *t);
        assert_eq!(third.take_cache_errors().len(), 1);

        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let bad = CoeffStore::new(CoeffConfig { cache_dir: Some(blocker.join("sub")), ..Default::default() });
        assert_eq!(*bad.table(WeightProfile::P000, 3).unwrap(), *t);
        assert!(!bad.take_cache_errors().is_empty());
    }
}
