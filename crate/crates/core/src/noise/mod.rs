//! Gaussian basis per step and the iterated-integral approximations built from it.

mod fine_grid;
mod formulas;
mod set;

pub use fine_grid::{FineGrid, FinePath, ValidationReport, validate_family};
pub use formulas::{
    diagonal_closed_form, ito_multi_direct, ito_pair, ito_pair_weighted, ito_single, matchings, strat_diagonal,
    strat_multi, strat_pair, strat_pair_weighted, Matching, PairWeight,
};
pub use set::{IntegralPlan, IntegralSet, Provenance};

use crate::coeff::{CoeffError, WeightProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("integral {profile} with indices {indices:?} is not in the set")]
    MissingIntegral { profile: WeightProfile, indices: Vec<usize> },
    #[error("integral {profile} needs {needed} in the same set")]
    MissingDependency { profile: WeightProfile, needed: WeightProfile },
    #[error("basis holds indices up to {have}, formula needs {needed}")]
    BasisTooSmall { needed: usize, have: usize },
    #[error("{0}")]
    Invalid(String),
}

/// How iterated integrals are approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    /// Itô integrals from the indicator-corrected series.
    ItoDirect,
    /// Stratonovich integrals from the pure product series.
    Stratonovich,
    /// Itô integrals from the Stratonovich series plus exact conversion terms.
    ItoViaStratonovich,
}

impl Route {
    pub fn is_ito(self) -> bool {
        !matches!(self, Route::Stratonovich)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::ItoDirect => "ito-direct",
            Route::Stratonovich => "stratonovich",
            Route::ItoViaStratonovich => "ito-via-stratonovich",
        })
    }
}

/// Truncation order per integral family. Families without a truncation
/// (`0`, `1`, `2`) ignore their entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QSet {
    orders: [usize; 12],
}

impl QSet {
    pub fn uniform(q: usize) -> Self {
        Self { orders: [q; 12] }
    }

    fn slot(p: WeightProfile) -> usize {
        WeightProfile::ALL.iter().position(|&x| x == p).expect("profile listed in ALL")
    }

    pub fn get(&self, p: WeightProfile) -> usize {
        self.orders[Self::slot(p)]
    }

    pub fn set(&mut self, p: WeightProfile, q: usize) {
        self.orders[Self::slot(p)] = q;
    }

    pub fn with(mut self, p: WeightProfile, q: usize) -> Self {
        self.set(p, q);
        self
    }

    /// Largest basis index referenced by the given families.
    pub fn basis_q_max(&self, families: &[WeightProfile]) -> usize {
        families
            .iter()
            .map(|&p| match p {
                WeightProfile::P0 | WeightProfile::P1 | WeightProfile::P2 => 2,
                WeightProfile::P01 | WeightProfile::P10 => self.get(p) + 2,
                _ => self.get(p),
            })
            .max()
            .unwrap_or(2)
            .max(2)
    }
}

/// The matrix `ζ_j^{(i)}` for one step, `j = 0..=q_max`, components `i = 0..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBasis {
    m: usize,
    q_max: usize,
    delta: f64,
    values: Vec<f64>,
}

impl GaussianBasis {
    pub fn zeros(m: usize, q_max: usize, delta: f64) -> Self {
        Self { m, q_max, delta, values: vec![0.0; m * (q_max + 1)] }
    }

    /// Builds a basis from `values[j * m + i]`.
    pub fn from_values(m: usize, q_max: usize, delta: f64, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), m * (q_max + 1), "basis shape");
        Self { m, q_max, delta, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn zeta(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.m + i]
    }

    pub fn set(&mut self, j: usize, i: usize, v: f64) {
        self.values[j * self.m + i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn require(&self, needed: usize) -> Result<(), NoiseError> {
        if needed > self.q_max {
            Err(NoiseError::BasisTooSmall { needed, have: self.q_max })
        } else {
            Ok(())
        }
    }
}

/// Generator for one path: key `(seed, path)`, one ChaCha stream per
/// `(step, component)`, and the `j`-th draw of that stream is `ζ_j`.
///
/// Values are therefore prefix-stable: raising `q_max` or `m` never changes
/// the cells that already existed.
pub fn stream_rng(seed: u64, path: u64, step: u64, component: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&path.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((step << 16) | component as u64);
    rng
}

/// Draws the basis for `(seed, path, step)`.
pub fn draw_basis(seed: u64, path: u64, step: u64, m: usize, q_max: usize, delta: f64) -> GaussianBasis {
    assert!(m >= 1, "at least one noise component");
    assert!(m < 1 << 16, "component index must fit the stream layout");
    let mut b = GaussianBasis::zeros(m, q_max, delta);
    for i in 0..m {
        let mut rng = stream_rng(seed, path, step, i);
        for j in 0..=q_max {
            b.set(j, i, rng.sample(StandardNormal));
        }
    }
    b
}
