//! Brute-force reference: Brownian increments on a fine grid, the basis
//! projections they induce, and left-point Itô sums of the iterated integrals.

use super::{stream_rng, GaussianBasis, IntegralPlan, NoiseError, QSet, Route};
use crate::coeff::{CoeffStore, WeightProfile};
use crate::legendre::legendre_f64;
use crate::noise::set::conversion_dependencies;
use crate::stats::RunningStats;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Stream slot reserved for fine-grid increments.
const FINE_STREAM_STEP: u64 = 1 << 40;
const CHUNK: u64 = 512;

/// Fine discretization of one step `[τ, τ + Δ]` into `substeps` cells.
#[derive(Clone, Debug)]
pub struct FineGrid {
    m: usize,
    delta: f64,
    substeps: usize,
    q_max: usize,
    /// Cell averages of `φ_j`, `avg[j * substeps + l]`.
    avg: Vec<f64>,
}

impl FineGrid {
    pub fn new(m: usize, delta: f64, substeps: usize, q_max: usize) -> Result<Self, NoiseError> {
        if m == 0 || substeps == 0 || !(delta > 0.0) {
            return Err(NoiseError::Invalid("fine grid needs m >= 1, substeps >= 1 and a positive step".into()));
        }
        let n = substeps;
        let mut avg = vec![0.0; (q_max + 1) * n];
        // ∫ P_j = (P_{j+1} - P_{j-1}) / (2j + 1), with ∫ P_0 = x.
        let anti = |j: usize, x: f64| {
            if j == 0 {
                x
            } else {
                (legendre_f64(j + 1, x) - legendre_f64(j - 1, x)) / (2 * j + 1) as f64
            }
        };
        for j in 0..=q_max {
            let norm = ((2 * j + 1) as f64 / delta).sqrt();
            for l in 0..n {
                let a = -1.0 + 2.0 * l as f64 / n as f64;
                let b = -1.0 + 2.0 * (l + 1) as f64 / n as f64;
                avg[j * n + l] = norm * (anti(j, b) - anti(j, a)) / (b - a);
            }
        }
        Ok(Self { m, delta, substeps, q_max, avg })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    /// Increments for sample `index`; each component has its own stream.
    pub fn sample(&self, seed: u64, index: u64) -> FinePath {
        let n = self.substeps;
        let h = self.delta / n as f64;
        let sh = h.sqrt();
        let mut inc = vec![0.0; self.m * n];
        for i in 0..self.m {
            let mut rng = stream_rng(seed, index, FINE_STREAM_STEP, i);
            for slot in &mut inc[i * n..(i + 1) * n] {
                let z: f64 = rng.sample(StandardNormal);
                *slot = sh * z;
            }
        }
        let mut values = vec![0.0; (self.q_max + 1) * self.m];
        for j in 0..=self.q_max {
            let w = &self.avg[j * n..(j + 1) * n];
            for i in 0..self.m {
                let dw = &inc[i * n..(i + 1) * n];
                values[j * self.m + i] = w.iter().zip(dw).map(|(a, b)| a * b).sum();
            }
        }
        FinePath {
            h,
            substeps: n,
            increments: inc,
            basis: GaussianBasis::from_values(self.m, self.q_max, self.delta, values),
        }
    }
}

/// One sampled fine path together with its induced basis.
#[derive(Clone, Debug)]
pub struct FinePath {
    h: f64,
    substeps: usize,
    increments: Vec<f64>,
    basis: GaussianBasis,
}

impl FinePath {
    pub fn basis(&self) -> &GaussianBasis {
        &self.basis
    }

    pub fn increments(&self, i: usize) -> &[f64] {
        &self.increments[i * self.substeps..(i + 1) * self.substeps]
    }

    /// Left-point Itô sum of `I_(l_1...l_k)^{(i_1...i_k)}` with the weight
    /// `(τ - s)^l` taken at cell midpoints.
    pub fn ito_iterated(&self, profile: WeightProfile, comps: &[usize]) -> f64 {
        let ls = profile.exponents();
        let k = ls.len();
        assert_eq!(comps.len(), k, "component count");
        let mut acc = [0.0f64; 5];
        for l in 0..self.substeps {
            let t = -(l as f64 + 0.5) * self.h;
            // Descending so every level reads the strictly earlier partial sum.
            for r in (0..k).rev() {
                let w = t.powi(ls[r] as i32) * self.increments[comps[r] * self.substeps + l];
                acc[r] += if r == 0 { w } else { w * acc[r - 1] };
            }
        }
        acc[k - 1]
    }
}

/// Empirical mean-square gap between an approximation and the fine-grid reference.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub profile: WeightProfile,
    pub components: Vec<usize>,
    pub route: Route,
    pub q: usize,
    pub samples: u64,
    pub substeps: usize,
    pub mse: f64,
    pub std_error: f64,
}

impl ValidationReport {
    /// `(mse - predicted) / std_error`.
    pub fn z_score(&self, predicted: f64) -> f64 {
        (self.mse - predicted) / self.std_error
    }
}

/// Monte-Carlo estimate of `E[(I - I^q)^2]` for one Itô integral.
///
/// Samples are processed in fixed chunks that are merged in order, so the
/// result does not depend on the number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn validate_family(
    store: &CoeffStore,
    profile: WeightProfile,
    components: &[usize],
    route: Route,
    q: usize,
    samples: u64,
    substeps: usize,
    seed: u64,
) -> Result<ValidationReport, NoiseError> {
    if !route.is_ito() {
        return Err(NoiseError::Invalid("the fine-grid reference computes Itô integrals only".into()));
    }
    if components.len() != profile.k() {
        return Err(NoiseError::Invalid(format!("{profile} takes {} components", profile.k())));
    }
    let m = components.iter().max().map_or(1, |&i| i + 1);
    let mut families = vec![profile];
    if route == Route::ItoViaStratonovich {
        fn close(p: WeightProfile, out: &mut Vec<WeightProfile>) {
            for &d in conversion_dependencies(p) {
                if !out.contains(&d) {
                    out.push(d);
                    close(d, out);
                }
            }
        }
        close(profile, &mut families);
    }
    let delta = 1.0;
    let plan = IntegralPlan::new(store, route, m, delta, QSet::uniform(q), &families)?;
    let grid = FineGrid::new(m, delta, substeps, plan.basis_q_max())?;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<RunningStats, NoiseError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = RunningStats::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let path = grid.sample(seed, idx);
                let approx = plan.value(path.basis(), profile, components)?;
                let exact = path.ito_iterated(profile, components);
                s.push((exact - approx).powi(2));
            }
            Ok(s)
        })
        .collect();
    let mut total = RunningStats::new();
    for p in parts {
        total.merge(&p?);
    }
    Ok(ValidationReport {
        profile,
        components: components.to_vec(),
        route,
        q,
        samples,
        substeps,
        mse: total.mean(),
        std_error: total.std_error(),
    })
}
