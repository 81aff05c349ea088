//! Linear test models `dx = A x dt + Σ S_i x df^{(i)}` and the named registry.

use super::model::{Base, Letter, SdeModel};
use nalgebra::{DMatrix, DVector};

/// Linear model with all composites in closed form: a word `W_1 ... W_r`
/// applied to a linear field `M_0 x` gives `M_0 X_{W_r} ... X_{W_1} x`, with
/// `X_{G_i} = S_i`, `X_L = A` and `X_{L̄} = A - ½ Σ S_j²`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    name: String,
    a: DMatrix<f64>,
    abar: DMatrix<f64>,
    s: Vec<DMatrix<f64>>,
    commuting: bool,
}

impl LinearModel {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, s: Vec<DMatrix<f64>>) -> Self {
        let n = a.nrows();
        assert!(a.is_square(), "drift matrix must be square");
        assert!(!s.is_empty(), "at least one noise component");
        assert!(s.iter().all(|m| m.shape() == (n, n)), "diffusion matrices must match the state size");
        let half_sq = s.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m * m) * 0.5;
        let abar = &a - half_sq;
        let mut commuting = true;
        let mut all = vec![&a];
        all.extend(s.iter());
        for (p, x) in all.iter().enumerate() {
            for y in &all[p + 1..] {
                let c = *x * *y - *y * *x;
                if c.amax() > 1e-14 {
                    commuting = false;
                }
            }
        }
        Self { name: name.into(), a, abar, s, commuting }
    }

    /// `n = 1`: `dx = μ x dt + Σ σ_i x df^{(i)}`.
    pub fn scalar(name: impl Into<String>, mu: f64, sigma: &[f64]) -> Self {
        let s = sigma.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
        Self::new(name, DMatrix::from_element(1, 1, mu), s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when `A` and all `S_i` commute, which makes the exact solution available.
    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    fn letter_matrix(&self, l: Letter) -> &DMatrix<f64> {
        match l {
            Letter::L => &self.a,
            Letter::LBar => &self.abar,
            Letter::G(i) => &self.s[i],
        }
    }
}

impl SdeModel for LinearModel {
    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn m(&self) -> usize {
        self.s.len()
    }

    fn composite(&self, word: &[Letter], base: Base, x: &[f64], _t: f64) -> Vec<f64> {
        // Right to left: v = X_{W_1} x, then X_{W_2} v, ..., then M_0 v.
        let mut v = DVector::from_column_slice(x);
        for &l in word {
            v = self.letter_matrix(l) * v;
        }
        let m0 = match base {
            Base::A => &self.a,
            Base::ABar => &self.abar,
            Base::B(i) => &self.s[i],
        };
        (m0 * v).as_slice().to_vec()
    }

    fn exact(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>> {
        if !self.commuting {
            return None;
        }
        let mut e = &self.abar * t;
        for (si, wi) in self.s.iter().zip(w) {
            e += si * *wi;
        }
        Some((e.exp() * DVector::from_column_slice(x0)).as_slice().to_vec())
    }
}

/// Names accepted by [`model_by_name`].
pub const MODEL_NAMES: [&str; 3] = ["gbm-2noise", "linear", "deterministic"];

/// Registry of test models.
///
/// * `gbm-2noise`: `dx = 0.5 x dt + 0.4 x df¹ + 0.3 x df²`, exact solution known.
/// * `linear`: two-dimensional with non-commuting matrices, no exact solution.
/// * `deterministic`: `dx = -x dt` with one idle noise component.
pub fn model_by_name(name: &str) -> Option<LinearModel> {
    match name {
        "gbm-2noise" => Some(LinearModel::scalar(name, 0.5, &[0.4, 0.3])),
        "linear" => Some(LinearModel::new(
            name,
            DMatrix::from_row_slice(2, 2, &[-0.5, 0.3, 0.2, -0.4]),
            vec![
                DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.2]),
                DMatrix::from_row_slice(2, 2, &[0.0, 0.2, -0.25, 0.1]),
            ],
        )),
        "deterministic" => Some(LinearModel::scalar(name, -1.0, &[0.0])),
        _ => None,
    }
}

/// Default initial state of a registry model.
pub fn default_initial_state(model: &LinearModel) -> Vec<f64> {
    vec![1.0; model.n()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_composites() {
        let m = LinearModel::scalar("g", 0.5, &[0.4, 0.3]);
        let x = [2.0];
        assert_eq!(m.composite(&[], Base::A, &x, 0.0), vec![1.0]);
        assert!((m.composite(&[Letter::G(0)], Base::B(1), &x, 0.0)[0] - 0.24).abs() < 1e-15);
        assert!((m.composite(&[Letter::L, Letter::L], Base::A, &x, 0.0)[0] - 0.25).abs() < 1e-15);
        let abar = 0.5 - 0.5 * (0.16 + 0.09);
        assert!((m.composite(&[], Base::ABar, &x, 0.0)[0] - 2.0 * abar).abs() < 1e-15);
        assert!(m.is_commuting());
    }

    #[test]
    fn word_order() {
        // G_1 L B_0 x = S_0 A S_1 x.
        let m = model_by_name("linear").unwrap();
        assert!(!m.is_commuting());
        let x = [0.7, -1.3];
        let got = m.composite(&[Letter::G(1), Letter::L], Base::B(0), &x, 0.0);
        let want = &m.s[0] * &m.a * &m.s[1] * DVector::from_column_slice(&x);
        assert!((DVector::from_vec(got) - want).amax() < 1e-15);
        assert!(m.exact(&x, 1.0, &[0.0, 0.0]).is_none());
    }

    #[test]
    fn barred_drift_consistency() {
        let m = model_by_name("linear").unwrap();
        let x = [0.4, 0.9];
        let mut want = m.composite(&[], Base::A, &x, 0.0);
        for j in 0..m.m() {
            let gb = m.composite(&[Letter::G(j)], Base::B(j), &x, 0.0);
            for (w, g) in want.iter_mut().zip(gb) {
                *w -= 0.5 * g;
            }
        }
        let got = m.composite(&[], Base::ABar, &x, 0.0);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_solutions() {
        let d = model_by_name("deterministic").unwrap();
        assert!((d.exact(&[1.0], 1.0, &[0.3]).unwrap()[0] - (-1f64).exp()).abs() < 1e-15);
        let g = model_by_name("gbm-2noise").unwrap();
        let v = g.exact(&[1.0], 1.0, &[0.5, -0.2]).unwrap()[0];
        let want = ((0.5 - 0.125) + 0.4 * 0.5 - 0.3 * 0.2f64).exp();
        assert!((v - want).abs() < 1e-14);
        assert!(model_by_name("nope").is_none());
    }
}
