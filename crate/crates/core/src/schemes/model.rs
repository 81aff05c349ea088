//! SDE models expressed through the composite operator values the schemes consume.

/// One operator letter of a composite such as `G_{i_3} L G_{i_2} B_{i_1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    /// `L = ∂_t + Σ a_k ∂_k + ½ Σ B_{lj} B_{kj} ∂_l ∂_k`.
    L,
    /// `L̄ = L - ½ Σ_j G_j G_j`.
    LBar,
    /// `G_i = Σ_k B_{ki} ∂_k` (zero-based `i`).
    G(usize),
}

/// The field a word of letters is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    /// Drift `a`.
    A,
    /// `ā = a - ½ Σ_j G_j B_j`.
    ABar,
    /// Column `B_i` of the diffusion.
    B(usize),
}

/// An SDE `dx = a(x,t) dt + Σ_i B_i(x,t) df^{(i)}` that can evaluate the
/// operator composites appearing in the schemes.
///
/// `composite(&[W_1, ..., W_r], base, x, t)` returns `W_1 W_2 ... W_r base`
/// evaluated at `(x, t)`, the leftmost letter applied last.
pub trait SdeModel: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn composite(&self, word: &[Letter], base: Base, x: &[f64], t: f64) -> Vec<f64>;

    fn drift(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.composite(&[], Base::A, x, t)
    }

    fn diffusion_column(&self, i: usize, x: &[f64], t: f64) -> Vec<f64> {
        self.composite(&[], Base::B(i), x, t)
    }

    /// Exact `x(t)` given the Wiener values `f_t^{(i)}`, when known.
    fn exact(&self, _x0: &[f64], _t: f64, _w: &[f64]) -> Option<Vec<f64>> {
        None
    }
}
