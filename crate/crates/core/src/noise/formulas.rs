//! Closed forms and truncated Legendre-series expansions of single integrals.
//!
//! Component indices are zero-based. Multi-index arguments are listed
//! innermost integration first, `(i_1, ..., i_k)`, matching the tensor layout.

use super::{GaussianBasis, NoiseError};
use crate::coeff::{ScaledTensor, WeightProfile};

/// `I_(l)` for `l ∈ {0, 1, 2}`; exact in distribution and identical in both calculi.
pub fn ito_single(b: &GaussianBasis, i: usize, l: u8) -> Result<f64, NoiseError> {
    let d = b.delta();
    match l {
        0 => Ok(d.sqrt() * b.zeta(0, i)),
        1 => {
            b.require(1)?;
            Ok(-d.powf(1.5) / 2.0 * (b.zeta(0, i) + b.zeta(1, i) / 3f64.sqrt()))
        }
        2 => {
            b.require(2)?;
            Ok(d.powf(2.5) / 3.0
                * (b.zeta(0, i) + 3f64.sqrt() / 2.0 * b.zeta(1, i) + b.zeta(2, i) / (2.0 * 5f64.sqrt())))
        }
        _ => Err(NoiseError::Invalid(format!("single integrals take l in 0..=2, got {l}"))),
    }
}

fn pair_core(b: &GaussianBasis, i1: usize, i2: usize, q: usize) -> Result<f64, NoiseError> {
    b.require(q)?;
    let mut s = b.zeta(0, i1) * b.zeta(0, i2);
    for r in 1..=q {
        let c = 1.0 / ((4 * r * r - 1) as f64).sqrt();
        s += c * (b.zeta(r - 1, i1) * b.zeta(r, i2) - b.zeta(r, i1) * b.zeta(r - 1, i2));
    }
    Ok(s)
}

/// Itô `I_(00)^{(i_1 i_2)}` truncated at `q`, including the `-1_{i_1=i_2}` correction.
pub fn ito_pair(b: &GaussianBasis, i1: usize, i2: usize, q: usize) -> Result<f64, NoiseError> {
    let corr = if i1 == i2 { 1.0 } else { 0.0 };
    Ok(b.delta() / 2.0 * (pair_core(b, i1, i2, q)? - corr))
}

/// Stratonovich `I*_(00)^{(i_1 i_2)}` truncated at `q`.
pub fn strat_pair(b: &GaussianBasis, i1: usize, i2: usize, q: usize) -> Result<f64, NoiseError> {
    Ok(b.delta() / 2.0 * pair_core(b, i1, i2, q)?)
}

/// Which weighted pair: `01` carries the weight on the outer integration, `10` on the inner one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairWeight {
    W01,
    W10,
}

impl PairWeight {
    pub fn profile(self) -> WeightProfile {
        match self {
            PairWeight::W01 => WeightProfile::P01,
            PairWeight::W10 => WeightProfile::P10,
        }
    }
}

/// Bracketed series of the weighted pair. `diag_shift` is subtracted from every
/// coincident product `ζ_r^{(i_1)} ζ_r^{(i_2)}`.
fn weighted_core(
    b: &GaussianBasis,
    i1: usize,
    i2: usize,
    q: usize,
    which: PairWeight,
    diag_shift: f64,
) -> Result<f64, NoiseError> {
    b.require(q + 2)?;
    let z = |j: usize, i: usize| b.zeta(j, i);
    let mut s = match which {
        PairWeight::W01 => z(0, i1) * z(1, i2),
        PairWeight::W10 => z(0, i2) * z(1, i1),
    } / 3f64.sqrt();
    for r in 0..=q {
        let rf = r as f64;
        let den = (((2 * r + 1) * (2 * r + 5)) as f64).sqrt() * (2.0 * rf + 3.0);
        let diag = (z(r, i1) * z(r, i2) - diag_shift) / ((2.0 * rf - 1.0) * (2.0 * rf + 3.0));
        match which {
            PairWeight::W01 => {
                s += ((rf + 2.0) * z(r, i1) * z(r + 2, i2) - (rf + 1.0) * z(r + 2, i1) * z(r, i2)) / den - diag;
            }
            PairWeight::W10 => {
                s += ((rf + 1.0) * z(r + 2, i2) * z(r, i1) - (rf + 2.0) * z(r, i2) * z(r + 2, i1)) / den + diag;
            }
        }
    }
    Ok(s)
}

/// Itô weighted pair `I_(01)` or `I_(10)` truncated at `q`.
///
/// Every coincident product `ζ_r^{(i_1)} ζ_r^{(i_2)}` carries its `-1_{i_1=i_2}`
/// correction (the `I_(00)` part through [`ito_pair`], the diagonal of the
/// bracket explicitly), so the approximation has mean zero for every `q`.
pub fn ito_pair_weighted(
    b: &GaussianBasis,
    i1: usize,
    i2: usize,
    q: usize,
    which: PairWeight,
) -> Result<f64, NoiseError> {
    let shift = if i1 == i2 { 1.0 } else { 0.0 };
    let d = b.delta();
    Ok(-d / 2.0 * ito_pair(b, i1, i2, q)? - d * d / 4.0 * weighted_core(b, i1, i2, q, which, shift)?)
}

/// Stratonovich weighted pair `I*_(01)` or `I*_(10)` truncated at `q`.
pub fn strat_pair_weighted(
    b: &GaussianBasis,
    i1: usize,
    i2: usize,
    q: usize,
    which: PairWeight,
) -> Result<f64, NoiseError> {
    let d = b.delta();
    Ok(-d / 2.0 * strat_pair(b, i1, i2, q)? - d * d / 4.0 * weighted_core(b, i1, i2, q, which, 0.0)?)
}

/// A set of disjoint position pairs among `0..k` plus the unpaired positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub free: Vec<usize>,
}

impl Matching {
    /// `(-1)^{number of pairs}`.
    pub fn sign(&self) -> f64 {
        if self.pairs.len() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// True when every pair joins equal component indices.
    pub fn active_for(&self, comps: &[usize]) -> bool {
        self.pairs.iter().all(|&(a, b)| comps[a] == comps[b])
    }
}

/// All matchings of `k` positions, the empty one first.
///
/// For `k = 3, 4, 5` these give exactly the single and double
/// `1_{i=i'} 1_{j=j'}` correction terms of the Itô expansions.
pub fn matchings(k: usize) -> Vec<Matching> {
    fn rec(rest: &[usize], pairs: &mut Vec<(usize, usize)>, free: &mut Vec<usize>, out: &mut Vec<Matching>) {
        let Some((&first, tail)) = rest.split_first() else {
            let mut free_sorted = free.clone();
            free_sorted.sort_unstable();
            out.push(Matching { pairs: pairs.clone(), free: free_sorted });
            return;
        };
        free.push(first);
        rec(tail, pairs, free, out);
        free.pop();
        for (pos, &partner) in tail.iter().enumerate() {
            let mut remaining: Vec<usize> = tail.to_vec();
            remaining.remove(pos);
            pairs.push((first, partner));
            rec(&remaining, pairs, free, out);
            pairs.pop();
        }
    }
    let positions: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    rec(&positions, &mut Vec::new(), &mut Vec::new(), &mut out);
    out.sort_by_key(|m| m.pairs.len());
    out
}

fn check_tensor(b: &GaussianBasis, tensor: &ScaledTensor, comps: &[usize]) -> Result<(), NoiseError> {
    if comps.len() != tensor.profile().k() {
        return Err(NoiseError::Invalid(format!(
            "{} indices for a multiplicity-{} integral",
            comps.len(),
            tensor.profile().k()
        )));
    }
    b.require(tensor.q())
}

/// `Σ_j C_j Σ_{matchings} (-1)^{|M|} Π_{pairs} 1_{j_a=j_b} Π_{free} ζ`, with the
/// matchings already filtered to those active for `comps`.
pub(crate) fn wick_sum(b: &GaussianBasis, tensor: &ScaledTensor, comps: &[usize], active: &[&Matching]) -> f64 {
    let k = comps.len();
    let mut total = 0.0;
    let mut z = [0.0f64; 5];
    for (idx, c) in tensor.nonzero() {
        for l in 0..k {
            z[l] = b.zeta(idx[l] as usize, comps[l]);
        }
        let mut poly = 0.0;
        for m in active {
            if m.pairs.iter().all(|&(a, c)| idx[a] == idx[c]) {
                let mut p = m.sign();
                for &f in &m.free {
                    p *= z[f];
                }
                poly += p;
            }
        }
        total += c * poly;
    }
    total
}

/// `Σ_j C_j Π ζ` (no corrections).
pub(crate) fn product_sum(b: &GaussianBasis, tensor: &ScaledTensor, comps: &[usize]) -> f64 {
    let mut total = 0.0;
    for (idx, c) in tensor.nonzero() {
        let mut p = *c;
        for (l, &i) in comps.iter().enumerate() {
            p *= b.zeta(idx[l] as usize, i);
        }
        total += p;
    }
    total
}

/// Itô multiplicity-`k` integral (`k = 3, 4, 5`, any weight profile in the tensor)
/// from the indicator-corrected series.
pub fn ito_multi_direct(b: &GaussianBasis, tensor: &ScaledTensor, comps: &[usize]) -> Result<f64, NoiseError> {
    check_tensor(b, tensor, comps)?;
    let all = matchings(comps.len());
    let active: Vec<&Matching> = all.iter().filter(|m| m.active_for(comps)).collect();
    Ok(wick_sum(b, tensor, comps, &active))
}

/// Stratonovich multiplicity-`k` integral from the pure product series.
pub fn strat_multi(b: &GaussianBasis, tensor: &ScaledTensor, comps: &[usize]) -> Result<f64, NoiseError> {
    check_tensor(b, tensor, comps)?;
    Ok(product_sum(b, tensor, comps))
}

/// Itô integral with all components equal to `i` and zero weights:
/// `Δ^{k/2} He_k(ζ_0) / k!` for `k = 1..=5`.
pub fn diagonal_closed_form(b: &GaussianBasis, i: usize, k: usize) -> Result<f64, NoiseError> {
    let z = b.zeta(0, i);
    let d = b.delta();
    let v = match k {
        1 => d.sqrt() * z,
        2 => d / 2.0 * (z * z - 1.0),
        3 => d.powf(1.5) / 6.0 * (z.powi(3) - 3.0 * z),
        4 => d * d / 24.0 * (z.powi(4) - 6.0 * z * z + 3.0),
        5 => d.powf(2.5) / 120.0 * (z.powi(5) - 10.0 * z.powi(3) + 15.0 * z),
        _ => return Err(NoiseError::Invalid(format!("diagonal closed form for k = {k}"))),
    };
    Ok(v)
}

/// Stratonovich counterpart of [`diagonal_closed_form`]: `(sqrt(Δ) ζ_0)^k / k!`.
pub fn strat_diagonal(b: &GaussianBasis, i: usize, k: usize) -> Result<f64, NoiseError> {
    if !(1..=5).contains(&k) {
        return Err(NoiseError::Invalid(format!("diagonal closed form for k = {k}")));
    }
    let w = b.delta().sqrt() * b.zeta(0, i);
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    Ok(w.powi(k as i32) / fact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::build_table;

    fn basis_with(m: usize, q: usize, delta: f64, cells: &[(usize, usize, f64)]) -> GaussianBasis {
        let mut b = GaussianBasis::zeros(m, q, delta);
        for &(j, i, v) in cells {
            b.set(j, i, v);
        }
        b
    }

    #[test]
    fn single_examples() {
        let b = basis_with(1, 2, 1.0, &[(0, 0, 1.0)]);
        assert_eq!(ito_single(&b, 0, 0).unwrap(), 1.0);
        let z = GaussianBasis::zeros(1, 2, 1.0);
        assert_eq!(ito_single(&z, 0, 1).unwrap(), 0.0);
        let b = basis_with(1, 2, 1.0, &[(0, 0, 3.0)]);
        assert!((ito_single(&b, 0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(ito_single(&b, 0, 3).is_err());
        assert!(matches!(
            ito_single(&GaussianBasis::zeros(1, 1, 1.0), 0, 2),
            Err(NoiseError::BasisTooSmall { needed: 2, have: 1 })
        ));
    }

    #[test]
    fn pair_examples() {
        let z = GaussianBasis::zeros(2, 5, 1.0);
        assert_eq!(ito_pair(&z, 0, 0, 3).unwrap(), -0.5);
        assert_eq!(ito_pair(&z, 0, 1, 3).unwrap(), 0.0);
        assert_eq!(strat_pair(&z, 0, 0, 3).unwrap(), 0.0);
        let b = basis_with(1, 3, 2.0, &[(0, 0, 1.5), (1, 0, -0.3), (2, 0, 0.8)]);
        // Equal components: the antisymmetric terms cancel and the series is exact.
        assert!((ito_pair(&b, 0, 0, 3).unwrap() - diagonal_closed_form(&b, 0, 2).unwrap()).abs() < 1e-15);
        assert!((strat_pair(&b, 0, 0, 3).unwrap() - strat_diagonal(&b, 0, 2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn weighted_pair_at_zero() {
        let z = GaussianBasis::zeros(2, 6, 1.0);
        for q in 0..=4 {
            let tail = (1.0 / (2 * q + 1) as f64 + 1.0 / (2 * q + 3) as f64) / 16.0;
            for w in [PairWeight::W01, PairWeight::W10] {
                let v = ito_pair_weighted(&z, 0, 0, q, w).unwrap();
                let sign = if w == PairWeight::W01 { 1.0 } else { -1.0 };
                assert!((v - (0.25 + sign * tail)).abs() < 1e-15, "{q} {w:?} {v}");
                assert_eq!(ito_pair_weighted(&z, 0, 1, q, w).unwrap(), 0.0);
                assert_eq!(strat_pair_weighted(&z, 0, 0, q, w).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn weighted_pairs_sum_identity() {
        // For distinct components, I_(01)^{(ab)} + I_(10)^{(ba)} = I_(0)^{(a)} I_(1)^{(b)};
        // the truncated series obey the identity exactly for every q.
        let b = basis_with(
            2,
            8,
            0.7,
            &[(0, 0, 0.4), (1, 0, -1.2), (2, 1, 0.9), (0, 1, 1.1), (1, 1, 0.3), (3, 0, 0.6), (4, 1, -0.8)],
        );
        for q in 0..=4 {
            let s = ito_pair_weighted(&b, 0, 1, q, PairWeight::W01).unwrap()
                + ito_pair_weighted(&b, 1, 0, q, PairWeight::W10).unwrap();
            let prod = ito_single(&b, 0, 0).unwrap() * ito_single(&b, 1, 1).unwrap();
            assert!((s - prod).abs() < 1e-12, "{q} {s} {prod}");
        }
    }

    #[test]
    fn matching_counts() {
        assert_eq!(matchings(2).len(), 2);
        assert_eq!(matchings(3).len(), 4);
        assert_eq!(matchings(4).len(), 10);
        let m5 = matchings(5);
        assert_eq!(m5.len(), 26);
        assert_eq!(m5.iter().filter(|m| m.pairs.len() == 1).count(), 10);
        assert_eq!(m5.iter().filter(|m| m.pairs.len() == 2).count(), 15);
        assert!(m5[0].pairs.is_empty());
        assert_eq!(m5[0].free, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn multi_at_zero_basis() {
        let t3 = build_table(WeightProfile::P000, 3).unwrap().scaled(1.0);
        let z = GaussianBasis::zeros(2, 3, 1.0);
        assert_eq!(ito_multi_direct(&z, &t3, &[0, 0, 1]).unwrap(), 0.0);
        let t4 = build_table(WeightProfile::P0000, 0).unwrap().scaled(1.0);
        let z = GaussianBasis::zeros(2, 2, 1.0);
        let v = ito_multi_direct(&z, &t4, &[0, 0, 1, 1]).unwrap();
        assert!((v - t4.get(&[0, 0, 0, 0])).abs() < 1e-15);
        let ones = GaussianBasis::from_values(3, 2, 1.0, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let t = build_table(WeightProfile::P000, 0).unwrap().scaled(1.0);
        assert!((strat_multi(&ones, &t, &[0, 1, 2]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_examples() {
        let b = basis_with(1, 2, 1.0, &[(0, 0, 2.0)]);
        assert!((diagonal_closed_form(&b, 0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let b = basis_with(1, 2, 1.0, &[(0, 0, 1.0)]);
        assert!((diagonal_closed_form(&b, 0, 4).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        let z = GaussianBasis::zeros(1, 2, 1.0);
        assert_eq!(diagonal_closed_form(&z, 0, 3).unwrap(), 0.0);
    }

    #[test]
    fn direct_series_is_exact_on_the_diagonal() {
        // Symmetrizing the kernel over all positions leaves only the j = 0 term,
        // so with one shared component the series reproduces the Hermite form.
        let b = basis_with(1, 3, 0.6, &[(0, 0, 0.9), (1, 0, -1.4), (2, 0, 0.35), (3, 0, 2.1)]);
        for (p, k) in [(WeightProfile::P000, 3), (WeightProfile::P0000, 4), (WeightProfile::P00000, 5)] {
            let t = build_table(p, 3).unwrap().scaled(0.6);
            let comps = vec![0; k];
            let series = ito_multi_direct(&b, &t, &comps).unwrap();
            let closed = diagonal_closed_form(&b, 0, k).unwrap();
            assert!((series - closed).abs() < 1e-12, "{p}: {series} vs {closed}");
            let strat = strat_multi(&b, &t, &comps).unwrap();
            assert!((strat - strat_diagonal(&b, 0, k).unwrap()).abs() < 1e-12, "{p}");
        }
    }
}
