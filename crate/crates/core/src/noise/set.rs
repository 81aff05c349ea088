//! Per-step assembly of every iterated integral a scheme needs, from one shared basis.

use super::formulas::{
    diagonal_closed_form, ito_pair, ito_pair_weighted, ito_single, matchings, product_sum, strat_diagonal,
    strat_pair, strat_pair_weighted, wick_sum, Matching, PairWeight,
};
use super::{draw_basis, GaussianBasis, NoiseError, QSet, Route};
use crate::coeff::{CoeffStore, ScaledTensor, WeightProfile};
use WeightProfile::*;

/// Which formula produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Exact-in-distribution single-integral form.
    ClosedForm,
    /// Hermite form in `ζ_0` for coincident components and zero weights.
    DiagonalClosedForm,
    /// Truncated Legendre series (indicator-corrected for Itô).
    Series,
    /// Stratonovich series plus exact conversion terms.
    Converted,
}

#[derive(Clone, Debug)]
enum Eval {
    Single(u8),
    Pair,
    Weighted(PairWeight),
    Diagonal,
    Wick(Vec<usize>),
    Product,
    Converted,
}

#[derive(Clone, Debug)]
struct FamilyPlan {
    profile: WeightProfile,
    q: usize,
    tensor: Option<ScaledTensor>,
    tuples: Vec<(Vec<usize>, Eval)>,
}

/// Families whose values enter the conversion of `profile` on the combined route.
pub fn conversion_dependencies(profile: WeightProfile) -> &'static [WeightProfile] {
    match profile {
        P000 => &[P0, P1],
        P100 | P010 | P001 => &[P0, P1, P2],
        P0000 => &[P00, P01, P10],
        P00000 => &[P0, P1, P2, P000, P100, P010, P001],
        _ => &[],
    }
}

fn slot(p: WeightProfile) -> usize {
    WeightProfile::ALL.iter().position(|&x| x == p).expect("profile listed in ALL")
}

fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let total = m.pow(k as u32);
    (0..total)
        .map(|mut f| {
            let mut c = vec![0; k];
            for slot in c.iter_mut() {
                *slot = f % m;
                f /= m;
            }
            c
        })
        .collect()
}

fn flat(comps: &[usize], m: usize) -> usize {
    comps.iter().rev().fold(0, |acc, &i| acc * m + i)
}

fn recipe(route: Route, p: WeightProfile, comps: &[usize], all_matchings: &[Vec<Matching>; 6]) -> Eval {
    let k = comps.len();
    let all_equal = comps.iter().all(|&i| i == comps[0]);
    match k {
        1 => Eval::Single(p.exponents()[0]),
        2 => match p {
            P00 => Eval::Pair,
            P01 => Eval::Weighted(PairWeight::W01),
            _ => Eval::Weighted(PairWeight::W10),
        },
        _ if all_equal && p.is_unweighted() => Eval::Diagonal,
        _ => match route {
            Route::ItoDirect => Eval::Wick(
                all_matchings[k]
                    .iter()
                    .enumerate()
                    .filter(|(_, mt)| mt.active_for(comps))
                    .map(|(n, _)| n)
                    .collect(),
            ),
            Route::Stratonovich => Eval::Product,
            Route::ItoViaStratonovich => Eval::Converted,
        },
    }
}

/// Precomputed coefficients and evaluation recipes for one `(route, m, Δ, q)` setting.
#[derive(Clone, Debug)]
pub struct IntegralPlan {
    route: Route,
    m: usize,
    delta: f64,
    qset: QSet,
    families: Vec<WeightProfile>,
    plans: Vec<FamilyPlan>,
    matchings: [Vec<Matching>; 6],
    basis_q_max: usize,
}

impl IntegralPlan {
    pub fn new(
        store: &CoeffStore,
        route: Route,
        m: usize,
        delta: f64,
        qset: QSet,
        families: &[WeightProfile],
    ) -> Result<Self, NoiseError> {
        if m == 0 {
            return Err(NoiseError::Invalid("at least one noise component is required".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(NoiseError::Invalid(format!("step must be positive, got {delta}")));
        }
        let mut fams: Vec<WeightProfile> = families.to_vec();
        fams.sort();
        fams.dedup();
        if route == Route::ItoViaStratonovich {
            for &p in &fams {
                for &needed in conversion_dependencies(p) {
                    if !fams.contains(&needed) {
                        return Err(NoiseError::MissingDependency { profile: p, needed });
                    }
                }
            }
        }
        let all_matchings = [matchings(0), matchings(1), matchings(2), matchings(3), matchings(4), matchings(5)];
        let mut plans = Vec::with_capacity(fams.len());
        for &p in &fams {
            let k = p.k();
            let q = qset.get(p);
            let tensor = if k >= 3 { Some(store.table(p, q)?.scaled(delta)) } else { None };
            let fam_tuples = tuples(m, k).into_iter().map(|c| {
                let e = recipe(route, p, &c, &all_matchings);
                (c, e)
            });
            let fam_tuples = fam_tuples.collect();
            plans.push(FamilyPlan { profile: p, q, tensor, tuples: fam_tuples });
        }
        Ok(Self {
            route,
            m,
            delta,
            qset,
            basis_q_max: qset.basis_q_max(&fams),
            families: fams,
            plans,
            matchings: all_matchings,
        })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn qset(&self) -> QSet {
        self.qset
    }

    pub fn families(&self) -> &[WeightProfile] {
        &self.families
    }

    /// Basis size the plan reads from.
    pub fn basis_q_max(&self) -> usize {
        self.basis_q_max
    }

    /// Draws the basis for `(seed, path, step)` at the plan's size.
    pub fn draw(&self, seed: u64, path: u64, step: u64) -> GaussianBasis {
        draw_basis(seed, path, step, self.m, self.basis_q_max, self.delta)
    }

    /// Evaluates every family on `basis`. Families are visited by increasing
    /// multiplicity, so conversions can read the lower members already stored.
    pub fn evaluate(&self, basis: &GaussianBasis) -> Result<IntegralSet, NoiseError> {
        if basis.m() != self.m || basis.delta() != self.delta {
            return Err(NoiseError::Invalid("basis does not match the plan's m and step".into()));
        }
        basis.require(self.basis_q_max)?;
        let mut set = IntegralSet { route: self.route, m: self.m, families: Default::default() };
        for fp in &self.plans {
            let mut values = Vec::with_capacity(fp.tuples.len());
            let mut prov = Vec::with_capacity(fp.tuples.len());
            for (comps, eval) in &fp.tuples {
                let (v, pr) = self.eval_one(basis, fp, comps, eval, &|p, c| set.get(p, c))?;
                values.push(v);
                prov.push(pr);
            }
            set.families[slot(fp.profile)] = Some(Family { q: fp.q, values, provenance: prov });
        }
        Ok(set)
    }

    /// Value of a single integral without assembling the whole set; conversions
    /// recurse into the lower members they need.
    pub fn value(&self, basis: &GaussianBasis, p: WeightProfile, comps: &[usize]) -> Result<f64, NoiseError> {
        let fp = self
            .plans
            .iter()
            .find(|f| f.profile == p)
            .ok_or_else(|| NoiseError::MissingIntegral { profile: p, indices: comps.to_vec() })?;
        if comps.len() != p.k() || comps.iter().any(|&i| i >= self.m) {
            return Err(NoiseError::MissingIntegral { profile: p, indices: comps.to_vec() });
        }
        basis.require(self.basis_q_max)?;
        let eval = recipe(self.route, p, comps, &self.matchings);
        Ok(self.eval_one(basis, fp, comps, &eval, &|q, c| self.value(basis, q, c))?.0)
    }

    fn eval_one(
        &self,
        b: &GaussianBasis,
        fp: &FamilyPlan,
        comps: &[usize],
        eval: &Eval,
        lower: &dyn Fn(WeightProfile, &[usize]) -> Result<f64, NoiseError>,
    ) -> Result<(f64, Provenance), NoiseError> {
        let ito = self.route.is_ito();
        let k = comps.len();
        Ok(match eval {
            Eval::Single(l) => (ito_single(b, comps[0], *l)?, Provenance::ClosedForm),
            Eval::Pair => {
                let v = if ito { ito_pair(b, comps[0], comps[1], fp.q)? } else { strat_pair(b, comps[0], comps[1], fp.q)? };
                (v, Provenance::Series)
            }
            Eval::Weighted(w) => {
                let v = if ito {
                    ito_pair_weighted(b, comps[0], comps[1], fp.q, *w)?
                } else {
                    strat_pair_weighted(b, comps[0], comps[1], fp.q, *w)?
                };
                (v, Provenance::Series)
            }
            Eval::Diagonal => {
                let v = if ito { diagonal_closed_form(b, comps[0], k)? } else { strat_diagonal(b, comps[0], k)? };
                (v, Provenance::DiagonalClosedForm)
            }
            Eval::Wick(active) => {
                let t = fp.tensor.as_ref().expect("tensor for multiplicity >= 3");
                let ms: Vec<&Matching> = active.iter().map(|&n| &self.matchings[k][n]).collect();
                (wick_sum(b, t, comps, &ms), Provenance::Series)
            }
            Eval::Product => {
                let t = fp.tensor.as_ref().expect("tensor for multiplicity >= 3");
                (product_sum(b, t, comps), Provenance::Series)
            }
            Eval::Converted => {
                let t = fp.tensor.as_ref().expect("tensor for multiplicity >= 3");
                let star = product_sum(b, t, comps);
                (star + conversion(fp.profile, comps, self.delta, lower)?, Provenance::Converted)
            }
        })
    }
}

fn ind(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Itô minus Stratonovich, written with the Itô values of lower families.
fn conversion(
    p: WeightProfile,
    c: &[usize],
    d: f64,
    g: &dyn Fn(WeightProfile, &[usize]) -> Result<f64, NoiseError>,
) -> Result<f64, NoiseError> {
    Ok(match p {
        P000 => {
            0.5 * ind(c[0], c[1]) * g(P1, &[c[2]])?
                - 0.5 * ind(c[1], c[2]) * (d * g(P0, &[c[0]])? + g(P1, &[c[0]])?)
        }
        P001 => {
            0.5 * ind(c[0], c[1]) * g(P2, &[c[2]])?
                + 0.25 * ind(c[1], c[2]) * (d * d * g(P0, &[c[0]])? - g(P2, &[c[0]])?)
        }
        P010 => {
            0.25 * ind(c[0], c[1]) * g(P2, &[c[2]])?
                + 0.25 * ind(c[1], c[2]) * (d * d * g(P0, &[c[0]])? - g(P2, &[c[0]])?)
        }
        P100 => {
            0.25 * ind(c[0], c[1]) * g(P2, &[c[2]])?
                - 0.5 * ind(c[1], c[2]) * (g(P2, &[c[0]])? + d * g(P1, &[c[0]])?)
        }
        P0000 => {
            let (e12, e23, e34) = (ind(c[0], c[1]), ind(c[1], c[2]), ind(c[2], c[3]));
            0.5 * e12 * g(P10, &[c[2], c[3]])?
                - 0.5 * e23 * (g(P10, &[c[0], c[3]])? - g(P01, &[c[0], c[3]])?)
                - 0.5 * e34 * (d * g(P00, &[c[0], c[1]])? + g(P01, &[c[0], c[1]])?)
                - 0.125 * d * d * e12 * e34
        }
        P00000 => {
            let (e12, e23, e34, e45) = (ind(c[0], c[1]), ind(c[1], c[2]), ind(c[2], c[3]), ind(c[3], c[4]));
            let mut v = 0.5 * e12 * g(P100, &[c[2], c[3], c[4]])?
                - 0.5 * e23 * (g(P100, &[c[0], c[3], c[4]])? - g(P010, &[c[0], c[3], c[4]])?)
                - 0.5 * e34 * (g(P010, &[c[0], c[1], c[4]])? - g(P001, &[c[0], c[1], c[4]])?)
                - 0.5 * e45 * (d * g(P000, &[c[0], c[1], c[2]])? + g(P001, &[c[0], c[1], c[2]])?);
            v -= 0.125 * e12 * e34 * g(P2, &[c[4]])?;
            v -= 0.125 * e23 * e45 * (d * d * g(P0, &[c[0]])? + 2.0 * d * g(P1, &[c[0]])? + g(P2, &[c[0]])?);
            v += 0.25 * e12 * e45 * (d * g(P1, &[c[2]])? + g(P2, &[c[2]])?);
            v
        }
        _ => 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
struct Family {
    q: usize,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

/// All integral values of one step, keyed by family and component tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSet {
    route: Route,
    m: usize,
    families: [Option<Family>; 12],
}

impl IntegralSet {
    pub fn route(&self) -> Route {
        self.route
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, p: WeightProfile) -> bool {
        self.families[slot(p)].is_some()
    }

    /// Truncation order used for a family, if present.
    pub fn q(&self, p: WeightProfile) -> Option<usize> {
        self.families[slot(p)].as_ref().map(|f| f.q)
    }

    fn locate(&self, p: WeightProfile, comps: &[usize]) -> Result<(&Family, usize), NoiseError> {
        let missing = || NoiseError::MissingIntegral { profile: p, indices: comps.to_vec() };
        let fam = self.families[slot(p)].as_ref().ok_or_else(missing)?;
        if comps.len() != p.k() || comps.iter().any(|&i| i >= self.m) {
            return Err(missing());
        }
        Ok((fam, flat(comps, self.m)))
    }

    /// Value of `I_(profile)^{(i_1 ... i_k)}` (zero-based components, innermost first).
    pub fn get(&self, p: WeightProfile, comps: &[usize]) -> Result<f64, NoiseError> {
        let (fam, n) = self.locate(p, comps)?;
        Ok(fam.values[n])
    }

    pub fn provenance(&self, p: WeightProfile, comps: &[usize]) -> Result<Provenance, NoiseError> {
        let (fam, n) = self.locate(p, comps)?;
        Ok(fam.provenance[n])
    }
}
