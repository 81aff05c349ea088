//! Explicit one-step strong schemes of orders 2.0 and 2.5, Itô and Stratonovich forms.

mod linear;
mod model;

pub use linear::{default_initial_state, model_by_name, LinearModel, MODEL_NAMES};
pub use model::{Base, Letter, SdeModel};

use crate::coeff::{CoeffStore, WeightProfile};
use crate::noise::{IntegralPlan, IntegralSet, NoiseError, QSet, Route};
use crate::oracle::{select_q, IndexPattern, OracleError, Order};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;
use WeightProfile::*;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("state is not finite after step {step}")]
    Divergence { step: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Calculus {
    Ito,
    Stratonovich,
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calculus::Ito => "ito",
            Calculus::Stratonovich => "stratonovich",
        })
    }
}

impl FromStr for Calculus {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ito" => Ok(Calculus::Ito),
            "stratonovich" | "strat" => Ok(Calculus::Stratonovich),
            other => Err(SchemeError::Invalid(format!("calculus must be ito or stratonovich, got `{other}`"))),
        }
    }
}

/// How the Itô scheme obtains its integrals. The Stratonovich scheme always
/// uses the product series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntegralRoute {
    Direct,
    Combined,
}

impl FromStr for IntegralRoute {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "direct" => Ok(IntegralRoute::Direct),
            "combined" => Ok(IntegralRoute::Combined),
            other => Err(SchemeError::Invalid(format!("route must be direct or combined, got `{other}`"))),
        }
    }
}

/// Truncation orders: fixed per family, or chosen from the error oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QPolicy {
    Fixed(QSet),
    /// Smallest q meeting `E <= C Δ^{2γ+1}` for every index pattern the model can produce.
    Auto { constant: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub calculus: Calculus,
    pub order: Order,
    pub route: IntegralRoute,
    pub q: QPolicy,
    pub dt: f64,
    pub steps: usize,
}

impl SchemeConfig {
    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn noise_route(&self) -> Route {
        match (self.calculus, self.route) {
            (Calculus::Stratonovich, _) => Route::Stratonovich,
            (Calculus::Ito, IntegralRoute::Direct) => Route::ItoDirect,
            (Calculus::Ito, IntegralRoute::Combined) => Route::ItoViaStratonovich,
        }
    }
}

/// Integral families referenced by a scheme of the given order.
pub fn families(order: Order) -> &'static [WeightProfile] {
    match order {
        Order::Two => &[P0, P1, P00, P01, P10, P000, P0000],
        Order::TwoHalf => &WeightProfile::ALL,
    }
}

/// Resolves the truncation orders for a model with `m` noise components.
pub fn resolve_qset(store: &CoeffStore, m: usize, config: &SchemeConfig) -> Result<QSet, SchemeError> {
    let constant = match config.q {
        QPolicy::Fixed(q) => return Ok(q),
        QPolicy::Auto { constant } => constant,
    };
    let mut qs = QSet::uniform(0);
    for &p in families(config.order) {
        if p.k() == 1 {
            continue;
        }
        let mut patterns: Vec<IndexPattern> = Vec::new();
        let total = m.pow(p.k() as u32);
        for mut f in 0..total {
            let comps: Vec<usize> = (0..p.k())
                .map(|_| {
                    let c = f % m;
                    f /= m;
                    c
                })
                .collect();
            let pat = IndexPattern::of(&comps);
            if !patterns.contains(&pat) {
                patterns.push(pat);
            }
        }
        let mut q = 0;
        for pat in &patterns {
            q = q.max(select_q(store, p, pat, config.dt, config.order, constant)?);
        }
        qs.set(p, q);
    }
    Ok(qs)
}

fn add(out: &mut [f64], v: &[f64], c: f64) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += c * x;
    }
}

/// Terms shared by both orders and those added at 2.5, assembled separately.
struct Assembly<'a, M: SdeModel + ?Sized> {
    model: &'a M,
    y: &'a [f64],
    t: f64,
    d: f64,
    set: &'a IntegralSet,
    l: Letter,
    a: Base,
}

impl<M: SdeModel + ?Sized> Assembly<'_, M> {
    fn new<'a>(model: &'a M, y: &'a [f64], t: f64, d: f64, set: &'a IntegralSet, strat: bool) -> Assembly<'a, M> {
        let (l, a) = if strat { (Letter::LBar, Base::ABar) } else { (Letter::L, Base::A) };
        Assembly { model, y, t, d, set, l, a }
    }

    fn op(&self, word: &[Letter], base: Base) -> Vec<f64> {
        self.model.composite(word, base, self.y, self.t)
    }

    fn i(&self, p: WeightProfile, c: &[usize]) -> Result<f64, SchemeError> {
        Ok(self.set.get(p, c)?)
    }

    fn order_two(&self, out: &mut [f64]) -> Result<(), SchemeError> {
        use Letter::G;
        let (m, d, l, a) = (self.model.m(), self.d, self.l, self.a);
        add(out, &self.op(&[], a), d);
        add(out, &self.op(&[l], a), d * d / 2.0);
        for i1 in 0..m {
            let b = Base::B(i1);
            let (i0, i1v) = (self.i(P0, &[i1])?, self.i(P1, &[i1])?);
            add(out, &self.op(&[], b), i0);
            add(out, &self.op(&[G(i1)], a), d * i0 + i1v);
            add(out, &self.op(&[l], b), -i1v);
            for i2 in 0..m {
                let c = [i2, i1];
                let (j00, j01, j10) = (self.i(P00, &c)?, self.i(P01, &c)?, self.i(P10, &c)?);
                add(out, &self.op(&[G(i2)], b), j00);
                add(out, &self.op(&[G(i2), l], b), j10 - j01);
                add(out, &self.op(&[l, G(i2)], b), -j10);
                add(out, &self.op(&[G(i2), G(i1)], a), j01 + d * j00);
                for i3 in 0..m {
                    add(out, &self.op(&[G(i3), G(i2)], b), self.i(P000, &[i3, i2, i1])?);
                    for i4 in 0..m {
                        add(out, &self.op(&[G(i4), G(i3), G(i2)], b), self.i(P0000, &[i4, i3, i2, i1])?);
                    }
                }
            }
        }
        Ok(())
    }

    fn order_two_half_extra(&self, out: &mut [f64]) -> Result<(), SchemeError> {
        use Letter::G;
        let (m, d, l, a) = (self.model.m(), self.d, self.l, self.a);
        // Unbarred in both calculi: in the Stratonovich form the difference
        // L L a - L̄ L̄ ā carries the means of the omitted third-order integrals.
        add(out, &self.op(&[Letter::L, Letter::L], Base::A), d * d * d / 6.0);
        for i1 in 0..m {
            let b = Base::B(i1);
            let (i0, i1v, i2v) = (self.i(P0, &[i1])?, self.i(P1, &[i1])?, self.i(P2, &[i1])?);
            add(out, &self.op(&[G(i1), l], a), 0.5 * i2v + d * i1v + d * d / 2.0 * i0);
            add(out, &self.op(&[l, l], b), 0.5 * i2v);
            add(out, &self.op(&[l, G(i1)], a), -(i2v + d * i1v));
            for i2 in 0..m {
                for i3 in 0..m {
                    let c = [i3, i2, i1];
                    let (j000, j100, j010, j001) =
                        (self.i(P000, &c)?, self.i(P100, &c)?, self.i(P010, &c)?, self.i(P001, &c)?);
                    add(out, &self.op(&[G(i3), l, G(i2)], b), j100 - j010);
                    add(out, &self.op(&[G(i3), G(i2), l], b), j010 - j001);
                    add(out, &self.op(&[G(i3), G(i2), G(i1)], a), d * j000 + j001);
                    add(out, &self.op(&[l, G(i3), G(i2)], b), -j100);
                    for i4 in 0..m {
                        for i5 in 0..m {
                            let w = [G(i5), G(i4), G(i3), G(i2)];
                            add(out, &self.op(&w, b), self.i(P00000, &[i5, i4, i3, i2, i1])?);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn step_impl<M: SdeModel + ?Sized>(
    model: &M,
    y: &[f64],
    t: f64,
    delta: f64,
    order: Order,
    set: &IntegralSet,
    strat: bool,
) -> Result<Vec<f64>, SchemeError> {
    if y.len() != model.n() {
        return Err(SchemeError::Invalid(format!("state has {} entries, model needs {}", y.len(), model.n())));
    }
    if set.m() != model.m() {
        return Err(SchemeError::Invalid("integral set and model disagree on m".into()));
    }
    let asm = Assembly::new(model, y, t, delta, set, strat);
    let mut out = y.to_vec();
    asm.order_two(&mut out)?;
    if order == Order::TwoHalf {
        asm.order_two_half_extra(&mut out)?;
    }
    Ok(out)
}

/// One step of the Taylor–Itô scheme; `set` must hold Itô integrals.
pub fn step_taylor_ito<M: SdeModel + ?Sized>(
    model: &M,
    y: &[f64],
    t: f64,
    delta: f64,
    order: Order,
    set: &IntegralSet,
) -> Result<Vec<f64>, SchemeError> {
    if !set.route().is_ito() {
        return Err(SchemeError::Invalid("the Itô scheme needs Itô integrals".into()));
    }
    step_impl(model, y, t, delta, order, set, false)
}

/// One step of the Taylor–Stratonovich scheme. Drift and generator are the
/// barred versions everywhere except the cubic drift term, which is `L L a`.
pub fn step_taylor_strat<M: SdeModel + ?Sized>(
    model: &M,
    y: &[f64],
    t: f64,
    delta: f64,
    order: Order,
    set: &IntegralSet,
) -> Result<Vec<f64>, SchemeError> {
    if set.route().is_ito() {
        return Err(SchemeError::Invalid("the Stratonovich scheme needs Stratonovich integrals".into()));
    }
    step_impl(model, y, t, delta, order, set, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub path: u64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Wiener values at the final time, `Σ_p sqrt(Δ) ζ_0`.
    pub terminal_noise: Vec<f64>,
}

/// A scheme bound to a model, with the integral plan prepared once.
pub struct Simulator<'m, M: SdeModel + ?Sized> {
    model: &'m M,
    config: SchemeConfig,
    plan: IntegralPlan,
}

impl<'m, M: SdeModel + ?Sized> Simulator<'m, M> {
    pub fn new(model: &'m M, config: SchemeConfig, store: &CoeffStore) -> Result<Self, SchemeError> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(SchemeError::Invalid(format!("step must be positive, got {}", config.dt)));
        }
        let qset = resolve_qset(store, model.m(), &config)?;
        let plan = IntegralPlan::new(store, config.noise_route(), model.m(), config.dt, qset, families(config.order))?;
        Ok(Self { model, config, plan })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn qset(&self) -> QSet {
        self.plan.qset()
    }

    pub fn plan(&self) -> &IntegralPlan {
        &self.plan
    }

    /// One step from `(y, t)` on the basis of `(seed, path, step)`.
    pub fn step(&self, y: &[f64], t: f64, seed: u64, path: u64, step: u64) -> Result<Vec<f64>, SchemeError> {
        let set = self.plan.evaluate(&self.plan.draw(seed, path, step))?;
        self.step_with(y, t, &set)
    }

    pub fn step_with(&self, y: &[f64], t: f64, set: &IntegralSet) -> Result<Vec<f64>, SchemeError> {
        let (d, o) = (self.config.dt, self.config.order);
        match self.config.calculus {
            Calculus::Ito => step_taylor_ito(self.model, y, t, d, o, set),
            Calculus::Stratonovich => step_taylor_strat(self.model, y, t, d, o, set),
        }
    }

    pub fn simulate(&self, seed: u64, path: u64, x0: &[f64]) -> Result<Trajectory, SchemeError> {
        self.run(seed, path, x0, true)
    }

    /// Final state and terminal Wiener values without storing the path.
    pub fn terminal(&self, seed: u64, path: u64, x0: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SchemeError> {
        let tr = self.run(seed, path, x0, false)?;
        Ok((tr.states.into_iter().next_back().expect("initial state"), tr.terminal_noise))
    }

    fn run(&self, seed: u64, path: u64, x0: &[f64], keep: bool) -> Result<Trajectory, SchemeError> {
        let d = self.config.dt;
        let sd = d.sqrt();
        let mut w = vec![0.0; self.model.m()];
        let mut y = x0.to_vec();
        let mut times = vec![0.0];
        let mut states = vec![x0.to_vec()];
        for p in 0..self.config.steps {
            let basis = self.plan.draw(seed, path, p as u64);
            for (i, wi) in w.iter_mut().enumerate() {
                *wi += sd * basis.zeta(0, i);
            }
            let set = self.plan.evaluate(&basis)?;
            let t = p as f64 * d;
            y = self.step_with(&y, t, &set)?;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(SchemeError::Divergence { step: p + 1 });
            }
            if keep {
                times.push(t + d);
                states.push(y.clone());
            } else {
                states[0].clone_from(&y);
            }
        }
        if !keep {
            times = vec![self.config.horizon()];
        }
        Ok(Trajectory { seed, path, times, states, terminal_noise: w })
    }
}

/// Builds a simulator and runs path 0.
pub fn simulate<M: SdeModel + ?Sized>(
    model: &M,
    config: SchemeConfig,
    store: &CoeffStore,
    seed: u64,
    x0: &[f64],
) -> Result<Trajectory, SchemeError> {
    Simulator::new(model, config, store)?.simulate(seed, 0, x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffConfig;
    use crate::noise::GaussianBasis;

    fn config(calculus: Calculus, order: Order, q: usize, dt: f64, steps: usize) -> SchemeConfig {
        SchemeConfig { calculus, order, route: IntegralRoute::Direct, q: QPolicy::Fixed(QSet::uniform(q)), dt, steps }
    }

    fn zero_set(route: Route, m: usize, dt: f64) -> IntegralSet {
        let store = CoeffStore::new(CoeffConfig::default());
        let plan = IntegralPlan::new(&store, route, m, dt, QSet::uniform(1), &WeightProfile::ALL).unwrap();
        plan.evaluate(&GaussianBasis::zeros(m, plan.basis_q_max(), dt)).unwrap()
    }

    #[test]
    fn deterministic_taylor_collapse() {
        let model = LinearModel::scalar("d", -0.7, &[0.0]);
        let store = CoeffStore::new(CoeffConfig::default());
        let sim = Simulator::new(&model, config(Calculus::Ito, Order::TwoHalf, 1, 0.1, 1), &store).unwrap();
        let y = sim.step(&[2.0], 0.0, 5, 0, 0).unwrap()[0];
        let z: f64 = -0.07;
        assert!((y - 2.0 * (1.0 + z + z * z / 2.0 + z * z * z / 6.0)).abs() < 1e-15);
        let sim2 = Simulator::new(&model, config(Calculus::Ito, Order::Two, 1, 0.1, 1), &store).unwrap();
        let y2 = sim2.step(&[2.0], 0.0, 5, 0, 0).unwrap()[0];
        assert!((y2 - 2.0 * (1.0 + z + z * z / 2.0)).abs() < 1e-15);
        let strat = Simulator::new(&model, config(Calculus::Stratonovich, Order::TwoHalf, 1, 0.1, 1), &store).unwrap();
        assert_eq!(strat.step(&[2.0], 0.0, 5, 0, 0).unwrap()[0], y);
    }

    #[test]
    fn stratonovich_zero_basis_is_barred_drift_taylor() {
        // Cubic drift term stays unbarred: μ³ rather than μ̄³.
        let model = LinearModel::scalar("g", 0.3, &[0.6]);
        let dt = 0.2;
        let set = zero_set(Route::Stratonovich, 1, dt);
        let y = step_taylor_strat(&model, &[1.0], 0.0, dt, Order::TwoHalf, &set).unwrap()[0];
        let z = (0.3 - 0.18) * dt;
        let u = 0.3 * dt;
        assert!((y - (1.0 + z + z * z / 2.0 + u * u * u / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn ito_zero_basis_is_finite() {
        let model = model_by_name("linear").unwrap();
        let set = zero_set(Route::ItoDirect, 2, 0.1);
        let y = step_taylor_ito(&model, &[1.0, -1.0], 0.0, 0.1, Order::TwoHalf, &set).unwrap();
        assert!(y.iter().all(|v| v.is_finite()));
        assert!(step_taylor_strat(&model, &[1.0, -1.0], 0.0, 0.1, Order::TwoHalf, &set).is_err());
    }

    #[test]
    fn simulate_basics() {
        let model = model_by_name("gbm-2noise").unwrap();
        let store = CoeffStore::new(CoeffConfig::default());
        let c0 = config(Calculus::Ito, Order::TwoHalf, 1, 0.1, 0);
        let t = simulate(&model, c0, &store, 1, &[1.0]).unwrap();
        assert_eq!(t.states, vec![vec![1.0]]);
        let c = config(Calculus::Ito, Order::TwoHalf, 1, 0.1, 10);
        let a = simulate(&model, c, &store, 9, &[1.0]).unwrap();
        assert_eq!(a, simulate(&model, c, &store, 9, &[1.0]).unwrap());
        assert_eq!(a.states.len(), 11);
        let sim = Simulator::new(&model, c, &store).unwrap();
        let (yn, w) = sim.terminal(9, 0, &[1.0]).unwrap();
        assert_eq!(yn, a.states[10]);
        assert_eq!(w, a.terminal_noise);
    }

    #[test]
    fn deterministic_horizon_error() {
        let model = model_by_name("deterministic").unwrap();
        let store = CoeffStore::new(CoeffConfig::default());
        let t = simulate(&model, config(Calculus::Ito, Order::TwoHalf, 0, 0.1, 10), &store, 0, &[1.0]).unwrap();
        let err = (t.states[10][0] - (-1f64).exp()).abs();
        // Ten local remainders of at most Δ⁴/24.
        assert!(err <= 10.0 * 1e-4 / 24.0, "{err}");
    }

    #[test]
    fn commuting_noise_trajectories_do_not_depend_on_q() {
        let model = model_by_name("gbm-2noise").unwrap();
        let store = CoeffStore::new(CoeffConfig::default());
        for calculus in [Calculus::Ito, Calculus::Stratonovich] {
            let a = simulate(&model, config(calculus, Order::TwoHalf, 0, 0.125, 8), &store, 4, &[1.0]).unwrap();
            let b = simulate(&model, config(calculus, Order::TwoHalf, 3, 0.125, 8), &store, 4, &[1.0]).unwrap();
            assert!((a.states[8][0] - b.states[8][0]).abs() < 1e-10, "{calculus}");
        }
    }

    #[test]
    fn auto_q_resolves_for_large_constant() {
        let store = CoeffStore::new(CoeffConfig::default());
        let mut c = config(Calculus::Ito, Order::Two, 0, 0.5, 1);
        c.q = QPolicy::Auto { constant: 1.0 };
        let q = resolve_qset(&store, 2, &c).unwrap();
        let pair = crate::oracle::exact_mse(&store, P00, &IndexPattern::distinct(2), q.get(P00), 0.5).unwrap();
        assert!(pair <= 0.5f64.powi(5));
        c.dt = 0.01;
        assert!(matches!(resolve_qset(&store, 2, &c), Err(SchemeError::Oracle(_))));
    }
}
