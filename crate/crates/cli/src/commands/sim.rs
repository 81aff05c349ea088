use crate::error::CliError;
use crate::output::{num, Sink};
use rayon::prelude::*;
use strong_taylor::coeff::{CoeffStore, WeightProfile};
use strong_taylor::noise::QSet;
use strong_taylor::oracle::Order;
use strong_taylor::schemes::{
    Calculus, IntegralRoute, QPolicy, SchemeConfig, SchemeError, SdeModel, Simulator, Trajectory,
};
use strong_taylor::stats::{fit_line, RunningStats};

/// Paths per work item; results are merged in item order.
pub const PATH_CHUNK: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeChoice {
    pub calculus: Calculus,
    pub order: Order,
    pub route: IntegralRoute,
    pub q: QPolicy,
}

impl SchemeChoice {
    pub fn config(&self, dt: f64, steps: usize) -> SchemeConfig {
        SchemeConfig { calculus: self.calculus, order: self.order, route: self.route, q: self.q, dt, steps }
    }
}

pub fn simulate<M: SdeModel + ?Sized>(
    store: &CoeffStore,
    model: &M,
    choice: SchemeChoice,
    dt: f64,
    steps: usize,
    paths: u64,
    seed: u64,
    x0: &[f64],
) -> Result<Vec<Trajectory>, CliError> {
    let sim = Simulator::new(model, choice.config(dt, steps), store)?;
    let out: Result<Vec<Trajectory>, SchemeError> = (0..paths).into_par_iter().map(|p| sim.simulate(seed, p, x0)).collect();
    Ok(out?)
}

pub fn write_trajectories(sink: &mut Sink, n: usize, paths: &[Trajectory]) -> Result<(), CliError> {
    let mut header = vec!["path".to_string(), "step".to_string(), "t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    sink.row(&header)?;
    for tr in paths {
        for (s, (t, y)) in tr.times.iter().zip(&tr.states).enumerate() {
            let mut row = vec![tr.path.to_string(), s.to_string(), num(*t)];
            row.extend(y.iter().map(|&v| num(v)));
            sink.row(&row)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub steps: usize,
    pub paths: u64,
    pub mean_abs_error: f64,
    /// `None` for a single path.
    pub std_error: Option<f64>,
    pub qset: QSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub model: String,
    pub choice: SchemeChoice,
    pub horizon: f64,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
    pub intercept: f64,
    pub slope: f64,
}

/// Mean of `|x_T - y_N|` (Euclidean norm) for each step, and the least-squares
/// slope of its logarithm against `log Δ`.
#[allow(clippy::too_many_arguments)]
pub fn convergence<M: SdeModel + ?Sized>(
    store: &CoeffStore,
    model: &M,
    name: &str,
    choice: SchemeChoice,
    deltas: &[f64],
    horizon: f64,
    paths: u64,
    seed: u64,
    x0: &[f64],
) -> Result<ConvergenceReport, CliError> {
    if deltas.len() < 3 {
        return Err(CliError::Usage("a slope needs at least three steps".into()));
    }
    if paths == 0 {
        return Err(CliError::Usage("at least one path is needed".into()));
    }
    if model.exact(x0, horizon, &vec![0.0; model.m()]).is_none() {
        return Err(CliError::Unsupported(format!("model `{name}` has no exact solution")));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let steps = (horizon / d).round() as usize;
        if steps == 0 || ((steps as f64) * d - horizon).abs() > 1e-9 * horizon {
            return Err(CliError::Usage(format!("step {d} does not divide the horizon {horizon}")));
        }
        let sim = Simulator::new(model, choice.config(d, steps), store)?;
        let chunks = paths.div_ceil(PATH_CHUNK);
        let parts: Vec<Result<RunningStats, CliError>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut s = RunningStats::new();
                for p in c * PATH_CHUNK..((c + 1) * PATH_CHUNK).min(paths) {
                    let (y, w) = sim.terminal(seed, p, x0)?;
                    let exact = model.exact(x0, horizon, &w).expect("checked above");
                    let e: f64 = y.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    s.push(e);
                }
                Ok(s)
            })
            .collect();
        let mut total = RunningStats::new();
        for part in parts {
            total.merge(&part?);
        }
        rows.push(ConvergenceRow {
            delta: d,
            steps,
            paths,
            mean_abs_error: total.mean(),
            std_error: (paths > 1).then(|| total.std_error()),
            qset: sim.qset(),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.delta.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean_abs_error.ln()).collect();
    let (intercept, slope) = fit_line(&x, &y).unwrap_or((f64::NAN, f64::NAN));
    Ok(ConvergenceReport { model: name.to_string(), choice, horizon, seed, rows, intercept, slope })
}

fn q_summary(q: &QSet, families: &[WeightProfile]) -> String {
    let used = families.iter().filter(|p| p.k() > 1);
    used.map(|&p| format!("{}={}", p.label(), q.get(p))).collect::<Vec<_>>().join(" ")
}

pub fn write_convergence(sink: &mut Sink, r: &ConvergenceReport, families: &[WeightProfile]) -> Result<(), CliError> {
    let c = &r.choice;
    let route = match c.route {
        IntegralRoute::Direct => "direct",
        IntegralRoute::Combined => "combined",
    };
    sink.comment(&format!(
        "model={} calculus={} gamma={} route={} horizon={} seed={}",
        r.model, c.calculus, c.order, route, r.horizon, r.seed
    ))?;
    sink.row(["delta", "steps", "paths", "mean_abs_error", "std_error", "q"])?;
    for row in &r.rows {
        let se = row.std_error.map_or_else(|| "unreliable".to_string(), num);
        let q = q_summary(&row.qset, families);
        sink.row([num(row.delta), row.steps.to_string(), row.paths.to_string(), num(row.mean_abs_error), se, q])?;
    }
    sink.comment(&format!("slope={} intercept={}", num(r.slope), num(r.intercept)))
}
