//! Front end for the `strong-taylor` library: coefficient tables, error
//! tables, truncation-order selection, simulation and convergence studies.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parse;

use args::{Cli, Command, SchemeArgs};
use clap::Parser;
use commands::sim::SchemeChoice;
use error::CliError;
use output::Sink;
use std::ffi::OsString;
use std::path::PathBuf;
use strong_taylor::coeff::{CoeffConfig, CoeffStore};
use strong_taylor::noise::Route;
use strong_taylor::schemes::{default_initial_state, families, model_by_name, IntegralRoute, LinearModel, MODEL_NAMES};

const DEFAULT_CACHE_DIR: &str = "coeff-cache";

/// Outcome of argument parsing: either a parsed command line or text clap
/// wants shown (help, version) with its exit status.
pub enum Parsed {
    Run(Cli),
    Display { text: String, code: i32 },
}

pub fn parse_args(raw: Vec<OsString>) -> Result<Parsed, CliError> {
    let argv = config::expand_args(raw)?;
    match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(Parsed::Run(cli)),
        Err(e) if !e.use_stderr() => Ok(Parsed::Display { text: e.render().to_string(), code: 0 }),
        Err(e) => {
            let text = e.render().to_string();
            Err(CliError::Usage(text.strip_prefix("error: ").unwrap_or(&text).trim_end().to_string()))
        }
    }
}

fn model(name: &str) -> Result<LinearModel, CliError> {
    model_by_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown model `{name}`; known: {}", MODEL_NAMES.join(", "))))
}

fn choice(a: &SchemeArgs) -> Result<SchemeChoice, CliError> {
    Ok(SchemeChoice {
        calculus: parse::calculus(&a.calculus)?,
        order: parse::order(&a.gamma)?,
        route: parse::route(&a.route)?,
        q: parse::q_policy(&a.q)?,
    })
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let cache = cli.cache_dir.clone();
    let store = CoeffStore::new(CoeffConfig { cache_dir: cache.clone(), ..CoeffConfig::default() });
    let mut sink = Sink::open(cli.out.as_deref())?;
    match &cli.command {
        Command::Coeffs(a) => {
            let dir = cache.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
            let s = commands::tables::coeffs(&store, parse::profile(&a.profile)?, a.q, &dir)?;
            commands::tables::write_coeffs(&mut sink, &s)?;
        }
        Command::MseTable(a) => {
            let rows = commands::tables::mse_table(&store, a.dt)?;
            commands::tables::write_mse_table(&mut sink, &rows)?;
        }
        Command::SelectQ(a) => {
            let profile = a.profile.as_deref().map(parse::profile).transpose()?;
            let pattern = a.pattern.as_deref().map(parse::pattern).transpose()?;
            let order = parse::order(&a.gamma)?;
            let rows = commands::tables::select_rows(&store, profile, pattern.as_ref(), a.dt, order, a.constant)?;
            commands::tables::write_select(&mut sink, &rows)?;
            if profile.is_some() && pattern.is_some() && rows[0].q.is_none() {
                sink.finish()?;
                return Err(CliError::Unsupported("no tabulated truncation order meets the tolerance".into()));
            }
        }
        Command::Simulate(a) => {
            let m = model(&a.scheme.model)?;
            let x0 = default_initial_state(&m);
            let paths = commands::sim::simulate(&store, &m, choice(&a.scheme)?, a.dt, a.steps, a.paths, a.scheme.seed, &x0)?;
            commands::sim::write_trajectories(&mut sink, x0.len(), &paths)?;
        }
        Command::Convergence(a) => {
            let m = model(&a.scheme.model)?;
            let x0 = default_initial_state(&m);
            let c = choice(&a.scheme)?;
            let deltas = parse::steps_list(&a.dt)?;
            let r = commands::sim::convergence(&store, &m, &a.scheme.model, c, &deltas, a.horizon, a.paths, a.scheme.seed, &x0)?;
            commands::sim::write_convergence(&mut sink, &r, families(c.order))?;
        }
        Command::ValidateIntegrals(a) => {
            let profile = parse::profile(&a.profile)?;
            let comps = match &a.components {
                Some(s) => parse::components(s)?,
                None => (0..profile.k()).collect(),
            };
            let route = match parse::route(&a.route)? {
                IntegralRoute::Direct => Route::ItoDirect,
                IntegralRoute::Combined => Route::ItoViaStratonovich,
            };
            let r = commands::validate::validate(&store, profile, &comps, route, a.q, a.samples, a.substeps, a.seed)?;
            commands::validate::write_validation(&mut sink, &r)?;
        }
    }
    for e in store.take_cache_errors() {
        eprintln!("warning: {e}");
    }
    sink.finish()
}
