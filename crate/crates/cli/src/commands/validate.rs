use crate::error::CliError;
use crate::output::{num, Sink};
use strong_taylor::coeff::{CoeffStore, WeightProfile};
use strong_taylor::noise::{validate_family, Route, ValidationReport};
use strong_taylor::oracle::{error_report, IndexPattern};

/// Empirical fine-grid error together with the predicted one.
#[derive(Clone, Debug)]
pub struct ValidationRow {
    pub report: ValidationReport,
    pub predicted: f64,
    /// True when `predicted` is the exact error rather than the bound.
    pub exact: bool,
}

impl ValidationRow {
    pub fn z(&self) -> f64 {
        self.report.z_score(self.predicted)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn validate(
    store: &CoeffStore,
    profile: WeightProfile,
    components: &[usize],
    route: Route,
    q: usize,
    samples: u64,
    substeps: usize,
    seed: u64,
) -> Result<ValidationRow, CliError> {
    if samples < 100 {
        return Err(CliError::Usage("validation needs at least 100 samples".into()));
    }
    let report = validate_family(store, profile, components, route, q, samples, substeps, seed)?;
    let er = error_report(store, profile, &IndexPattern::of(components), q, 1.0)?;
    // The combined route only shares the direct error on distinct indices.
    let exact = er.exact_mse.filter(|_| route == Route::ItoDirect || er.pattern.is_distinct());
    Ok(ValidationRow { report, predicted: exact.unwrap_or(er.upper_bound), exact: exact.is_some() })
}

pub fn write_validation(sink: &mut Sink, r: &ValidationRow) -> Result<(), CliError> {
    sink.row([
        "profile",
        "components",
        "route",
        "q",
        "samples",
        "substeps",
        "mse",
        "std_error",
        "predicted",
        "predicted_kind",
        "z",
    ])?;
    let v = &r.report;
    let comps: Vec<String> = v.components.iter().map(|c| c.to_string()).collect();
    sink.row([
        v.profile.label(),
        comps.join(" "),
        v.route.to_string(),
        v.q.to_string(),
        v.samples.to_string(),
        v.substeps.to_string(),
        num(v.mse),
        num(v.std_error),
        num(r.predicted),
        if r.exact { "exact" } else { "bound" }.to_string(),
        num(r.z()),
    ])
}
