use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use urysohn_core::approx::{
    build_funnel, build_image_ensemble, check_theorem_bounds, gap_report, section, Discretization, FunnelCloud,
    GapReport, Provenance,
};
use urysohn_core::inputs::enumerate_inputs;
use urysohn_core::kernel::{parameter_budget, ParameterBudget, M0};
use urysohn_core::operator::Operator;

use crate::config::{Mode, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub l0: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub m0: M0,
}

/// Wall-clock seconds per stage. Kept out of `summary.json` so that file is
/// reproducible byte for byte.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub discretize: f64,
    pub enumerate: f64,
    pub ensemble: f64,
    pub funnel: f64,
    pub report: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: &'static str,
    pub realized: Provenance,
    pub quadrature_order: usize,
    pub constants: Constants,
    pub input_count: usize,
    pub ensemble_size: usize,
    pub funnel_size: usize,
    /// Distinct image values at each E-representative.
    pub section_sizes: Vec<usize>,
    pub budget: Option<ParameterBudget>,
    pub report: GapReport,
    #[serde(skip)]
    pub timings: Timings,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub funnel: FunnelCloud,
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Runs the pipeline without touching the file system.
pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let kernel = config.kernel()?;
    let ball = config.ball()?;
    let omega = config.omega_box()?;
    let e = config.e_box()?;
    let caps = config.caps();

    let (resolution, budget) = match config.mode()? {
        Mode::Explicit(r) => (r, None),
        Mode::Budget(eps) => {
            let b = parameter_budget(eps, &kernel, &ball, omega.measure(), e.diameter(), config.r_star)?;
            let r = urysohn_core::approx::Resolution {
                gamma: b.gamma_star,
                partition_delta: b.partition_delta_star,
                magnitude_step: b.delta_star,
                sigma: b.sigma_star,
            };
            (r, Some(b))
        }
    };
    let budget_hint = |e: urysohn_core::Error| match (&e, budget) {
        (urysohn_core::Error::Capacity(msg), Some(b)) => CliError::Capacity(format!(
            "capacity exceeded: {msg}; epsilon = {} needs gamma = {}, Delta = {}, delta = {}, sigma = {}; \
             raise caps or give an explicit resolution",
            b.epsilon, b.gamma_star, b.partition_delta_star, b.delta_star, b.sigma_star
        )),
        _ => CliError::Core(e),
    };

    let t = Instant::now();
    let disc = Discretization::build(&omega, &e, ball, kernel.dims().input, resolution, &caps).map_err(budget_hint)?;
    timings.discretize = seconds(t);

    let t = Instant::now();
    let inputs =
        enumerate_inputs(&disc.omega, &disc.grid, &disc.net, &disc.ball, caps.max_inputs).map_err(budget_hint)?;
    timings.enumerate = seconds(t);

    let t = Instant::now();
    let op = Operator::new(kernel.clone(), disc.omega.clone(), config.quadrature_order)?;
    let ensemble = build_image_ensemble(&op, &disc, &inputs)?;
    timings.ensemble = seconds(t);

    let t = Instant::now();
    let funnel = build_funnel(&ensemble, &disc.e)?;
    let section_sizes = (0..disc.e.len())
        .map(|i| section(&ensemble, i).map(|s| s.points.len()))
        .collect::<Result<Vec<_>, _>>()?;
    timings.funnel = seconds(t);

    let t = Instant::now();
    let mc = config.monte_carlo_options();
    let report = match &budget {
        Some(b) => check_theorem_bounds(&op, &disc, &ensemble, &funnel, b, mc.as_ref())?,
        None => gap_report(&op, &disc, &ensemble, &funnel, mc.as_ref())?,
    };
    timings.report = seconds(t);
    timings.total = seconds(start);

    let summary = RunSummary {
        mode: if budget.is_some() { "budget" } else { "explicit" },
        realized: disc.provenance(),
        quadrature_order: config.quadrature_order,
        constants: Constants {
            l0: kernel.l0,
            beta0: kernel.beta0,
            beta1: kernel.beta1,
            m0: kernel.m0,
        },
        input_count: inputs.len(),
        ensemble_size: ensemble.len(),
        funnel_size: funnel.len(),
        section_sizes,
        budget,
        report,
        timings,
    };
    Ok(RunOutput { summary, funnel })
}

/// `xi_1..xi_b, y_1..y_n, input_id`, one row per funnel point.
pub fn funnel_csv(funnel: &FunnelCloud) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=funnel.xi_dim)
        .map(|i| format!("xi_{i}"))
        .chain((1..=funnel.y_dim).map(|i| format!("y_{i}")))
        .chain(std::iter::once("input_id".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (row, id) in funnel.points.iter().zip(&funnel.input_ids) {
        for v in row {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{id}").unwrap();
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("summary types serialize");
    text.push('\n');
    text
}

/// Writes `funnel.csv`, `summary.json` and `timings.json` into `dir`.
pub fn write_artifacts(output: &RunOutput, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join("funnel.csv"), &funnel_csv(&output.funnel))?;
    write(&dir.join("summary.json"), &to_json(&output.summary))?;
    write(&dir.join("timings.json"), &to_json(&output.summary.timings))?;
    Ok(())
}

/// Runs the pipeline and writes its artifacts to `config.output_dir`.
pub fn run_experiment(config: &RunConfig) -> Result<RunSummary, CliError> {
    let output = execute(config)?;
    write_artifacts(&output, &config.output_dir)?;
    Ok(output.summary)
}
