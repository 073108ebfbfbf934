//! Subcommand orchestration: builds the problem from a [`RunConfig`], runs it and
//! writes artifacts into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    admissible_sr, estimate_constants, smallness_check, solution_norms, uniqueness_certificate, ConstantEstimates,
    SmallnessReport, UniquenessReport,
};
use crate::config::{MmsCase, RunConfig};
use crate::error::{Error, Result};
use crate::fixed_point::{backward_flow_measure, FixedPointSolver, FlowMeasure, IterationTrace, Problem, State};
use crate::mesh::build_channel_mesh;
use crate::norms::{closed_form_lp_vector, S_MIN};
use crate::space::{build_spaces, DiscreteSpace};
use crate::spectrum::{compute_spectrum, regularity_bounds, symbol_samples_csv, weighted_admissibility, SpectrumResult, Strip};
use crate::verification::{
    coupled_case, coupled_mms, heat_incompatible, heat_quadratic, heat_trig, mms_heat_study, mms_stokes_study, stokes_polynomial,
    stokes_trig, Compatibility, ErrorTable, ManufacturedCase,
};
use crate::vtk;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Certify,
    Spectrum,
    Mms,
}

/// Exit status and the files written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub code: i32,
    pub artifacts: Vec<PathBuf>,
    pub message: String,
}

/// Exit code for an error raised while running.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InnerDivergence { .. } | Error::InnerMaxIterations(_) | Error::OuterMaxIterations { .. } => EXIT_DIVERGENCE,
        Error::InvalidMesh(_) | Error::QuadratureOrder(_) | Error::ExponentRange { .. } | Error::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_INTERNAL,
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn text(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable report");
        s.push('\n');
        self.text(name, &s)
    }
}

/// Runs one subcommand. Failures are reported through the exit code, with any
/// partial artifacts (e.g. the iteration trace of a diverged run) still written.
pub fn run(sub: Subcommand, config: &RunConfig) -> RunOutcome {
    let mut w = match Writer::new(&config.output.dir) {
        Ok(w) => w,
        Err(e) => return RunOutcome { code: EXIT_INTERNAL, artifacts: Vec::new(), message: e.to_string() },
    };
    let result = match sub {
        Subcommand::Solve => run_solve(config, &mut w).map(|_| (EXIT_OK, "solve converged".to_string())),
        Subcommand::Certify => run_certify(config, &mut w),
        Subcommand::Spectrum => run_spectrum(config, &mut w),
        Subcommand::Mms => run_mms(config, &mut w),
    };
    match result {
        Ok((code, message)) => RunOutcome { code, artifacts: w.written, message },
        Err(e) => RunOutcome { code: exit_code(&e), artifacts: w.written, message: e.to_string() },
    }
}

pub fn build_space(config: &RunConfig) -> Result<DiscreteSpace> {
    let g = &config.geometry;
    build_spaces(&build_channel_mesh(g.dims, g.divisions)?, g.quad_order)
}

pub fn build_problem(config: &RunConfig) -> Problem {
    Problem {
        model: config.material,
        g: config.g.to_fn(),
        theta_d: config.theta_d.to_fn(),
        momentum_source: None,
        heat_source: None,
        settings: config.solver,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub final_d_theta_norm: f64,
    pub r_momentum: f64,
    pub r_heat: f64,
    pub max_speed: f64,
    pub mean_theta: f64,
    pub flow: FlowMeasure,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub temperature_dofs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DivergenceReport {
    error: String,
    inner_increments: Vec<f64>,
    inner_ratios: Vec<f64>,
}

fn summarize(space: &DiscreteSpace, state: &State, trace: &IterationTrace) -> SolveSummary {
    let n = space.n_scalar();
    let last = trace.records.last();
    let max_speed = (0..n)
        .map(|i| (state.u[i].powi(2) + state.u[n + i].powi(2) + state.u[2 * n + i].powi(2)).sqrt())
        .fold(0.0, f64::max);
    SolveSummary {
        converged: trace.converged,
        outer_iterations: trace.records.len(),
        inner_iterations: trace.records.iter().map(|r| r.inner.iterations()).collect(),
        final_d_theta_norm: last.map_or(0.0, |r| r.d_theta_norm),
        r_momentum: last.map_or(0.0, |r| r.r_momentum),
        r_heat: last.map_or(0.0, |r| r.r_heat),
        max_speed,
        mean_theta: state.theta.iter().sum::<f64>() / n as f64,
        flow: backward_flow_measure(space, state),
        velocity_dofs: space.n_velocity(),
        pressure_dofs: space.n_pressure(),
        temperature_dofs: n,
    }
}

fn run_solve(config: &RunConfig, w: &mut Writer) -> Result<(DiscreteSpace, State)> {
    let space = build_space(config)?;
    let state = solve_on(config, &space, w)?;
    Ok((space, state))
}

fn solve_on(config: &RunConfig, space: &DiscreteSpace, w: &mut Writer) -> Result<State> {
    if config.output.vtk {
        w.text("mesh.vtk", &vtk::mesh_vtk(&space.mesh))?;
        w.text("facets.vtk", &vtk::facets_vtk(&space.mesh))?;
    }
    let solver = FixedPointSolver::new(space, build_problem(config))?;
    let (state, trace) = match solver.outer_loop() {
        Ok(v) => v,
        Err(e) => {
            match &e {
                Error::OuterMaxIterations { trace, .. } => w.text("trace.csv", &trace.to_csv())?,
                Error::InnerDivergence { trace } => w.json(
                    "divergence.json",
                    &DivergenceReport { error: e.to_string(), inner_increments: trace.increments.clone(), inner_ratios: trace.ratios.clone() },
                )?,
                _ => {}
            }
            return Err(e);
        }
    };
    w.text("trace.csv", &trace.to_csv())?;
    w.json("solve.json", &summarize(space, &state, &trace))?;
    if config.output.vtk {
        w.text("state.vtk", &vtk::state_vtk(space, &state))?;
    }
    Ok(state)
}

/// Certificate output. The uniqueness part is absent when the solve failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyOutput {
    pub constants: ConstantEstimates,
    pub smallness: SmallnessReport,
    pub uniqueness: Option<UniquenessReport>,
    pub r_interval: (f64, f64),
    pub solve_error: Option<String>,
}

fn run_certify(config: &RunConfig, w: &mut Writer) -> Result<(i32, String)> {
    let space = build_space(config)?;
    let c = &config.certify;
    let model = &config.material;
    let constants = estimate_constants(&space, model, c.samples, c.seed, c.s, c.r)?;
    let g_norm = closed_form_lp_vector(&space, &|x| config.g.eval(x), c.s);
    let smallness = smallness_check(&constants, model, g_norm);
    let r_interval = admissible_sr(c.s)?;
    let (uniqueness, solve_error, solve_code) = match solve_on(config, &space, w) {
        Ok(state) => {
            let norms = solution_norms(&space, model, &|x| config.g.eval(x), &state, c.s, c.r);
            (Some(uniqueness_certificate(&norms, &norms, &constants, model, g_norm)?), None, EXIT_OK)
        }
        Err(e) => (None, Some(e.to_string()), exit_code(&e)),
    };
    let out = CertifyOutput { constants, smallness, uniqueness, r_interval, solve_error };
    w.json("certificate.json", &out)?;
    let unique_ok = out.uniqueness.as_ref().is_some_and(|u| u.uniqueness_ok);
    let verdict = format!(
        "smallness {}, uniqueness {}",
        if out.smallness.smallness_ok { "ok" } else { "ABSENT" },
        if unique_ok { "ok" } else { "ABSENT" }
    );
    let code = if out.smallness.smallness_ok && unique_ok {
        EXIT_OK
    } else if out.smallness.smallness_ok && solve_code != EXIT_OK {
        solve_code
    } else {
        EXIT_CERTIFICATE
    };
    Ok((code, verdict))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    #[serde(flatten)]
    pub result: SpectrumResult,
    /// `[4/3, s0)`.
    pub s_range: (f64, f64),
    /// `weighted_admissibility(delta = 0, p = 2)`.
    pub unweighted_p2_admissible: bool,
}

fn run_spectrum(config: &RunConfig, w: &mut Writer) -> Result<(i32, String)> {
    let sp = &config.spectrum;
    let strip = Strip { re_min: sp.re_min, re_max: sp.re_max, im_max: sp.im_max };
    let result = compute_spectrum(strip, sp.tol, sp.k_max)?;
    let report = SpectrumReport {
        s_range: (S_MIN, regularity_bounds(&result)?.1),
        unweighted_p2_admissible: weighted_admissibility(&[0.0], 2.0, result.mu_m)?[0],
        result,
    };
    w.json("spectrum.json", &report)?;
    if sp.samples[0] > 0 && sp.samples[1] > 0 {
        w.text("spectrum_samples.csv", &symbol_samples_csv(strip, sp.samples[0], sp.samples[1]))?;
    }
    Ok((EXIT_OK, format!("z0 = {:.6}, s0 = {:.6}", report.result.z0, report.result.s0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsCaseReport {
    pub case: String,
    pub compatibility: Compatibility,
    pub table: ErrorTable,
    pub final_order_l2: Option<f64>,
    pub final_order_h1: Option<f64>,
    /// Outcome of the coupled case at ten times the amplitude on the coarsest level.
    pub amplitude_probe: Option<String>,
    pub error: Option<String>,
}

fn manufactured(config: &RunConfig, case: MmsCase, amplitude: f64) -> ManufacturedCase {
    let dims = config.geometry.dims;
    match case {
        MmsCase::StokesPolynomial => stokes_polynomial(dims),
        MmsCase::StokesTrig => stokes_trig(dims),
        MmsCase::HeatQuadratic => heat_quadratic(dims),
        MmsCase::HeatTrig => heat_trig(dims, 0.0),
        MmsCase::HeatIncompatible => heat_incompatible(dims),
        MmsCase::Coupled => coupled_case(dims, config.material, amplitude, config.g.clone()),
    }
}

/// Coupled case on every level, tabulating velocity and pressure errors.
fn coupled_table(config: &RunConfig, mc: &ManufacturedCase) -> Result<(ErrorTable, Vec<IterationTrace>)> {
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &div in &config.mms.levels {
        let rep = coupled_mms(mc, div, config.solver)?;
        rows.push(rep.error_row());
        traces.push(rep.trace);
    }
    Ok((ErrorTable::from_rows(&mc.name, rows), traces))
}

fn run_mms_case(config: &RunConfig, case: MmsCase) -> (MmsCaseReport, Vec<IterationTrace>) {
    let mc = manufactured(config, case, config.mms.amplitude);
    let compatibility = mc.compatibility(16);
    let (table, traces, probe) = match case {
        MmsCase::StokesPolynomial | MmsCase::StokesTrig => (mms_stokes_study(&mc, &config.mms.levels), Vec::new(), None),
        MmsCase::HeatQuadratic | MmsCase::HeatTrig | MmsCase::HeatIncompatible => {
            (mms_heat_study(&mc, &config.mms.levels), Vec::new(), None)
        }
        MmsCase::Coupled => {
            let big = manufactured(config, case, 10.0 * config.mms.amplitude);
            let probe = match coupled_mms(&big, config.mms.levels[0], config.solver) {
                Ok(r) => format!("converged in {} outer iterations, velocity H1 error {:.6e}", r.outer_iterations, r.velocity_h1),
                Err(e) => format!("failed: {e}"),
            };
            match coupled_table(config, &mc) {
                Ok((t, tr)) => (Ok(t), tr, Some(probe)),
                Err(e) => (Err(e), Vec::new(), Some(probe)),
            }
        }
    };
    let report = match table {
        Ok(table) => {
            let last = table.rows.last();
            MmsCaseReport {
                case: mc.name.clone(),
                compatibility,
                final_order_l2: last.and_then(|r| r.order_l2),
                final_order_h1: last.and_then(|r| r.order_h1),
                table,
                amplitude_probe: probe,
                error: None,
            }
        }
        Err(e) => MmsCaseReport {
            case: mc.name.clone(),
            compatibility,
            table: ErrorTable::from_rows(&mc.name, Vec::new()),
            final_order_l2: None,
            final_order_h1: None,
            amplitude_probe: probe,
            error: Some(e.to_string()),
        },
    };
    (report, traces)
}

fn run_mms(config: &RunConfig, w: &mut Writer) -> Result<(i32, String)> {
    let results: Vec<(MmsCaseReport, Vec<IterationTrace>)> =
        config.mms.cases.par_iter().map(|&c| run_mms_case(config, c)).collect();
    let mut failed = Vec::new();
    for (rep, traces) in &results {
        if rep.error.is_some() {
            failed.push(rep.case.clone());
        } else {
            w.text(&format!("mms_{}.csv", rep.case), &rep.table.to_csv())?;
        }
        for (div, t) in config.mms.levels.iter().zip(traces) {
            w.text(&format!("mms_{}_trace_{}x{}x{}.csv", rep.case, div[0], div[1], div[2]), &t.to_csv())?;
        }
    }
    let reports: Vec<&MmsCaseReport> = results.iter().map(|(r, _)| r).collect();
    w.json("mms.json", &reports)?;
    if failed.is_empty() {
        Ok((EXIT_OK, format!("{} case(s) completed", reports.len())))
    } else {
        Ok((EXIT_DIVERGENCE, format!("failed: {}", failed.join(", "))))
    }
}
