//! Experiment harness: load sweeps over seeds, reference solves, trace and
//! summary export and the theoretical runtime model.
//!
//! Every `(load_scale, seed)` cell runs independently, possibly in parallel
//! (`QIPM_OPF_THREADS`, 0 = rayon default). Results are gathered in plan order
//! and written once, so identical plans produce byte-identical files.

mod output;
mod runtime;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_dcopf_qp, load_case, scale_loads, PowerNetwork};
use crate::ipm::{
    solve_classical_ipm, solve_cnt_qipm, solve_nt_qipm, solve_qipm, ConvergenceMonitor, Engine, EnginePhase,
    SolveStatus, SolveTrace, SolverOptions, EPS_CONV_STRICT,
};
use crate::linsys::{
    assemble_newton_full, assemble_newton_reduced, condition_estimate, null_space_basis, HhlConfig, NoiseChannel,
    NoiseSpec,
};
use crate::qp::{IteratePoint, QpProblem};

pub use output::{cell_trace_path, emit_summary_json, emit_trace_csv, read_summary_json, TRACE_HEADER};
pub use runtime::{
    max_row_nonzeros, runtime_report, speedup_percent, RuntimeConstants, RuntimeModel, RuntimeReport,
    DEFAULT_C_CLASSICAL, DEFAULT_C_QUANTUM, DEFAULT_EPS0,
};

pub const SUMMARY_SCHEMA: &str = "qipm-opf/1";
pub const THREADS_ENV: &str = "QIPM_OPF_THREADS";
/// Power/inverse-iteration sweeps for the runtime model's condition estimate.
const KAPPA_ITERS: usize = 100;

/// `0.80, 0.85, …, 1.20`
pub fn default_load_scales() -> Vec<f64> {
    (0..9).map(|i| (80 + 5 * i) as f64 / 100.0).collect()
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidConfig(format!("sweep must be start:stop:step, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    // rounded to 1e-12 so 0.8 + 3·0.05 prints as 0.95
    Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSettings {
    pub window_n: usize,
    pub eps_conv: f64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        MonitorSettings { window_n: 5, eps_conv: EPS_CONV_STRICT }
    }
}

impl MonitorSettings {
    pub fn monitor(&self) -> Result<ConvergenceMonitor> {
        ConvergenceMonitor::new(self.window_n, self.eps_conv)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanOutputs {
    pub trace_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub case_path: PathBuf,
    pub engine: Engine,
    pub load_scales: Vec<f64>,
    /// Each seed replaces `noise.seed` in one cell per load scale.
    pub seeds: Vec<u64>,
    pub hhl: HhlConfig,
    pub noise: NoiseSpec,
    pub opts: SolverOptions,
    pub monitor: MonitorSettings,
    pub runtime: RuntimeConstants,
    pub outputs: PlanOutputs,
}

impl ExperimentPlan {
    /// Nominal load, seed 0, noiseless, default settings.
    pub fn new(case_path: impl Into<PathBuf>, engine: Engine) -> Self {
        ExperimentPlan {
            case_path: case_path.into(),
            engine,
            load_scales: vec![1.0],
            seeds: vec![0],
            hhl: HhlConfig::default(),
            noise: NoiseSpec::none(),
            opts: SolverOptions::default(),
            monitor: MonitorSettings::default(),
            runtime: RuntimeConstants::default(),
            outputs: PlanOutputs::default(),
        }
    }

    fn is_stochastic(&self) -> bool {
        self.noise.channel != NoiseChannel::None || self.hhl.shots > 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.load_scales.is_empty() {
            return Err(Error::InvalidConfig("plan has no load scales".into()));
        }
        if let Some(s) = self.load_scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig(format!("load scales must be positive, got {s}")));
        }
        if self.seeds.is_empty() && self.is_stochastic() {
            return Err(Error::InvalidConfig("stochastic noise needs at least one seed".into()));
        }
        self.hhl.validate()?;
        self.noise.validate()?;
        self.opts.validate()?;
        self.monitor.monitor()?;
        self.runtime.validate()
    }

    /// Seeds actually used: the plan's list, or the noise seed alone.
    pub fn effective_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.noise.seed]
        } else {
            self.seeds.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub buses: usize,
    pub branches: usize,
    pub generators: usize,
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub load_scale: f64,
    pub seed: u64,
    pub status: SolveStatus,
    pub failure: Option<String>,
    pub iterations: usize,
    pub quantum_iterations: usize,
    pub classical_iterations: usize,
    pub objective: Option<f64>,
    pub reference_objective: Option<f64>,
    pub reference_iterations: Option<usize>,
    pub relative_error: Option<f64>,
    pub runtime: Option<RuntimeReport>,
    pub trace_csv: Option<PathBuf>,
}

/// Relative objective error over the seeds of one load scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub load_scale: f64,
    pub cells: usize,
    pub converged: usize,
    pub failures: usize,
    pub median_error: Option<f64>,
    pub min_error: Option<f64>,
    pub max_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub plan: ExperimentPlan,
    pub seeds: Vec<u64>,
    pub problem: ProblemInfo,
    pub runtime_constants: RuntimeConstants,
    pub cells: Vec<CellResult>,
    pub scales: Vec<ScaleSummary>,
}

pub struct Experiment {
    pub summary: Summary,
    /// Engine traces in cell order; `None` where the engine returned an error.
    pub traces: Vec<Option<SolveTrace>>,
}

/// Runs one engine on `qp`.
pub fn run_engine(
    qp: &QpProblem,
    engine: Engine,
    hhl: &HhlConfig,
    noise: &NoiseSpec,
    opts: &SolverOptions,
    monitor: &MonitorSettings,
) -> Result<SolveTrace> {
    match engine {
        Engine::Ipm => solve_classical_ipm(qp, opts),
        Engine::Qipm => solve_qipm(qp, hhl, noise, opts),
        Engine::NtQipm => solve_nt_qipm(qp, hhl, noise, opts),
        Engine::CntQipm => solve_cnt_qipm(qp, hhl, noise, opts, monitor.monitor()?),
    }
}

/// Condition estimate and row sparsity of the last linear system the quantum
/// phase would solve, with that system's dimension.
pub fn quantum_system_profile(qp: &QpProblem, engine: Engine, trace: &SolveTrace) -> Result<Option<(f64, usize, usize)>> {
    if trace.phase_iterations(EnginePhase::Quantum) == 0 {
        return Ok(None);
    }
    let pt: &IteratePoint = trace.handoff.as_ref().unwrap_or(&trace.final_point);
    let a = match engine {
        Engine::Ipm => return Ok(None),
        Engine::Qipm => assemble_newton_full(qp, pt, 0.0)?.0,
        Engine::NtQipm | Engine::CntQipm => assemble_newton_reduced(qp, pt, &null_space_basis(&qp.g)?, 0.0)?.0,
    };
    Ok(Some((condition_estimate(&a, KAPPA_ITERS)?, max_row_nonzeros(&a), a.nrows())))
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|v| v.is_finite())
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

fn summarize_scale(load_scale: f64, cells: &[&CellResult]) -> ScaleSummary {
    let mut errors: Vec<f64> = cells.iter().filter_map(|c| c.relative_error).collect();
    errors.sort_by(f64::total_cmp);
    ScaleSummary {
        load_scale,
        cells: cells.len(),
        converged: cells.iter().filter(|c| c.status == SolveStatus::Converged).count(),
        failures: cells.iter().filter(|c| c.status == SolveStatus::NumericalFailure).count(),
        median_error: median(&errors),
        min_error: errors.first().copied(),
        max_error: errors.last().copied(),
    }
}

fn failed_cell(load_scale: f64, seed: u64, msg: String, reference: &Result<SolveTrace, String>) -> CellResult {
    CellResult {
        load_scale,
        seed,
        status: SolveStatus::NumericalFailure,
        failure: Some(msg),
        iterations: 0,
        quantum_iterations: 0,
        classical_iterations: 0,
        objective: None,
        reference_objective: reference.as_ref().ok().and_then(|r| finite(r.final_objective())),
        reference_iterations: reference.as_ref().ok().map(|r| r.iterations()),
        relative_error: None,
        runtime: None,
        trace_csv: None,
    }
}

fn run_cell(
    plan: &ExperimentPlan,
    qp: &QpProblem,
    reference: &Result<SolveTrace, String>,
    load_scale: f64,
    seed: u64,
) -> (CellResult, Option<SolveTrace>) {
    let noise = NoiseSpec { seed, ..plan.noise };
    let run = match (plan.engine, reference) {
        // the reference is this very solve
        (Engine::Ipm, Ok(r)) => Ok(r.clone()),
        _ => run_engine(qp, plan.engine, &plan.hhl, &noise, &plan.opts, &plan.monitor),
    };
    let trace = match run {
        Ok(t) => t,
        Err(e) => return (failed_cell(load_scale, seed, e.to_string(), reference), None),
    };
    let objective = finite(trace.final_objective());
    let reference_objective = reference.as_ref().ok().and_then(|r| finite(r.final_objective()));
    let reference_iterations = reference.as_ref().ok().map(|r| r.iterations());
    let relative_error = match (objective, reference_objective) {
        (Some(a), Some(b)) if b != 0.0 => Some((a - b).abs() / b.abs()),
        _ => None,
    };
    let runtime = match quantum_system_profile(qp, plan.engine, &trace) {
        Ok(Some((kappa, s0, dim))) => RuntimeModel::new(plan.runtime, kappa, s0)
            .ok()
            .map(|model| runtime_report(&trace, model, qp.n(), dim, reference_iterations)),
        Ok(None) => RuntimeModel::new(plan.runtime, 1.0, 1)
            .ok()
            .map(|model| runtime_report(&trace, model, qp.n(), qp.n(), reference_iterations)),
        Err(_) => None,
    };
    let cell = CellResult {
        load_scale,
        seed,
        status: trace.status,
        failure: trace.failure.clone(),
        iterations: trace.iterations(),
        quantum_iterations: trace.phase_iterations(EnginePhase::Quantum),
        classical_iterations: trace.phase_iterations(EnginePhase::Classical),
        objective,
        reference_objective,
        reference_iterations,
        relative_error,
        runtime,
        trace_csv: None,
    };
    (cell, Some(trace))
}

fn problem_info(net: &PowerNetwork) -> Result<ProblemInfo> {
    let qp = build_dcopf_qp(net)?;
    Ok(ProblemInfo {
        buses: net.num_buses(),
        branches: net.num_branches(),
        generators: net.num_generators(),
        n: qp.n(),
        m: qp.m(),
    })
}

/// Runs every cell of `plan` and writes the requested outputs.
///
/// Plan, case-file and output errors abort; solver failures are recorded in
/// the affected cell only.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Experiment> {
    plan.validate()?;
    let net = load_case(&plan.case_path)?;
    let problem = problem_info(&net)?;
    let seeds = plan.effective_seeds();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads_from_env()?)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let (cells, traces): (Vec<CellResult>, Vec<Option<SolveTrace>>) = pool.install(|| {
        let problems: Vec<(f64, Result<QpProblem, String>, Result<SolveTrace, String>)> = plan
            .load_scales
            .par_iter()
            .map(|&scale| {
                let qp = scale_loads(&net, scale).and_then(|n| build_dcopf_qp(&n)).map_err(|e| e.to_string());
                let reference = match &qp {
                    Ok(qp) => solve_classical_ipm(qp, &plan.opts).map_err(|e| format!("reference solve: {e}")),
                    Err(e) => Err(e.clone()),
                };
                (scale, qp, reference)
            })
            .collect();
        let jobs: Vec<(usize, u64)> =
            (0..problems.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
        jobs.par_iter()
            .map(|&(i, seed)| {
                let (scale, qp, reference) = &problems[i];
                match qp {
                    Ok(qp) => run_cell(plan, qp, reference, *scale, seed),
                    Err(e) => (failed_cell(*scale, seed, e.clone(), reference), None),
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .unzip()
    });

    let scales = plan
        .load_scales
        .iter()
        .map(|&s| summarize_scale(s, &cells.iter().filter(|c| c.load_scale == s).collect::<Vec<_>>()))
        .collect();
    let mut experiment = Experiment {
        summary: Summary {
            schema: SUMMARY_SCHEMA.into(),
            plan: plan.clone(),
            seeds,
            problem,
            runtime_constants: plan.runtime,
            cells,
            scales,
        },
        traces,
    };
    write_outputs(&mut experiment, &plan.outputs)?;
    Ok(experiment)
}

fn write_outputs(exp: &mut Experiment, outputs: &PlanOutputs) -> Result<()> {
    if let Some(base) = &outputs.trace_csv {
        let single = exp.summary.cells.len() == 1;
        for (cell, trace) in exp.summary.cells.iter_mut().zip(&exp.traces) {
            let Some(trace) = trace else { continue };
            let path = if single { base.clone() } else { cell_trace_path(base, cell.load_scale, cell.seed) };
            emit_trace_csv(trace, &path)?;
            cell.trace_csv = Some(path);
        }
    }
    if let Some(path) = &outputs.summary_json {
        emit_summary_json(&exp.summary, path)?;
    }
    Ok(())
}
