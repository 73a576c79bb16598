//! Interior-point engines.
//!
//! - [`solve_classical_ipm`]: exact Newton steps.
//! - [`solve_qipm`]: the full Newton system through the (noisy) HHL solver,
//!   with no feasibility repair.
//! - [`solve_nt_qipm`]: the reduced null-space system, which confines every
//!   solver error to complementarity so iterates stay primal/dual feasible.
//! - [`solve_cnt_qipm`]: NT-QIPM until a moving-average monitor detects
//!   stalling, then classical IPM warm-started from the last iterate.

mod classical;
mod hybrid;
mod monitor;
mod quantum;
mod start;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::NewtonDirection;
use crate::qp::{dot, inf_norm, is_eps_optimal, objective_unchecked, residuals, IteratePoint, QpProblem};

pub use classical::{solve_classical_ipm, solve_classical_ipm_from};
pub use hybrid::{solve_cnt_qipm, solve_cnt_qipm_from};
pub use monitor::{convergence_index, ConvergenceMonitor, MonitorStep, EPS_CONV_LOOSE, EPS_CONV_STRICT};
pub use quantum::{
    solve_nt_qipm, solve_nt_qipm_with, solve_qipm, solve_qipm_with, DirectionSolver, ExactSolver, HhlSolver,
};
pub use start::find_interior_point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Ipm,
    Qipm,
    NtQipm,
    CntQipm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Ipm => "ipm",
            Engine::Qipm => "qipm",
            Engine::NtQipm => "nt-qipm",
            Engine::CntQipm => "cnt-qipm",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipm" => Ok(Engine::Ipm),
            "qipm" => Ok(Engine::Qipm),
            "nt-qipm" => Ok(Engine::NtQipm),
            "cnt-qipm" => Ok(Engine::CntQipm),
            _ => Err(Error::InvalidConfig(format!("unknown engine {s:?}"))),
        }
    }
}

/// Rule for the centering parameter σ in the barrier target `σμ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// `σ = 1 − β/√n`
    ShortStep,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub eps: f64,
    pub k_max: usize,
    pub beta: f64,
    pub centering: Centering,
    /// Multiplier `M` of the barrier target `M·xᵀs/n`; `None` uses σ.
    pub centering_m: Option<f64>,
    pub theta: f64,
    /// Accepted for completeness; no engine reads it.
    pub delta: f64,
    pub step_damping: f64,
    /// Smallest step accepted before declaring numerical failure.
    pub min_step: f64,
    /// Iteration budget of the classical phase of CNT-QIPM.
    pub phase2_k_max: usize,
    /// NT-QIPM dual step `Δs = −GᵀΔy` instead of `QΔx − GᵀΔy`.
    pub literal_step9: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps: 1e-6,
            k_max: 200,
            beta: 0.1,
            centering: Centering::Fixed(0.1),
            centering_m: None,
            theta: 0.25,
            delta: 0.5,
            step_damping: 0.9,
            min_step: 1e-12,
            phase2_k_max: 200,
            literal_step9: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if let Centering::Fixed(s) = self.centering {
            if !(s > 0.0 && s < 1.0) {
                return bad(format!("fixed sigma must lie in (0, 1), got {s}"));
            }
        }
        if let Some(m) = self.centering_m {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("centering_m must be positive, got {m}"));
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(self.step_damping > 0.0 && self.step_damping < 1.0) {
            return bad(format!("step_damping must lie in (0, 1), got {}", self.step_damping));
        }
        Ok(())
    }

    pub fn sigma(&self, n: usize) -> f64 {
        match self.centering {
            Centering::ShortStep => 1.0 - self.beta / (n as f64).sqrt(),
            Centering::Fixed(s) => s,
        }
    }

    /// Barrier target for an iterate with duality measure `mu`.
    pub fn target(&self, n: usize, mu: f64) -> f64 {
        self.centering_m.unwrap_or_else(|| self.sigma(n)) * mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnginePhase {
    Quantum,
    Classical,
}

impl EnginePhase {
    pub fn name(self) -> &'static str {
        match self {
            EnginePhase::Quantum => "quantum",
            EnginePhase::Classical => "classical",
        }
    }
}

/// State after iteration `k` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub engine_phase: EnginePhase,
    /// Generation cost, including the constant dropped by the QP encoding.
    pub objective: f64,
    pub mu: f64,
    pub r_p_inf: f64,
    pub r_d_inf: f64,
    /// `‖XSe‖∞`, the complementarity residual against a zero target.
    pub r_c_inf: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub engine: Engine,
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub final_point: IteratePoint,
    pub failure: Option<String>,
    /// Last quantum-phase iterate handed to the classical phase (CNT-QIPM).
    pub handoff: Option<IteratePoint>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn phase_iterations(&self, phase: EnginePhase) -> usize {
        self.records.iter().filter(|r| r.engine_phase == phase).count()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }
}

/// QP objective plus the constant recorded in the variable map.
pub fn physical_objective(qp: &QpProblem, x: &[f64]) -> f64 {
    objective_unchecked(qp, x) + qp.map.as_ref().map_or(0.0, |m| m.objective_constant)
}

pub(crate) fn record(qp: &QpProblem, pt: &IteratePoint, k: usize, phase: EnginePhase, alpha: f64) -> IterationRecord {
    let res = residuals(qp, pt, 0.0).expect("iterate dimensions are fixed by the engine");
    IterationRecord {
        k,
        engine_phase: phase,
        objective: physical_objective(qp, &pt.x),
        mu: dot(&pt.x, &pt.s) / qp.n() as f64,
        r_p_inf: res.primal_inf(),
        r_d_inf: res.dual_inf(),
        r_c_inf: inf_norm(&res.r_c),
        alpha,
    }
}

/// Largest `α` with `v + α·dv ≥ 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter().zip(dv).filter(|(_, d)| **d < 0.0).map(|(v, d)| -v / d).fold(f64::INFINITY, f64::min)
}

/// Full step when it keeps `x, s > 0`, otherwise `damping` times the distance
/// to the boundary.
pub(crate) fn step_length(pt: &IteratePoint, dir: &NewtonDirection, damping: f64) -> f64 {
    let to_boundary = max_step(&pt.x, &dir.dx).min(max_step(&pt.s, &dir.ds));
    if to_boundary > 1.0 {
        1.0
    } else {
        damping * to_boundary
    }
}

pub(crate) fn take_step(pt: &IteratePoint, dir: &NewtonDirection, alpha: f64) -> IteratePoint {
    let axpy = |v: &[f64], d: &[f64]| v.iter().zip(d).map(|(v, d)| v + alpha * d).collect::<Vec<_>>();
    IteratePoint::new(axpy(&pt.x, &dir.dx), axpy(&pt.y, &dir.dy), axpy(&pt.s, &dir.ds))
}

pub(crate) enum LoopEnd {
    Converged,
    MaxIterations,
    Failure(String),
    /// The observer asked to stop.
    Stopped,
}

/// Shared iteration driver. `direction` computes a step for the current
/// iterate and barrier target; `observe` sees every record and may stop the
/// loop by returning `Ok(true)`.
pub(crate) fn run_loop(
    qp: &QpProblem,
    start: IteratePoint,
    opts: &SolverOptions,
    k_max: usize,
    phase: EnginePhase,
    records: &mut Vec<IterationRecord>,
    mut direction: impl FnMut(&IteratePoint, f64) -> Result<NewtonDirection>,
    mut observe: impl FnMut(&IterationRecord, &IteratePoint) -> Result<bool>,
) -> (IteratePoint, LoopEnd) {
    let mut pt = start;
    for _ in 0..k_max {
        if is_eps_optimal(qp, &pt, opts.eps) {
            return (pt, LoopEnd::Converged);
        }
        let mu = dot(&pt.x, &pt.s) / qp.n() as f64;
        let dir = match direction(&pt, opts.target(qp.n(), mu)) {
            Ok(d) => d,
            Err(e) => return (pt, LoopEnd::Failure(format!("linear solve failed: {e}"))),
        };
        if dir.dx.iter().chain(&dir.dy).chain(&dir.ds).any(|v| !v.is_finite()) {
            return (pt, LoopEnd::Failure("non-finite Newton direction".into()));
        }
        let alpha = step_length(&pt, &dir, opts.step_damping);
        if !(alpha >= opts.min_step) {
            return (pt, LoopEnd::Failure(format!("step length {alpha:e} below {:e}", opts.min_step)));
        }
        let next = take_step(&pt, &dir, alpha);
        if !next.is_interior() {
            return (pt, LoopEnd::Failure("iterate left the positive orthant".into()));
        }
        pt = next;
        let rec = record(qp, &pt, records.len() + 1, phase, alpha);
        let stop = observe(&rec, &pt);
        records.push(rec);
        match stop {
            Ok(true) => return (pt, LoopEnd::Stopped),
            Ok(false) => {}
            Err(e) => return (pt, LoopEnd::Failure(e.to_string())),
        }
    }
    if is_eps_optimal(qp, &pt, opts.eps) {
        (pt, LoopEnd::Converged)
    } else {
        (pt, LoopEnd::MaxIterations)
    }
}

pub(crate) fn finish(engine: Engine, records: Vec<IterationRecord>, pt: IteratePoint, end: LoopEnd) -> SolveTrace {
    let (status, failure) = match end {
        LoopEnd::Converged => (SolveStatus::Converged, None),
        LoopEnd::MaxIterations | LoopEnd::Stopped => (SolveStatus::MaxIterations, None),
        LoopEnd::Failure(msg) => (SolveStatus::NumericalFailure, Some(msg)),
    };
    SolveTrace { engine, records, status, final_point: pt, failure, handoff: None }
}
