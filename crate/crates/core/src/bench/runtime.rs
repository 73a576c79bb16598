//! Theoretical runtime model.
//!
//! A classical iteration costs `c_classical·n³`; a quantum iteration costs
//! `c_quantum·N·s₀·κ·ln(1/ε₀)` where `N` is the dimension of the system handed
//! to the linear solver. The constants are illustrative and every report
//! carries them so the arithmetic can be redone from the report alone.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipm::{EnginePhase, SolveTrace};

pub const DEFAULT_C_CLASSICAL: f64 = 1e-9;
pub const DEFAULT_C_QUANTUM: f64 = 1e-6;
pub const DEFAULT_EPS0: f64 = 1e-3;

/// The plan-level constants; κ and s₀ are measured per run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeConstants {
    pub c_classical: f64,
    pub c_quantum: f64,
    pub eps0: f64,
}

impl Default for RuntimeConstants {
    fn default() -> Self {
        RuntimeConstants { c_classical: DEFAULT_C_CLASSICAL, c_quantum: DEFAULT_C_QUANTUM, eps0: DEFAULT_EPS0 }
    }
}

impl RuntimeConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_classical > 0.0 && self.c_quantum > 0.0) {
            return Err(Error::InvalidConfig("runtime constants must be positive".into()));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return Err(Error::InvalidConfig(format!("eps0 must lie in (0, 1), got {}", self.eps0)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeModel {
    pub c_classical: f64,
    pub c_quantum: f64,
    pub kappa_estimate: f64,
    /// Maximum nonzeros per row of the quantum-phase system.
    pub s0: usize,
    pub eps0: f64,
}

impl RuntimeModel {
    pub fn new(constants: RuntimeConstants, kappa_estimate: f64, s0: usize) -> Result<Self> {
        constants.validate()?;
        if !(kappa_estimate >= 1.0 && kappa_estimate.is_finite()) {
            return Err(Error::Domain(format!("condition estimate must be finite and ≥ 1, got {kappa_estimate}")));
        }
        if s0 == 0 {
            return Err(Error::Domain("sparsity s0 must be positive".into()));
        }
        Ok(RuntimeModel {
            c_classical: constants.c_classical,
            c_quantum: constants.c_quantum,
            kappa_estimate,
            s0,
            eps0: constants.eps0,
        })
    }

    pub fn classical_iteration_cost(&self, n: usize) -> f64 {
        self.c_classical * (n as f64).powi(3)
    }

    pub fn quantum_iteration_cost(&self, dim: usize) -> f64 {
        self.c_quantum * dim as f64 * self.s0 as f64 * self.kappa_estimate * (1.0 / self.eps0).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeReport {
    pub model: RuntimeModel,
    /// QP dimension, which sizes the classical cost.
    pub n: usize,
    /// Dimension of the quantum-phase linear system.
    pub quantum_dim: usize,
    pub quantum_iterations: usize,
    pub classical_iterations: usize,
    pub t_quantum: f64,
    pub t_classical: f64,
    pub t_total: f64,
    /// Iterations of the all-classical comparison run, when known.
    pub ipm_iterations: Option<usize>,
    pub t_ipm: Option<f64>,
    pub speedup_percent: Option<f64>,
}

/// Models the running time of `trace` and, given the iteration count of an
/// all-classical solve of the same problem, the speedup over it.
pub fn runtime_report(
    trace: &SolveTrace,
    model: RuntimeModel,
    n: usize,
    quantum_dim: usize,
    ipm_iterations: Option<usize>,
) -> RuntimeReport {
    let quantum_iterations = trace.phase_iterations(EnginePhase::Quantum);
    let classical_iterations = trace.phase_iterations(EnginePhase::Classical);
    let t_quantum = quantum_iterations as f64 * model.quantum_iteration_cost(quantum_dim);
    let t_classical = classical_iterations as f64 * model.classical_iteration_cost(n);
    let t_total = t_quantum + t_classical;
    let t_ipm = ipm_iterations.map(|k| k as f64 * model.classical_iteration_cost(n));
    let speedup_percent = t_ipm.and_then(|t| speedup_percent(t, t_total));
    RuntimeReport {
        model,
        n,
        quantum_dim,
        quantum_iterations,
        classical_iterations,
        t_quantum,
        t_classical,
        t_total,
        ipm_iterations,
        t_ipm,
        speedup_percent,
    }
}

/// `(t_ipm / t_engine − 1)·100`; `None` when the engine time is zero.
pub fn speedup_percent(t_ipm: f64, t_engine: f64) -> Option<f64> {
    (t_engine > 0.0).then(|| (t_ipm / t_engine - 1.0) * 100.0)
}

pub fn max_row_nonzeros(a: &Mat<f64>) -> usize {
    (0..a.nrows()).map(|i| (0..a.ncols()).filter(|&j| a[(i, j)] != 0.0).count()).max().unwrap_or(0)
}
