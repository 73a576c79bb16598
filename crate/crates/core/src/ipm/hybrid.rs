use super::monitor::{convergence_index, ConvergenceMonitor};
use super::quantum::{nt_loop, DirectionSolver, HhlSolver};
use super::{
    finish, run_loop, start::find_interior_point, Engine, EnginePhase, LoopEnd, SolveStatus, SolveTrace,
    SolverOptions,
};
use crate::error::Result;
use crate::linsys::{null_space_basis, solve_newton_normal, HhlConfig, NoiseSpec};
use crate::qp::{residuals, IteratePoint, QpProblem};

/// CNT-QIPM: NT-QIPM until `monitor` fires (or `k_max`), then classical IPM
/// warm-started from the last quantum iterate.
pub fn solve_cnt_qipm(
    qp: &QpProblem,
    cfg: &HhlConfig,
    noise: &NoiseSpec,
    opts: &SolverOptions,
    monitor: ConvergenceMonitor,
) -> Result<SolveTrace> {
    opts.validate()?;
    cfg.validate()?;
    noise.validate()?;
    let start = find_interior_point(qp)?;
    solve_cnt_qipm_from(qp, start, opts, monitor, &mut HhlSolver::new(cfg.clone(), *noise))
}

pub fn solve_cnt_qipm_from(
    qp: &QpProblem,
    start: IteratePoint,
    opts: &SolverOptions,
    mut monitor: ConvergenceMonitor,
    solver: &mut impl DirectionSolver,
) -> Result<SolveTrace> {
    opts.validate()?;
    start.check_dims(qp)?;
    let v = null_space_basis(&qp.g)?;
    let mut records = Vec::new();
    let (handoff, end) = nt_loop(qp, &v, start, opts, opts.k_max, &mut records, solver, |rec, _| {
        Ok(convergence_index(&mut monitor, rec.objective)?.fired)
    });
    if let LoopEnd::Converged = end {
        let mut trace = finish(Engine::CntQipm, records, handoff.clone(), end);
        trace.handoff = Some(handoff);
        return Ok(trace);
    }
    let (pt, end) = run_loop(
        qp,
        handoff.clone(),
        opts,
        opts.phase2_k_max,
        EnginePhase::Classical,
        &mut records,
        |pt, target| solve_newton_normal(qp, pt, &residuals(qp, pt, target)?),
        |_, _| Ok(false),
    );
    let mut trace = finish(Engine::CntQipm, records, pt, end);
    if trace.status == SolveStatus::NumericalFailure {
        let msg = trace.failure.take().unwrap_or_default();
        trace.failure = Some(format!("classical phase failed from the quantum handoff: {msg}"));
    }
    trace.handoff = Some(handoff);
    Ok(trace)
}
