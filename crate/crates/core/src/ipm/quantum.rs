use faer::Mat;
use rand_chacha::ChaCha8Rng;

use super::{
    finish, run_loop, start::find_interior_point, Engine, EnginePhase, IterationRecord, LoopEnd, SolveTrace,
    SolverOptions,
};
use crate::error::Result;
use crate::linsys::{
    assemble_newton_full, assemble_newton_reduced, hhl_emulate_with_rng, null_space_basis, recover_reduced_direction,
    solve_exact, HhlConfig, NewtonDirection, NoiseSpec,
};
use crate::qp::{IteratePoint, QpProblem};

/// Anything that returns an (approximate) solution of `A x = r`.
pub trait DirectionSolver {
    fn solve(&mut self, a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>>;
}

impl<F: FnMut(&Mat<f64>, &[f64]) -> Result<Vec<f64>>> DirectionSolver for F {
    fn solve(&mut self, a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>> {
        self(a, r)
    }
}

pub struct ExactSolver;

impl DirectionSolver for ExactSolver {
    fn solve(&mut self, a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>> {
        solve_exact(a, r)
    }
}

/// The HHL emulator under a noise channel, with one RNG stream per solve run.
pub struct HhlSolver {
    pub cfg: HhlConfig,
    pub noise: NoiseSpec,
    rng: ChaCha8Rng,
}

impl HhlSolver {
    pub fn new(cfg: HhlConfig, noise: NoiseSpec) -> Self {
        let rng = noise.rng();
        HhlSolver { cfg, noise, rng }
    }
}

impl DirectionSolver for HhlSolver {
    fn solve(&mut self, a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>> {
        hhl_emulate_with_rng(a, r, &self.cfg, &self.noise, &mut self.rng).map(|(x, _)| x)
    }
}

/// Plain QIPM: the full Newton system through the HHL emulator.
pub fn solve_qipm(qp: &QpProblem, cfg: &HhlConfig, noise: &NoiseSpec, opts: &SolverOptions) -> Result<SolveTrace> {
    opts.validate()?;
    cfg.validate()?;
    noise.validate()?;
    let start = find_interior_point(qp)?;
    solve_qipm_with(qp, start, opts, &mut HhlSolver::new(cfg.clone(), *noise))
}

pub fn solve_qipm_with(
    qp: &QpProblem,
    start: IteratePoint,
    opts: &SolverOptions,
    solver: &mut impl DirectionSolver,
) -> Result<SolveTrace> {
    opts.validate()?;
    start.check_dims(qp)?;
    let (n, m) = (qp.n(), qp.m());
    let mut records = Vec::new();
    let (pt, end) = run_loop(
        qp,
        start,
        opts,
        opts.k_max,
        EnginePhase::Quantum,
        &mut records,
        |pt, target| {
            let (a, r) = assemble_newton_full(qp, pt, target)?;
            NewtonDirection::from_stacked(&solver.solve(&a, &r)?, n, m)
        },
        |_, _| Ok(false),
    );
    Ok(finish(Engine::Qipm, records, pt, end))
}

/// NT-QIPM: reduced null-space Newton systems through the HHL emulator.
pub fn solve_nt_qipm(qp: &QpProblem, cfg: &HhlConfig, noise: &NoiseSpec, opts: &SolverOptions) -> Result<SolveTrace> {
    opts.validate()?;
    cfg.validate()?;
    noise.validate()?;
    let start = find_interior_point(qp)?;
    solve_nt_qipm_with(qp, start, opts, &mut HhlSolver::new(cfg.clone(), *noise))
}

/// NT-QIPM from a primal/dual feasible interior `start` with any solver.
pub fn solve_nt_qipm_with(
    qp: &QpProblem,
    start: IteratePoint,
    opts: &SolverOptions,
    solver: &mut impl DirectionSolver,
) -> Result<SolveTrace> {
    opts.validate()?;
    start.check_dims(qp)?;
    let v = null_space_basis(&qp.g)?;
    let mut records = Vec::new();
    let (pt, end) = nt_loop(qp, &v, start, opts, opts.k_max, &mut records, solver, |_, _| Ok(false));
    Ok(finish(Engine::NtQipm, records, pt, end))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn nt_loop(
    qp: &QpProblem,
    v: &Mat<f64>,
    start: IteratePoint,
    opts: &SolverOptions,
    k_max: usize,
    records: &mut Vec<IterationRecord>,
    solver: &mut impl DirectionSolver,
    observe: impl FnMut(&IterationRecord, &IteratePoint) -> Result<bool>,
) -> (IteratePoint, LoopEnd) {
    run_loop(
        qp,
        start,
        opts,
        k_max,
        EnginePhase::Quantum,
        records,
        |pt, target| {
            let (a, r) = assemble_newton_reduced(qp, pt, v, target)?;
            let sol = solver.solve(&a, &r)?;
            recover_reduced_direction(qp, v, &sol, opts.literal_step9)
        },
        observe,
    )
}
