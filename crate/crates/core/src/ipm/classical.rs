use super::{finish, run_loop, start::find_interior_point, Engine, EnginePhase, SolveTrace, SolverOptions};
use crate::error::Result;
use crate::linsys::solve_newton_normal;
use crate::qp::{residuals, IteratePoint, QpProblem};

/// Primal-dual IPM with exact Newton steps from a computed interior point.
pub fn solve_classical_ipm(qp: &QpProblem, opts: &SolverOptions) -> Result<SolveTrace> {
    opts.validate()?;
    let start = find_interior_point(qp)?;
    solve_classical_ipm_from(qp, start, opts)
}

/// As [`solve_classical_ipm`] from a supplied strictly positive point, which
/// need not be feasible: the Newton step carries `r_p` and `r_d`.
pub fn solve_classical_ipm_from(qp: &QpProblem, start: IteratePoint, opts: &SolverOptions) -> Result<SolveTrace> {
    opts.validate()?;
    start.check_dims(qp)?;
    if !start.is_interior() {
        return Err(crate::Error::Domain("warm start must have x > 0 and s > 0".into()));
    }
    let mut records = Vec::new();
    let (pt, end) = run_loop(
        qp,
        start,
        opts,
        opts.k_max,
        EnginePhase::Classical,
        &mut records,
        |pt, target| solve_newton_normal(qp, pt, &residuals(qp, pt, target)?),
        |_, _| Ok(false),
    );
    Ok(finish(Engine::Ipm, records, pt, end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipm::{test_support::case, Centering, SolveStatus};
    use crate::qp::{dot, is_eps_optimal};

    #[test]
    fn case3_optimum() {
        let qp = case("case3");
        let trace = solve_classical_ipm(&qp, &SolverOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!(is_eps_optimal(&qp, &trace.final_point, 1e-6));
        let obj = trace.final_objective().unwrap();
        assert!((obj - 8944.0).abs() < 1e-6 * 8944.0, "{obj}");
    }

    #[test]
    fn case5_iteration_count() {
        let qp = case("case5");
        let trace = solve_classical_ipm(&qp, &SolverOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!(trace.iterations() <= 40, "{}", trace.iterations());
        for r in &trace.records {
            assert_eq!(r.engine_phase, EnginePhase::Classical);
        }
    }

    #[test]
    fn warm_start_near_optimum() {
        let qp = case("case5");
        let opts = SolverOptions::default();
        let base = solve_classical_ipm(&qp, &SolverOptions { eps: 1e-10, ..opts.clone() }).unwrap();
        let p = &base.final_point;
        let nudge = |v: &[f64]| v.iter().map(|v| v + 1e-8).collect::<Vec<_>>();
        let start = IteratePoint::new(nudge(&p.x), p.y.clone(), nudge(&p.s));
        let warm = solve_classical_ipm_from(&qp, start, &opts).unwrap();
        assert_eq!(warm.status, SolveStatus::Converged);
        assert!(warm.iterations() <= 3, "{}", warm.iterations());
    }

    #[test]
    fn lp_centering_is_monotone() {
        // case5 has linear costs, so full feasible steps give μ⁺ = σμ exactly.
        let qp = case("case5");
        assert!(qp.q.iter().all(|&q| q == 0.0));
        for centering in [Centering::Fixed(0.1), Centering::ShortStep] {
            let opts = SolverOptions { centering, k_max: 30, ..SolverOptions::default() };
            let trace = solve_classical_ipm(&qp, &opts).unwrap();
            let sigma = opts.sigma(qp.n());
            let mut mu = dot(&find_interior_point(&qp).unwrap().x, &find_interior_point(&qp).unwrap().s)
                / qp.n() as f64;
            for r in &trace.records {
                if r.alpha == 1.0 {
                    assert!((r.mu - sigma * mu).abs() <= 1e-10 * mu.max(1.0), "{} vs {}", r.mu, sigma * mu);
                }
                mu = r.mu;
            }
        }
    }
}
