//! Strictly feasible starting points.
//!
//! Primal: project `τe` onto `{Gx = J}`, doubling `τ` until the projection is
//! positive. When the null-space component of `e` has negative entries no `τ`
//! works, so the fallback computes the analytic center of `{Gx = J, x > 0}`
//! by infeasible-start Newton on `−Σ log x`.
//!
//! Dual: least squares `Gᵀy ≈ c + Qx − τe`, doubling `τ` until
//! `s = c + Qx − Gᵀy > 0`. The fallback uses the direction `d = Gᵀy₁ ≈ X⁻¹e`,
//! which is positive near the analytic center and gives `x_i s_i ≈ t`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linsys::solve_spd;
use crate::qp::{inf_norm, IteratePoint, QpProblem};

const ESCALATIONS: usize = 20;
const CENTER_ITERS: usize = 300;

struct Gram<'a> {
    qp: &'a QpProblem,
    ggt: Mat<f64>,
}

impl<'a> Gram<'a> {
    fn new(qp: &'a QpProblem) -> Self {
        Gram { qp, ggt: qp.g_sparse().scaled_gram(&vec![1.0; qp.n()]) }
    }

    /// `(GGᵀ)⁻¹ G v`
    fn lsq(&self, v: &[f64]) -> Result<Vec<f64>> {
        solve_spd(&self.ggt, &self.qp.g_mul(v))
    }

    /// `Gᵀ(GGᵀ)⁻¹ r`
    fn min_norm(&self, r: &[f64]) -> Result<Vec<f64>> {
        Ok(self.qp.gt_mul(&solve_spd(&self.ggt, r)?))
    }
}

/// Finds `(x, y, s)` with `Gx = J`, `Gᵀy + s − Qx = c` and `x, s > 0`.
pub fn find_interior_point(qp: &QpProblem) -> Result<IteratePoint> {
    let gram = Gram::new(qp);
    let x = match project_positive(qp, &gram)? {
        Some(x) => x,
        None => analytic_center(qp)?,
    };
    let (x, y, s) = match dual_by_escalation(qp, &gram, &x)? {
        Some((y, s)) => (x, y, s),
        None => {
            let attempt = weighted_dual(qp, &gram, &x)?;
            match attempt {
                Some((y, s)) => (x, y, s),
                None => {
                    let x = analytic_center(qp)?;
                    let (y, s) = weighted_dual(qp, &gram, &x)?
                        .ok_or_else(|| Error::InfeasibleStart("no strictly feasible dual slack found".into()))?;
                    (x, y, s)
                }
            }
        }
    };
    let pt = IteratePoint::new(x, y, s);
    if !pt.is_interior() {
        return Err(Error::InfeasibleStart("starting point is not strictly positive".into()));
    }
    Ok(pt)
}

fn project_positive(qp: &QpProblem, gram: &Gram) -> Result<Option<Vec<f64>>> {
    let n = qp.n();
    let x_ls = gram.min_norm(&qp.j)?;
    let e = vec![1.0; n];
    let range_e = gram.min_norm(&qp.g_mul(&e))?;
    let null_e: Vec<f64> = range_e.iter().map(|r| 1.0 - r).collect();
    let mut tau = 1.0;
    for _ in 0..ESCALATIONS {
        let x: Vec<f64> = x_ls.iter().zip(&null_e).map(|(a, p)| a + tau * p).collect();
        if x.iter().all(|&v| v > 0.0) && primal_ok(qp, &x) {
            return Ok(Some(x));
        }
        tau *= 2.0;
    }
    Ok(None)
}

fn primal_ok(qp: &QpProblem, x: &[f64]) -> bool {
    let gx = qp.g_mul(x);
    let r: Vec<f64> = qp.j.iter().zip(&gx).map(|(j, g)| j - g).collect();
    inf_norm(&r) <= 1e-10 * inf_norm(&qp.j).max(1.0)
}

/// Analytic center of `{Gx = J, x > 0}` by infeasible-start damped Newton.
fn analytic_center(qp: &QpProblem) -> Result<Vec<f64>> {
    let n = qp.n();
    let mut x = vec![1.0; n];
    for _ in 0..CENTER_ITERS {
        let gx = qp.g_mul(&x);
        // G X² Gᵀ w = J − 2Gx,  Δx = x + X²Gᵀw
        let rhs: Vec<f64> = qp.j.iter().zip(&gx).map(|(j, g)| j - 2.0 * g).collect();
        let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
        let w = solve_spd(&qp.g_sparse().scaled_gram(&x2), &rhs)
            .map_err(|e| Error::InfeasibleStart(format!("centering system failed: {e}")))?;
        let gtw = qp.gt_mul(&w);
        let dx: Vec<f64> = (0..n).map(|i| x[i] + x2[i] * gtw[i]).collect();
        if dx.iter().any(|v| !v.is_finite()) {
            break;
        }
        let decrement = dx.iter().zip(&x).map(|(d, x)| (d / x).abs()).fold(0.0, f64::max);
        let to_boundary = dx
            .iter()
            .zip(&x)
            .filter(|(d, _)| **d < 0.0)
            .map(|(d, x)| -x / d)
            .fold(f64::INFINITY, f64::min);
        let mut alpha: f64 = if to_boundary > 1.0 { 1.0 } else { 0.95 * to_boundary };
        if decrement > 0.25 {
            alpha = alpha.min(1.0 / (1.0 + decrement));
        }
        for (x, d) in x.iter_mut().zip(&dx) {
            *x += alpha * d;
        }
        if alpha == 1.0 && decrement < 1e-8 && primal_ok(qp, &x) {
            return Ok(x);
        }
        if alpha < 1e-14 {
            break;
        }
    }
    if x.iter().all(|&v| v > 0.0) && primal_ok(qp, &x) {
        return Ok(x);
    }
    Err(Error::InfeasibleStart("{Gx = J, x > 0} appears empty".into()))
}

fn dual_base(qp: &QpProblem, x: &[f64]) -> Vec<f64> {
    qp.c.iter().zip(qp.q_mul(x)).map(|(c, qx)| c + qx).collect()
}

fn slack(qp: &QpProblem, r0: &[f64], y: &[f64]) -> Vec<f64> {
    let gty = qp.gt_mul(y);
    r0.iter().zip(gty).map(|(r, g)| r - g).collect()
}

fn dual_by_escalation(qp: &QpProblem, gram: &Gram, x: &[f64]) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let r0 = dual_base(qp, x);
    let y_r = gram.lsq(&r0)?;
    let y_e = gram.lsq(&vec![1.0; qp.n()])?;
    let mut tau = 1.0;
    for _ in 0..ESCALATIONS {
        let y: Vec<f64> = y_r.iter().zip(&y_e).map(|(a, b)| a - tau * b).collect();
        let s = slack(qp, &r0, &y);
        if s.iter().all(|&v| v > 0.0) {
            return Ok(Some((y, s)));
        }
        tau *= 2.0;
    }
    Ok(None)
}

fn weighted_dual(qp: &QpProblem, gram: &Gram, x: &[f64]) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let r0 = dual_base(qp, x);
    let y_r = gram.lsq(&r0)?;
    let s_ls = slack(qp, &r0, &y_r);
    let inv_x: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
    let y_1 = gram.lsq(&inv_x)?;
    let d = qp.gt_mul(&y_1);
    if !d.iter().all(|&v| v > 0.0) {
        return Ok(None);
    }
    let t = 2.0 * s_ls.iter().zip(&d).map(|(s, d)| s.abs() / d).fold(0.0, f64::max);
    let t = if t > 0.0 { t } else { 1.0 };
    let y: Vec<f64> = y_r.iter().zip(&y_1).map(|(a, b)| a - t * b).collect();
    let s = slack(qp, &r0, &y);
    Ok(s.iter().all(|&v| v > 0.0).then_some((y, s)))
}
