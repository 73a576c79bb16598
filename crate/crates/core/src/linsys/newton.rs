//! Newton systems of the primal-dual interior-point iteration.
//!
//! Full system, unknowns `(Δx, Δy, Δs)`:
//!
//! ```text
//! [  G   0   0 ] [Δx]   [r_p]
//! [ −Q   Gᵀ  I ] [Δy] = [r_d]
//! [  S   0   X ] [Δs]   [r_c]
//! ```
//!
//! Reduced system at a primal/dual feasible point, unknowns `(λ, Δy)` with
//! `Δx = Vλ`, `Δs = QΔx − GᵀΔy`:
//!
//! ```text
//! [ SV + XQV | −XGᵀ ] [λ; Δy] = r_c
//! ```

use faer::Mat;

use super::dense::solve_spd;
use crate::error::{dim_check, Error, Result};
use crate::qp::{residuals, IteratePoint, QpProblem, Residuals};

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonDirection {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub ds: Vec<f64>,
}

impl NewtonDirection {
    /// Splits a stacked `(Δx, Δy, Δs)` vector.
    pub fn from_stacked(v: &[f64], n: usize, m: usize) -> Result<Self> {
        dim_check("stacked direction length", 2 * n + m, v.len())?;
        Ok(NewtonDirection { dx: v[..n].to_vec(), dy: v[n..n + m].to_vec(), ds: v[n + m..].to_vec() })
    }
}

/// Dense `(2n+m)×(2n+m)` Newton matrix and stacked right-hand side.
pub fn assemble_newton_full(qp: &QpProblem, pt: &IteratePoint, sigma_mu: f64) -> Result<(Mat<f64>, Vec<f64>)> {
    let res = residuals(qp, pt, sigma_mu)?;
    let (n, m) = (qp.n(), qp.m());
    let mut a = Mat::<f64>::zeros(2 * n + m, 2 * n + m);
    for (i, j, v) in qp.g_sparse().triplets() {
        a[(i, j)] = v;
        a[(m + j, n + i)] = v;
    }
    for k in 0..n {
        a[(m + k, k)] = -qp.q[k];
        a[(m + k, n + m + k)] = 1.0;
        a[(m + n + k, k)] = pt.s[k];
        a[(m + n + k, n + m + k)] = pt.x[k];
    }
    Ok((a, res.stacked()))
}

/// Dense `n×n` reduced matrix `[SV + XQV | −XGᵀ]` and `r_c`.
pub fn assemble_newton_reduced(
    qp: &QpProblem,
    pt: &IteratePoint,
    v: &Mat<f64>,
    sigma_mu: f64,
) -> Result<(Mat<f64>, Vec<f64>)> {
    pt.check_dims(qp)?;
    let (n, m) = (qp.n(), qp.m());
    dim_check("V rows", n, v.nrows())?;
    dim_check("V columns", n - m, v.ncols())?;
    let k = n - m;
    let mut a = Mat::<f64>::zeros(n, n);
    for c in 0..k {
        for i in 0..n {
            a[(i, c)] = (pt.s[i] + pt.x[i] * qp.q[i]) * v[(i, c)];
        }
    }
    for (row, col, val) in qp.g_sparse().triplets() {
        a[(col, k + row)] = -pt.x[col] * val;
    }
    let r_c = pt.x.iter().zip(&pt.s).map(|(x, s)| sigma_mu - x * s).collect();
    Ok((a, r_c))
}

/// Recovers `(Δx, Δy, Δs)` from a reduced-system solution `(λ, Δy)`.
///
/// With `literal_ds` the dual slack step drops the `QΔx` term, which breaks
/// dual feasibility whenever `Q ≠ 0`.
pub fn recover_reduced_direction(
    qp: &QpProblem,
    v: &Mat<f64>,
    sol: &[f64],
    literal_ds: bool,
) -> Result<NewtonDirection> {
    let (n, m) = (qp.n(), qp.m());
    dim_check("reduced solution length", n, sol.len())?;
    let k = n - m;
    let lambda = &sol[..k];
    let dy = sol[k..].to_vec();
    let dx: Vec<f64> = (0..n).map(|i| (0..k).map(|c| v[(i, c)] * lambda[c]).sum()).collect();
    let gty = qp.gt_mul(&dy);
    let ds = (0..n)
        .map(|i| if literal_ds { -gty[i] } else { qp.q[i] * dx[i] - gty[i] })
        .collect();
    Ok(NewtonDirection { dx, dy, ds })
}

/// Exact Newton direction by block elimination onto the normal equations
/// `G D⁻¹ Gᵀ Δy = r_p + G D⁻¹ (r_d − X⁻¹r_c)`, `D = Q + X⁻¹S`.
pub fn solve_newton_normal(qp: &QpProblem, pt: &IteratePoint, res: &Residuals) -> Result<NewtonDirection> {
    pt.check_dims(qp)?;
    let n = qp.n();
    if !pt.is_interior() {
        return Err(Error::Domain("normal equations need an interior point".into()));
    }
    let d_inv: Vec<f64> = (0..n).map(|i| 1.0 / (qp.q[i] + pt.s[i] / pt.x[i])).collect();
    let w: Vec<f64> = (0..n).map(|i| d_inv[i] * (res.r_d[i] - res.r_c[i] / pt.x[i])).collect();
    let gw = qp.g_mul(&w);
    let rhs: Vec<f64> = res.r_p.iter().zip(&gw).map(|(a, b)| a + b).collect();
    let normal = qp.g_sparse().scaled_gram(&d_inv);
    let dy = solve_spd(&normal, &rhs)?;
    let gty = qp.gt_mul(&dy);
    let dx: Vec<f64> = (0..n).map(|i| d_inv[i] * (gty[i] - res.r_d[i] + res.r_c[i] / pt.x[i])).collect();
    let ds = (0..n).map(|i| (res.r_c[i] - pt.s[i] * dx[i]) / pt.x[i]).collect();
    Ok(NewtonDirection { dx, dy, ds })
}
