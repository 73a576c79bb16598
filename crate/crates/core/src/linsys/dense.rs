//! Dense direct solvers and spectral utilities.

use faer::prelude::*;
use faer::{Mat, Side};

use crate::error::{dim_check, Error, Result};
use crate::qp::norm2;

/// Pivots below this fraction of the largest row scale are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;
/// Rank threshold relative to the largest `R` diagonal in the null-space QR.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub(crate) fn col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn to_vec(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn max_row_scale(a: &Mat<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).fold(0.0f64, |acc, j| acc.max(a[(i, j)].abs())))
        .fold(0.0, f64::max)
}

/// Power-of-two factors scaling each row of `a` to unit ∞-norm (exact in
/// floating point). Zero rows keep factor 1.
fn row_equilibration(a: &Mat<f64>) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            let scale = (0..a.ncols()).fold(0.0f64, |acc, j| acc.max(a[(i, j)].abs()));
            if scale > 0.0 && scale.is_finite() {
                2f64.powi(-(scale.log2().round() as i32))
            } else {
                1.0
            }
        })
        .collect()
}

/// Solves `A x = r` by LU with partial pivoting on the row-equilibrated
/// system. A pivot below `PIVOT_TOLERANCE` of its row scale is singular.
pub fn solve_exact(a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>> {
    dim_check("A columns", a.nrows(), a.ncols())?;
    dim_check("r length", a.nrows(), r.len())?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !max_row_scale(a).is_finite() {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let d = row_equilibration(a);
    let scaled = Mat::<f64>::from_fn(n, n, |i, j| d[i] * a[(i, j)]);
    let rhs: Vec<f64> = r.iter().zip(&d).map(|(r, d)| r * d).collect();
    let scale = max_row_scale(&scaled);
    let lu = scaled.partial_piv_lu();
    let u = lu.U();
    for k in 0..n {
        let pivot = u[(k, k)];
        if !(pivot.abs() > PIVOT_TOLERANCE * scale) {
            return Err(Error::SingularMatrix { index: k, pivot });
        }
    }
    let x = to_vec(&lu.solve(&col(&rhs)));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("LU solve produced non-finite values".into()));
    }
    Ok(x)
}

/// Solves a symmetric positive-definite system by Cholesky, falling back to
/// [`solve_exact`] if the factorization breaks down.
pub fn solve_spd(a: &Mat<f64>, r: &[f64]) -> Result<Vec<f64>> {
    dim_check("A columns", a.nrows(), a.ncols())?;
    dim_check("r length", a.nrows(), r.len())?;
    if let Ok(llt) = a.llt(Side::Lower) {
        let x = to_vec(&llt.solve(&col(r)));
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    solve_exact(a, r)
}

/// Orthonormal basis of `null(G)` from a column-pivoted QR of `Gᵀ`.
pub fn null_space_basis(g: &Mat<f64>) -> Result<Mat<f64>> {
    let (m, n) = (g.nrows(), g.ncols());
    if m > n {
        return Err(Error::RankDeficient { rank: n, rows: m });
    }
    if m == 0 {
        return Ok(Mat::identity(n, n));
    }
    let gt = g.transpose().to_owned();
    let qr = gt.col_piv_qr();
    let r = qr.R();
    let r11 = r[(0, 0)].abs();
    let rank = (0..m).take_while(|&k| r[(k, k)].abs() > RANK_TOLERANCE * r11).count();
    if r11 == 0.0 || rank < m {
        return Err(Error::RankDeficient { rank, rows: m });
    }
    let q = qr.compute_Q();
    Ok(q.subcols(m, n - m).to_owned())
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    dim_check("A columns", a.nrows(), a.ncols())?;
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn spectral_norm_estimate(a: &Mat<f64>, iters: usize) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    let mut sigma = 0.0;
    for _ in 0..iters {
        let nv = norm2(&to_vec(&v));
        if nv == 0.0 {
            return 0.0;
        }
        v = v * (1.0 / nv);
        let av = a * &v;
        let prev = sigma;
        sigma = norm2(&to_vec(&av));
        v = a.transpose() * av;
        if (sigma - prev).abs() <= 1e-10 * sigma {
            break;
        }
    }
    sigma
}

/// 2-norm condition estimate `σ_max / σ_min`: power iteration for `σ_max`,
/// inverse iteration through one LU factorization for `σ_min`.
pub fn condition_estimate(a: &Mat<f64>, iters: usize) -> Result<f64> {
    dim_check("A columns", a.nrows(), a.ncols())?;
    let n = a.nrows();
    if n == 0 {
        return Ok(1.0);
    }
    let sigma_max = spectral_norm_estimate(a, iters);
    let lu = a.partial_piv_lu();
    let scale = max_row_scale(a);
    let u = lu.U();
    for k in 0..n {
        if !(u[(k, k)].abs() > PIVOT_TOLERANCE * scale) {
            return Ok(f64::INFINITY);
        }
    }
    // ‖(AᵀA)⁻¹v‖ → 1/σ_min²
    let mut v = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + (i % 5) as f64 * 0.2);
    let mut inv_sigma = 0.0;
    for _ in 0..iters {
        let nv = norm2(&to_vec(&v));
        v = v * (1.0 / nv);
        // (AᵀA)⁻¹ v = A⁻¹ A⁻ᵀ v
        let w = lu.solve_transpose(&v);
        let prev = inv_sigma;
        inv_sigma = norm2(&to_vec(&w));
        v = lu.solve(&w);
        if !inv_sigma.is_finite() {
            return Ok(f64::INFINITY);
        }
        if (inv_sigma - prev).abs() <= 1e-10 * inv_sigma {
            break;
        }
    }
    Ok(sigma_max * inv_sigma)
}

/// `‖A‖_max`
pub fn max_abs(a: &Mat<f64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max(a[(i, j)].abs());
        }
    }
    out
}

pub fn is_symmetric(a: &Mat<f64>, rel_tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let tol = rel_tol * max_abs(a);
    (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol))
}
