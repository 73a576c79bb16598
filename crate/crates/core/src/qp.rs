//! Standard-form QP semantics.
//!
//! Primal: `min cᵀx + ½xᵀQx  s.t. Gx = J, x ≥ 0`.
//! Dual:   `max Jᵀy − ½xᵀQx  s.t. Gᵀy + s − Qx = c, s ≥ 0`.
//!
//! `Q` is diagonal and stored as a vector.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};
use crate::grid::VariableMap;
use crate::linsys::sparse::SparseCols;

#[derive(Clone, Debug)]
pub struct QpProblem {
    pub c: Vec<f64>,
    pub q: Vec<f64>,
    pub g: Mat<f64>,
    pub j: Vec<f64>,
    pub map: Option<VariableMap>,
    g_sparse: SparseCols,
}

impl QpProblem {
    pub fn new(c: Vec<f64>, q: Vec<f64>, g: Mat<f64>, j: Vec<f64>) -> Result<Self> {
        let n = c.len();
        dim_check("Q diagonal length", n, q.len())?;
        dim_check("G columns", n, g.ncols())?;
        dim_check("J length", g.nrows(), j.len())?;
        if let Some(k) = q.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::Domain(format!("Q[{k}] = {} is negative; Q must be PSD", q[k])));
        }
        let g_sparse = SparseCols::from_dense(&g);
        Ok(QpProblem { c, q, g, j, map: None, g_sparse })
    }

    pub fn with_map(mut self, map: VariableMap) -> Self {
        self.map = Some(map);
        self
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Number of equality rows.
    pub fn m(&self) -> usize {
        self.j.len()
    }

    pub fn g_sparse(&self) -> &SparseCols {
        &self.g_sparse
    }

    /// `Gx`
    pub fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        self.g_sparse.mul_vec(x)
    }

    /// `Gᵀy`
    pub fn gt_mul(&self, y: &[f64]) -> Vec<f64> {
        self.g_sparse.tmul_vec(y)
    }

    /// `Qx`
    pub fn q_mul(&self, x: &[f64]) -> Vec<f64> {
        self.q.iter().zip(x).map(|(q, x)| q * x).collect()
    }

    /// Returns a copy with a different right-hand side.
    pub fn with_rhs(&self, j: Vec<f64>) -> Result<Self> {
        dim_check("J length", self.m(), j.len())?;
        let mut out = self.clone();
        out.j = j;
        Ok(out)
    }
}

/// Primal/dual/slack triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IteratePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

impl IteratePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, s: Vec<f64>) -> Self {
        IteratePoint { x, y, s }
    }

    pub fn check_dims(&self, qp: &QpProblem) -> Result<()> {
        dim_check("x length", qp.n(), self.x.len())?;
        dim_check("y length", qp.m(), self.y.len())?;
        dim_check("s length", qp.n(), self.s.len())
    }

    /// `x > 0` and `s > 0` componentwise.
    pub fn is_interior(&self) -> bool {
        self.x.iter().chain(&self.s).all(|&v| v > 0.0)
    }

    pub fn min_x(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_s(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Newton right-hand side `(r_p, r_d, r_c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub r_p: Vec<f64>,
    pub r_d: Vec<f64>,
    pub r_c: Vec<f64>,
}

impl Residuals {
    pub fn primal_inf(&self) -> f64 {
        inf_norm(&self.r_p)
    }

    pub fn dual_inf(&self) -> f64 {
        inf_norm(&self.r_d)
    }

    pub fn comp_inf(&self) -> f64 {
        inf_norm(&self.r_c)
    }

    /// `(r_p, r_d, r_c)` stacked.
    pub fn stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.r_p.len() + self.r_d.len() + self.r_c.len());
        out.extend_from_slice(&self.r_p);
        out.extend_from_slice(&self.r_d);
        out.extend_from_slice(&self.r_c);
        out
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `r_p = J − Gx`, `r_d = c − Gᵀy − s + Qx`, `r_c = σμe − XSe`.
pub fn residuals(qp: &QpProblem, pt: &IteratePoint, sigma_mu: f64) -> Result<Residuals> {
    pt.check_dims(qp)?;
    Ok(Residuals {
        r_p: primal_residual(qp, &pt.x),
        r_d: dual_residual(qp, pt),
        r_c: pt.x.iter().zip(&pt.s).map(|(x, s)| sigma_mu - x * s).collect(),
    })
}

pub(crate) fn primal_residual(qp: &QpProblem, x: &[f64]) -> Vec<f64> {
    let gx = qp.g_mul(x);
    qp.j.iter().zip(gx).map(|(j, gx)| j - gx).collect()
}

pub(crate) fn dual_residual(qp: &QpProblem, pt: &IteratePoint) -> Vec<f64> {
    let gty = qp.gt_mul(&pt.y);
    (0..qp.n()).map(|i| qp.c[i] - gty[i] - pt.s[i] + qp.q[i] * pt.x[i]).collect()
}

/// `μ = xᵀs / n`.
pub fn duality_measure(pt: &IteratePoint) -> f64 {
    dot(&pt.x, &pt.s) / pt.x.len() as f64
}

/// `xᵀs ≤ n·eps` with primal and dual residuals at most `eps` in the ∞-norm.
pub fn is_eps_optimal(qp: &QpProblem, pt: &IteratePoint, eps: f64) -> bool {
    if pt.check_dims(qp).is_err() {
        return false;
    }
    let gap = dot(&pt.x, &pt.s);
    gap <= qp.n() as f64 * eps
        && inf_norm(&primal_residual(qp, &pt.x)) <= eps
        && inf_norm(&dual_residual(qp, pt)) <= eps
}

/// `‖XSe − μe‖₂ / μ`; the point lies in the neighbourhood `N(θ)` iff this is ≤ θ.
pub fn neighborhood_distance(pt: &IteratePoint, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("neighbourhood needs μ > 0, got {mu}")));
    }
    let sq: f64 = pt.x.iter().zip(&pt.s).map(|(x, s)| (x * s - mu).powi(2)).sum();
    Ok(sq.sqrt() / mu)
}

/// `cᵀx + ½xᵀQx`.
pub fn objective(qp: &QpProblem, x: &[f64]) -> Result<f64> {
    dim_check("x length", qp.n(), x.len())?;
    Ok(objective_unchecked(qp, x))
}

pub(crate) fn objective_unchecked(qp: &QpProblem, x: &[f64]) -> f64 {
    x.iter().zip(&qp.c).zip(&qp.q).map(|((x, c), q)| c * x + 0.5 * q * x * x).sum()
}

/// `Jᵀy − ½xᵀQx`.
pub fn dual_objective(qp: &QpProblem, pt: &IteratePoint) -> Result<f64> {
    pt.check_dims(qp)?;
    let quad: f64 = pt.x.iter().zip(&qp.q).map(|(x, q)| q * x * x).sum();
    Ok(dot(&qp.j, &pt.y) - 0.5 * quad)
}
