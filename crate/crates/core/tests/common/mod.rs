#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use qipm_opf::grid::{build_dcopf_qp, load_case, scale_loads};
use qipm_opf::qp::QpProblem;
use qipm_opf::Mat;

pub const CASES: [&str; 4] = ["case3", "case5", "case118", "case300"];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(format!("{name}.m"))
}

pub fn case(name: &str) -> QpProblem {
    case_at(name, 1.0)
}

pub fn case_at(name: &str, scale: f64) -> QpProblem {
    let net = load_case(data_path(name)).expect("bundled case parses");
    build_dcopf_qp(&scale_loads(&net, scale).unwrap()).expect("bundled case compiles")
}

pub fn to_na(a: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn rel_err_vec(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Optimum of the equality-constrained QP left after fixing the bounds the
/// supplied point treats as binding, solved directly from its KKT system.
pub struct KktSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// Cost in the units of the QP encoding, with its constant added back.
    pub objective: f64,
    pub free: usize,
}

/// `x_i` is binding where `x_i ≤ s_i` at the given near-optimal pair. The
/// remaining system `[Q_FF −G_Fᵀ; G_F 0][x_F; y] = [−c_F; J]` is solved by LU,
/// or by SVD least squares when degenerate.
pub fn kkt_oracle(qp: &QpProblem, x_hint: &[f64], s_hint: &[f64]) -> KktSolution {
    let (n, m) = (qp.n(), qp.m());
    let free: Vec<usize> = (0..n).filter(|&i| x_hint[i] > s_hint[i]).collect();
    let f = free.len();
    let g = to_na(&qp.g);
    let mut k = DMatrix::<f64>::zeros(f + m, f + m);
    let mut rhs = DVector::<f64>::zeros(f + m);
    for (a, &i) in free.iter().enumerate() {
        k[(a, a)] = qp.q[i];
        for r in 0..m {
            k[(a, f + r)] = -g[(r, i)];
            k[(f + r, a)] = g[(r, i)];
        }
        rhs[a] = -qp.c[i];
    }
    for r in 0..m {
        rhs[f + r] = qp.j[r];
    }
    let sol = k
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|z| (&k * z - &rhs).amax() <= 1e-9 * (rhs.amax() + 1.0))
        .unwrap_or_else(|| k.clone().svd(true, true).solve(&rhs, 1e-10 * k.amax()).expect("svd solve"));
    let mut x = vec![0.0; n];
    for (a, &i) in free.iter().enumerate() {
        x[i] = sol[a];
    }
    let y: Vec<f64> = (0..m).map(|r| sol[f + r]).collect();
    let s: Vec<f64> = (0..n)
        .map(|i| qp.c[i] + qp.q[i] * x[i] - (0..m).map(|r| g[(r, i)] * y[r]).sum::<f64>())
        .collect();
    let constant = qp.map.as_ref().map_or(0.0, |mp| mp.objective_constant);
    let objective = (0..n).map(|i| qp.c[i] * x[i] + 0.5 * qp.q[i] * x[i] * x[i]).sum::<f64>() + constant;
    KktSolution { x, y, s, objective, free: f }
}

impl KktSolution {
    /// Primal feasibility, sign conditions and stationarity of the candidate.
    pub fn certificate_violation(&self, qp: &QpProblem) -> f64 {
        let g = to_na(&qp.g);
        let x = DVector::from_vec(self.x.clone());
        let primal = (&g * &x - DVector::from_vec(qp.j.clone())).amax();
        let neg_x = self.x.iter().fold(0.0f64, |a, v| a.max(-v));
        let neg_s = self.s.iter().zip(&self.x).filter(|(_, x)| **x == 0.0).fold(0.0f64, |a, (s, _)| a.max(-s));
        let comp = self.s.iter().zip(&self.x).fold(0.0f64, |a, (s, x)| a.max((s * x).abs()));
        primal.max(neg_x).max(neg_s).max(comp)
    }
}
