//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p qipm-opf --test acceptance -- --nocapture` to see them all.

mod common;

use std::time::{Duration, Instant};

use common::{case, case_at, data_path, kkt_oracle, rel_diff, rel_err_vec, to_na, CASES};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qipm_opf::bench::{default_load_scales, run_experiment, ExperimentPlan, PlanOutputs};
use qipm_opf::grid::load_case;
use qipm_opf::ipm::{
    find_interior_point, solve_classical_ipm, solve_nt_qipm, solve_nt_qipm_with, solve_qipm, Engine, SolveStatus,
    SolverOptions,
};
use qipm_opf::linsys::{
    assemble_newton_full, assemble_newton_reduced, hhl_emulate, null_space_basis, recover_reduced_direction,
    solve_exact, HhlConfig, NoiseSpec,
};
use qipm_opf::qp::{IteratePoint, QpProblem};
use qipm_opf::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn verdict(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn classical_ipm_matches_kkt_oracle() {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["case5", "case118"] {
        let qp = case(name);
        let t0 = Instant::now();
        let trace = solve_classical_ipm(&qp, &SolverOptions::default()).unwrap();
        let elapsed = t0.elapsed();
        let pt = &trace.final_point;
        let oracle = kkt_oracle(&qp, &pt.x, &pt.s);
        let scale = qp.c.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let cert = oracle.certificate_violation(&qp) / scale;
        let err = rel_diff(trace.final_objective().unwrap(), oracle.objective);
        let good = trace.status == SolveStatus::Converged
            && err <= 1e-6
            && cert <= 1e-6
            && elapsed <= Duration::from_secs(10);
        ok &= good;
        lines.push(format!(
            "{name} ipm {:.6} oracle {:.6} rel {err:.1e} cert {cert:.1e} {:.2?}",
            trace.final_objective().unwrap(),
            oracle.objective,
            elapsed
        ));
    }
    verdict("classical IPM vs KKT oracle (≤ 1e-6, ≤ 10 s)", ok, lines.join("; "));
}

#[test]
fn nt_qipm_preserves_feasibility_under_corrupted_solves() {
    let qp = case("case5");
    let start = find_interior_point(&qp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut corrupt = |a: &Mat<f64>, r: &[f64]| -> qipm_opf::Result<Vec<f64>> {
        let x = solve_exact(a, r)?;
        Ok(x.into_iter().map(|v| v * (1.0 + 0.5 * rng.gen_range(-1.0..=1.0))).collect())
    };
    // eps is unreachable, so the loop runs its full budget
    let opts = SolverOptions { k_max: 100, eps: 1e-300, ..SolverOptions::default() };
    let trace = solve_nt_qipm_with(&qp, start, &opts, &mut corrupt).unwrap();
    let max_rp = trace.records.iter().map(|r| r.r_p_inf).fold(0.0, f64::max);
    let max_rd = trace.records.iter().map(|r| r.r_d_inf).fold(0.0, f64::max);
    let positive = trace.final_point.is_interior();
    verdict(
        "NT-QIPM feasibility under 50% solver corruption (100 iterations, ≤ 1e-8)",
        trace.iterations() == 100 && max_rp <= 1e-8 && max_rd <= 1e-8 && positive,
        format!("{} iterations ({:?}), max r_p {max_rp:.1e}, max r_d {max_rd:.1e}", trace.iterations(), trace.status),
    );
}

/// A strictly feasible point: a null-space move of the primal start and a
/// range move of the dual, each kept within half the distance to the boundary.
fn random_feasible_point(qp: &QpProblem, base: &IteratePoint, v: &Mat<f64>, rng: &mut ChaCha8Rng) -> IteratePoint {
    let (n, m) = (qp.n(), qp.m());
    let z: Vec<f64> = (0..v.ncols()).map(|_| rng.sample(StandardNormal)).collect();
    let d: Vec<f64> = (0..n).map(|i| (0..v.ncols()).map(|c| v[(i, c)] * z[c]).sum()).collect();
    let qd: Vec<f64> = (0..n).map(|i| qp.q[i] * d[i]).collect();
    let mut t = f64::INFINITY;
    for i in 0..n {
        if d[i] < 0.0 {
            t = t.min(0.5 * base.x[i] / -d[i]);
        }
        if qd[i] < 0.0 {
            t = t.min(0.5 * base.s[i] / -qd[i]);
        }
    }
    let t = rng.gen_range(0.1..1.0) * t.min(1e6);
    let x: Vec<f64> = (0..n).map(|i| base.x[i] + t * d[i]).collect();
    let s_mid: Vec<f64> = (0..n).map(|i| base.s[i] + t * qd[i]).collect();
    let w: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let gtw = qp.gt_mul(&w);
    let mut t2 = f64::INFINITY;
    for i in 0..n {
        if gtw[i] > 0.0 {
            t2 = t2.min(0.5 * s_mid[i] / gtw[i]);
        }
    }
    let t2 = rng.gen_range(0.1..1.0) * t2.min(1e6);
    let y: Vec<f64> = base.y.iter().zip(&w).map(|(y, w)| y + t2 * w).collect();
    let s: Vec<f64> = (0..n).map(|i| s_mid[i] - t2 * gtw[i]).collect();
    IteratePoint::new(x, y, s)
}

#[test]
fn reduced_and_full_newton_systems_agree() {
    let qp = case("case5");
    let (n, m) = (qp.n(), qp.m());
    let base = find_interior_point(&qp).unwrap();
    let v = null_space_basis(&qp.g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut worst = 0.0f64;
    let mut worst_feas = 0.0f64;
    for _ in 0..25 {
        let pt = random_feasible_point(&qp, &base, &v, &mut rng);
        assert!(pt.is_interior());
        let res = qipm_opf::qp::residuals(&qp, &pt, 0.0).unwrap();
        worst_feas = worst_feas.max(res.primal_inf()).max(res.dual_inf());
        let mu = qipm_opf::qp::dot(&pt.x, &pt.s) / n as f64;
        let target = rng.gen_range(0.05..0.95) * mu;

        let (a, r) = assemble_newton_full(&qp, &pt, target).unwrap();
        let full = to_na(&a).lu().solve(&DVector::from_vec(r)).expect("full system nonsingular");
        let (ar, rr) = assemble_newton_reduced(&qp, &pt, &v, target).unwrap();
        let red = to_na(&ar).lu().solve(&DVector::from_vec(rr)).expect("reduced system nonsingular");
        let dir = recover_reduced_direction(&qp, &v, red.as_slice(), false).unwrap();

        let stacked: Vec<f64> = dir.dx.iter().chain(&dir.dy).chain(&dir.ds).copied().collect();
        assert_eq!(stacked.len(), 2 * n + m);
        worst = worst.max(rel_err_vec(&stacked, full.as_slice()));
    }
    verdict(
        "reduced vs full Newton directions at 25 feasible points (≤ 1e-8)",
        worst <= 1e-8 && worst_feas <= 1e-8,
        format!("max relative difference {worst:.2e}, max point infeasibility {worst_feas:.1e}"),
    );
}

fn random_spd(rng: &mut ChaCha8Rng, dim: usize, kappa_max: f64) -> (DMatrix<f64>, f64) {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    let top = rng.gen_range(0.5..5.0);
    let kappa = rng.gen_range(1.0..=kappa_max);
    let mut lambda: Vec<f64> = (0..dim).map(|_| top / rng.gen_range(1.0..=kappa)).collect();
    lambda[0] = top;
    lambda[1] = top / kappa;
    let a = &q * DMatrix::from_diagonal(&DVector::from_vec(lambda)) * q.transpose();
    ((&a + a.transpose()) * 0.5, kappa)
}

/// Post-selection probability rebuilt from an independent eigendecomposition
/// and the same quantization grid.
fn postselect_oracle(a: &DMatrix<f64>, r: &DVector<f64>, t: u32) -> f64 {
    let eig = SymmetricEigen::new(a.clone());
    let rho = eig.eigenvalues.amax();
    let top_code = 2f64.powi(t as i32 - 1) - 1.0;
    let quantized: Vec<f64> = eig.eigenvalues.iter().map(|l| (l * top_code / rho).round() * rho / top_code).collect();
    let c0 = quantized.iter().fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
    let rhat = r / r.norm();
    (0..a.nrows()).map(|j| (eig.eigenvectors.column(j).dot(&rhat) * c0 / quantized[j]).powi(2)).sum()
}

#[test]
fn hhl_emulator_fidelity() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bits = [12u32, 16, 20];
    let mut sums = [0.0f64; 3];
    let mut worst16 = 0.0f64;
    let mut worst_identity = 0.0f64;
    let trials = 100;
    for _ in 0..trials {
        let (a, kappa) = random_spd(&mut rng, 8, 50.0);
        assert!(kappa <= 50.0);
        let r = DVector::<f64>::from_fn(8, |_, _| rng.sample(StandardNormal));
        let direct = a.clone().lu().solve(&r).unwrap();
        let af = Mat::<f64>::from_fn(8, 8, |i, j| a[(i, j)]);
        for (k, &t) in bits.iter().enumerate() {
            let (x, d) = hhl_emulate(&af, r.as_slice(), &HhlConfig::spectral(t), &NoiseSpec::none()).unwrap();
            let err = rel_err_vec(&x, direct.as_slice());
            sums[k] += err;
            if t == 16 {
                worst16 = worst16.max(err);
            }
            worst_identity = worst_identity.max((d.postselect_probability - postselect_oracle(&a, &r, t)).abs());
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / trials as f64).collect();
    let elapsed = t0.elapsed();
    verdict(
        "HHL emulator fidelity on 100 SPD 8×8 systems (κ ≤ 50)",
        worst16 <= 1e-3
            && means[0] > means[1]
            && means[1] > means[2]
            && worst_identity <= 1e-12
            && elapsed <= Duration::from_secs(5),
        format!(
            "max err t=16 {worst16:.2e}; mean err t=12/16/20 {:.2e}/{:.2e}/{:.2e}; post-selection identity {worst_identity:.1e}; {elapsed:.2?}",
            means[0], means[1], means[2]
        ),
    );
}

#[test]
fn nt_qipm_tolerates_uniform_noise() {
    let opts = SolverOptions::default();
    let cfg = HhlConfig::default();

    let qp5 = case("case5");
    let ref5 = solve_classical_ipm(&qp5, &opts).unwrap().final_objective().unwrap();
    let errors5: Vec<f64> = (0..20)
        .map(|seed| {
            let t = solve_nt_qipm(&qp5, &cfg, &NoiseSpec::uniform_10(seed), &opts).unwrap();
            assert!(t.iterations() <= 200);
            t.final_objective().map_or(f64::INFINITY, |f| rel_diff(f, ref5))
        })
        .collect();
    let median5 = median(errors5);

    let qp3 = case("case3");
    let ref3 = solve_classical_ipm(&qp3, &opts).unwrap().final_objective().unwrap();
    let curves: Vec<Vec<f64>> = (0..20)
        .map(|seed| {
            let t = solve_nt_qipm(&qp3, &cfg, &NoiseSpec::uniform_10(seed), &opts).unwrap();
            (0..50)
                .map(|k| t.records.get(k).or(t.records.last()).map_or(f64::INFINITY, |r| rel_diff(r.objective, ref3)))
                .collect()
        })
        .collect();
    let at50 = curves.iter().map(|c| c[49]).fold(0.0, f64::max);
    let median_curve: Vec<f64> = (0..50).map(|k| median(curves.iter().map(|c| c[k]).collect())).collect();
    let early = median_curve[..10].iter().sum::<f64>() / 10.0;
    let late = median_curve[40..].iter().sum::<f64>() / 10.0;

    verdict(
        "NT-QIPM under uniform ±10% noise (5-bus median ≤ 1.5%, 3-bus decreasing and ≤ 10% at 50)",
        median5 <= 0.015 && late < early && at50 <= 0.10,
        format!(
            "5-bus median final error {:.2e}; 3-bus median error iters 1-10 {early:.2e} → 41-50 {late:.2e}, worst at 50 {at50:.2e}",
            median5
        ),
    );
}

#[test]
fn plain_qipm_is_fragile_under_noise() {
    let opts = SolverOptions { k_max: 50, ..SolverOptions::default() };
    let cfg = HhlConfig::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for name in ["case3", "case5"] {
        let qp = case(name);
        let mut not_converged = 0;
        let mut nt_failures = 0;
        for seed in 0..20 {
            let q = solve_qipm(&qp, &cfg, &NoiseSpec::uniform_10(seed), &opts).unwrap();
            if q.status != SolveStatus::Converged {
                not_converged += 1;
            }
            let nt = solve_nt_qipm(&qp, &cfg, &NoiseSpec::uniform_10(seed), &opts).unwrap();
            if nt.status == SolveStatus::NumericalFailure {
                nt_failures += 1;
            }
        }
        ok &= not_converged >= 16 && nt_failures == 0;
        lines.push(format!("{name}: plain QIPM unconverged {not_converged}/20, NT-QIPM failures {nt_failures}/20"));
    }
    verdict("plain QIPM fails within 50 iterations in ≥ 80% of seeds; NT-QIPM never fails", ok, lines.join("; "));
}

#[test]
fn cnt_qipm_recovers_exact_solutions_across_loads() {
    let t0 = Instant::now();
    let mut plan = ExperimentPlan::new(data_path("case118"), Engine::CntQipm);
    plan.load_scales = default_load_scales();
    plan.seeds = vec![0];
    plan.noise = NoiseSpec::uniform_10(0);
    let exp = run_experiment(&plan).unwrap();
    let elapsed = t0.elapsed();
    let cells = &exp.summary.cells;
    let max_err = cells.iter().map(|c| c.relative_error.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let max_tail = cells.iter().map(|c| c.classical_iterations).max().unwrap();
    let all_converged = cells.iter().all(|c| c.status == SolveStatus::Converged);
    let tails: Vec<String> =
        cells.iter().map(|c| format!("{:.2}:{}+{}", c.load_scale, c.quantum_iterations, c.classical_iterations)).collect();
    verdict(
        "CNT-QIPM on 118-bus, 9 load scales (error ≤ 1e-6, classical tail ≤ 8, ≤ 5 min)",
        cells.len() == 9 && all_converged && max_err <= 1e-6 && max_tail <= 8 && elapsed <= Duration::from_secs(300),
        format!("max error {max_err:.1e}, max tail {max_tail}, quantum+classical {} , {elapsed:.1?}", tails.join(" ")),
    );
}

#[test]
fn modeled_speedup_over_classical() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for name in ["case118", "case300"] {
        let path = dir.path().join(format!("{name}.json"));
        let mut plan = ExperimentPlan::new(data_path(name), Engine::CntQipm);
        plan.noise = NoiseSpec::uniform_10(0);
        plan.outputs = PlanOutputs { trace_csv: None, summary_json: Some(path.clone()) };
        run_experiment(&plan).unwrap();

        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let rt = &json["cells"][0]["runtime"];
        let f = |key: &str| rt[key].as_f64().unwrap_or(f64::NAN);
        let model = |key: &str| rt["model"][key].as_f64().unwrap_or(f64::NAN);
        let (n, dim) = (f("n"), f("quantum_dim"));
        let t_q = f("quantum_iterations")
            * model("c_quantum")
            * dim
            * model("s0")
            * model("kappa_estimate")
            * (1.0 / model("eps0")).ln();
        let t_c = f("classical_iterations") * model("c_classical") * n.powi(3);
        let t_ipm = f("ipm_iterations") * model("c_classical") * n.powi(3);
        let recomputed = (t_ipm / (t_q + t_c) - 1.0) * 100.0;
        let reported = f("speedup_percent");
        let arithmetic = (recomputed - reported).abs() <= 1e-12 * reported.abs().max(1.0);
        ok &= arithmetic && reported > 100.0;
        lines.push(format!(
            "{name}: speedup {reported:.4}% (recomputed {recomputed:.4}%), κ {:.2e}, s0 {}, {}q+{}c vs {} ipm",
            model("kappa_estimate"),
            model("s0"),
            f("quantum_iterations"),
            f("classical_iterations"),
            f("ipm_iterations")
        ));
    }
    verdict("modeled CNT-QIPM speedup > 100% on 118/300-bus with reproducible arithmetic", ok, lines.join("; "));
}

#[test]
fn structural_dimensions_and_rank() {
    let mut ok = true;
    let mut lines = Vec::new();
    for name in CASES {
        let net = load_case(data_path(name)).unwrap();
        let (g, b, l) = (net.num_generators(), net.num_buses(), net.num_branches());
        let qp = case(name);
        let (n, m) = (qp.n(), qp.m());
        let dims = n == 3 * (g + b + l) && m == b + l + 1 + 2 * (g + b + l);
        let gm = to_na(&qp.g);
        let full_rank = (&gm * gm.transpose()).cholesky().is_some();
        let v = null_space_basis(&qp.g).unwrap();
        let gv = (&gm * to_na(&v)).amax();
        let null_ok = n - m == g - 1 && v.ncols() == g - 1 && gv <= 1e-10;
        ok &= dims && full_rank && null_ok;
        lines.push(format!("{name} n={n} m={m} rank={} null={} ‖GV‖={gv:.0e}", if full_rank { m } else { 0 }, v.ncols()));
    }
    verdict("n = 3(g+b+L), m = b+L+1+2(g+b+L), rank(G) = m, dim null(G) = g−1", ok, lines.join("; "));
}

#[test]
fn experiments_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = ExperimentPlan::new(data_path("case5"), Engine::CntQipm);
    plan.load_scales = vec![0.9, 1.0, 1.1];
    plan.seeds = vec![1, 2];
    plan.noise = NoiseSpec::uniform_10(0);
    plan.outputs = PlanOutputs {
        trace_csv: Some(dir.path().join("trace.csv")),
        summary_json: Some(dir.path().join("summary.json")),
    };
    let snapshot = || {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    run_experiment(&plan).unwrap();
    let first = snapshot();
    run_experiment(&plan).unwrap();
    let second = snapshot();
    verdict(
        "identical plans give byte-identical CSV and JSON",
        first.len() == 7 && first == second,
        format!("{} files compared", first.len()),
    );
    let _ = case_at;
}
