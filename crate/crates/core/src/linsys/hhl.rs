//! Classical emulation of the HHL linear-system algorithm.
//!
//! The circuit is never simulated gate by gate. Instead the emulator produces
//! the same post-selected state from the spectral decomposition of the
//! operator: eigenvalues are rounded to the `t`-bit two's-complement grid that
//! phase estimation would resolve, the ancilla rotation multiplies each
//! eigencomponent by `C₀/λ̃_j`, and the success branch is renormalized.
//! Nonsymmetric inputs go through the Hermitian dilation `[[0, A], [Aᵀ, 0]]`.
//!
//! The [`HhlBackend::ErrorModel`] backend skips the spectral pipeline and
//! solves the noisy system directly. It is the only practical choice inside
//! interior-point loops, whose Newton systems become too ill-conditioned for
//! any fixed register width as the iterates approach the boundary.

use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::dense::{is_symmetric, solve_exact, symmetric_eigen};
use super::noise::NoiseSpec;
use crate::error::{dim_check, Error, Result};
use crate::qp::norm2;

pub const MAX_WORK_BITS: u32 = 24;
/// Post-selection probabilities below this are treated as never succeeding.
pub const MIN_POSTSELECT_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Rule {
    /// `C₀ = min_j |λ̃_j|`, the largest constant keeping every rotation valid.
    MinQuantized,
    Explicit(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HhlBackend {
    Spectral,
    ErrorModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhlConfig {
    pub work_bits: u32,
    pub c0_rule: C0Rule,
    /// 0 returns exact amplitudes.
    pub shots: u64,
    /// Factor mapping eigenvalues to phases; `None` picks
    /// `(2^(t−1) − 1) / (2^t ‖A‖₂)` so the extreme eigenvalue lands on the
    /// largest positive code.
    pub evolution_scale: Option<f64>,
    /// ε_𝒜: reject the configuration when `2^(1−t)‖A‖₂` exceeds it.
    pub encoding_tolerance: Option<f64>,
    pub backend: HhlBackend,
}

impl HhlConfig {
    pub fn spectral(work_bits: u32) -> Self {
        HhlConfig { work_bits, backend: HhlBackend::Spectral, ..Default::default() }
    }

    pub fn error_model(work_bits: u32) -> Self {
        HhlConfig { work_bits, backend: HhlBackend::ErrorModel, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_WORK_BITS).contains(&self.work_bits) {
            return Err(Error::InvalidConfig(format!(
                "work_bits must lie in 2..={MAX_WORK_BITS}, got {}",
                self.work_bits
            )));
        }
        if let C0Rule::Explicit(c0) = self.c0_rule {
            if !(c0.is_finite() && c0 > 0.0) {
                return Err(Error::InvalidConfig(format!("explicit C0 must be positive, got {c0}")));
            }
        }
        if let Some(s) = self.evolution_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidConfig(format!("evolution_scale must be positive, got {s}")));
            }
        }
        if let Some(eps) = self.encoding_tolerance {
            if !(eps > 0.0) {
                return Err(Error::InvalidConfig(format!("encoding tolerance must be positive, got {eps}")));
            }
        }
        Ok(())
    }

    fn check_encoding(&self, norm: f64) -> Result<()> {
        if let Some(eps) = self.encoding_tolerance {
            let bound = 2f64.powi(1 - self.work_bits as i32) * norm;
            if bound > eps {
                return Err(Error::InvalidConfig(format!(
                    "2^(1-t)·‖A‖ = {bound:.3e} exceeds encoding tolerance {eps:.3e}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for HhlConfig {
    fn default() -> Self {
        HhlConfig {
            work_bits: 16,
            c0_rule: C0Rule::MinQuantized,
            shots: 0,
            evolution_scale: None,
            encoding_tolerance: None,
            backend: HhlBackend::ErrorModel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhlDiagnostics {
    pub quantized_eigenvalues: Vec<f64>,
    pub rotation_amplitudes: Vec<f64>,
    /// Coefficients `r̃_j = u_jᵀ r / ‖r‖` of the encoded right-hand side.
    pub eigen_coefficients: Vec<f64>,
    pub postselect_probability: f64,
    pub normalization_factor: f64,
    pub dilated: bool,
}

impl HhlDiagnostics {
    fn direct(norm: f64) -> Self {
        HhlDiagnostics {
            quantized_eigenvalues: Vec::new(),
            rotation_amplitudes: Vec::new(),
            eigen_coefficients: Vec::new(),
            postselect_probability: 1.0,
            normalization_factor: norm,
            dilated: false,
        }
    }
}

/// Emulates HHL on `A x = r` with a fresh RNG seeded from `noise.seed`.
pub fn hhl_emulate(a: &Mat<f64>, r: &[f64], cfg: &HhlConfig, noise: &NoiseSpec) -> Result<(Vec<f64>, HhlDiagnostics)> {
    hhl_emulate_with_rng(a, r, cfg, noise, &mut noise.rng())
}

/// As [`hhl_emulate`], drawing stochastic noise and shots from `rng`.
pub fn hhl_emulate_with_rng(
    a: &Mat<f64>,
    r: &[f64],
    cfg: &HhlConfig,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, HhlDiagnostics)> {
    dim_check("A columns", a.nrows(), a.ncols())?;
    dim_check("r length", a.nrows(), r.len())?;
    cfg.validate()?;
    noise.validate()?;
    let r_norm = norm2(r);
    if !(r_norm > 0.0 && r_norm.is_finite()) {
        return Err(Error::Domain("right-hand side must be nonzero and finite".into()));
    }
    let noisy = noise.apply_to_matrix(a, rng)?;
    let (mut x, diag) = match cfg.backend {
        HhlBackend::Spectral => spectral(&noisy, r, r_norm, cfg, rng)?,
        HhlBackend::ErrorModel => {
            cfg.check_encoding(super::dense::spectral_norm_estimate(&noisy, 100))?;
            let mut x = solve_exact(&noisy, r)?;
            let norm = norm2(&x);
            if cfg.shots > 0 && norm > 0.0 {
                let mut psi: Vec<f64> = x.iter().map(|v| v / norm).collect();
                resample_shots(&mut psi, cfg.shots, rng)?;
                x = psi.into_iter().map(|v| v * norm).collect();
            }
            (x, HhlDiagnostics::direct(norm))
        }
    };
    noise.apply_to_output(&mut x, rng)?;
    Ok((x, diag))
}

fn spectral(
    a: &Mat<f64>,
    r: &[f64],
    r_norm: f64,
    cfg: &HhlConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, HhlDiagnostics)> {
    let n = a.nrows();
    let dilated = !is_symmetric(a, 1e-14);
    let (h, rhs) = if dilated {
        let h = Mat::<f64>::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, false) => a[(i, j - n)],
            (false, true) => a[(j, i - n)],
            _ => 0.0,
        });
        let mut rhs = r.to_vec();
        rhs.resize(2 * n, 0.0);
        (h, rhs)
    } else {
        (a.clone(), r.to_vec())
    };
    let dim = h.nrows();
    let (lambda, u) = symmetric_eigen(&h)?;
    let spectral_radius = lambda.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    if !(spectral_radius > 0.0) {
        return Err(Error::SingularMatrix { index: 0, pivot: 0.0 });
    }
    cfg.check_encoding(spectral_radius)?;

    let t = cfg.work_bits;
    let levels = 2f64.powi(t as i32);
    let half = levels / 2.0;
    let scale = cfg.evolution_scale.unwrap_or((half - 1.0) / (levels * spectral_radius));
    let mut quantized = Vec::with_capacity(dim);
    for &l in &lambda {
        let mut code = (l * scale * levels).round();
        // two's-complement wrap into [−2^(t−1), 2^(t−1))
        code = (code + half).rem_euclid(levels) - half;
        if code == 0.0 {
            return Err(Error::ZeroQuantizedEigenvalue { eigenvalue: l, work_bits: t });
        }
        quantized.push(code / (levels * scale));
    }
    let min_abs = quantized.iter().fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
    let c0 = match cfg.c0_rule {
        C0Rule::MinQuantized => min_abs,
        C0Rule::Explicit(c0) if c0 <= min_abs => c0,
        C0Rule::Explicit(c0) => {
            return Err(Error::InvalidConfig(format!(
                "C0 = {c0:e} exceeds the smallest quantized eigenvalue magnitude {min_abs:e}"
            )))
        }
    };
    let rotation: Vec<f64> = quantized.iter().map(|l| c0 / l).collect();

    // Encoded |r̃⟩ in the eigenbasis.
    let coeffs: Vec<f64> = (0..dim).map(|j| (0..dim).map(|i| u[(i, j)] * rhs[i]).sum::<f64>() / r_norm).collect();
    let probability: f64 = coeffs.iter().zip(&rotation).map(|(b, c)| (b * c).powi(2)).sum();
    if !(probability >= MIN_POSTSELECT_PROBABILITY) {
        return Err(Error::NonConvergent { probability });
    }
    let amp = probability.sqrt();
    let mut psi = vec![0.0; dim];
    for j in 0..dim {
        let w = coeffs[j] * rotation[j] / amp;
        if w != 0.0 {
            for (i, p) in psi.iter_mut().enumerate() {
                *p += w * u[(i, j)];
            }
        }
    }
    if cfg.shots > 0 {
        resample_shots(&mut psi, cfg.shots, rng)?;
    }
    let factor = r_norm * amp / c0;
    let offset = if dilated { n } else { 0 };
    let x = psi[offset..offset + n].iter().map(|p| p * factor).collect();
    let diag = HhlDiagnostics {
        quantized_eigenvalues: quantized,
        rotation_amplitudes: rotation,
        eigen_coefficients: coeffs,
        postselect_probability: probability,
        normalization_factor: factor,
        dilated,
    };
    Ok((x, diag))
}

/// Replaces a unit state by its `shots`-sample estimate: magnitudes become
/// `√(count_i / shots)`, signs are kept.
fn resample_shots(psi: &mut [f64], shots: u64, rng: &mut impl Rng) -> Result<()> {
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = psi.iter().map(|p| p * p).sum();
    for p in psi.iter_mut() {
        let mass = *p * *p;
        let count = if remaining_shots == 0 || remaining_mass <= 0.0 {
            0
        } else {
            let q = (mass / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_shots, q)
                .map_err(|e| Error::NumericalFailure(format!("shot sampling: {e}")))?
                .sample(rng)
        };
        remaining_shots -= count;
        remaining_mass -= mass;
        *p = p.signum() * (count as f64 / shots as f64).sqrt();
    }
    Ok(())
}
