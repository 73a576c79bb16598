//! Error channels applied to the linear systems handed to the emulator.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    None,
    /// Per-entry relative error of fixed magnitude with seeded signs.
    Constant,
    /// Global `×(1 + magnitude)` rescale, kept for comparison with `Constant`.
    ConstantRescale,
    /// Fresh `Uniform(−magnitude, magnitude)` relative error on every call.
    Uniform,
    /// Zero-mean Gaussian relative error of scale `magnitude` on the output.
    Readout,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub channel: NoiseChannel,
    pub magnitude: f64,
    pub seed: u64,
    /// Redraw the constant channel's sign pattern on every solve instead of
    /// holding it fixed for the run.
    #[serde(default)]
    pub redraw_constant: bool,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec { channel: NoiseChannel::None, magnitude: 0.0, seed: 0, redraw_constant: false }
    }

    pub fn constant_20(seed: u64) -> Self {
        NoiseSpec { channel: NoiseChannel::Constant, magnitude: 0.2, seed, redraw_constant: false }
    }

    pub fn uniform_10(seed: u64) -> Self {
        NoiseSpec { channel: NoiseChannel::Uniform, magnitude: 0.1, seed, redraw_constant: false }
    }

    pub fn readout(rel_sigma: f64, seed: u64) -> Self {
        NoiseSpec { channel: NoiseChannel::Readout, magnitude: rel_sigma, seed, redraw_constant: false }
    }

    pub fn is_none(&self) -> bool {
        self.channel == NoiseChannel::None || self.magnitude == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        check_magnitude(self.magnitude)
    }

    /// RNG for the stochastic channels of one solve.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Applies the matrix-side part of the channel (identity for readout).
    pub fn apply_to_matrix(&self, a: &Mat<f64>, rng: &mut ChaCha8Rng) -> Result<Mat<f64>> {
        self.validate()?;
        match self.channel {
            NoiseChannel::None | NoiseChannel::Readout => Ok(a.clone()),
            NoiseChannel::Constant if self.redraw_constant => perturb_constant(a, self.magnitude, rng.gen()),
            NoiseChannel::Constant => perturb_constant(a, self.magnitude, self.seed),
            NoiseChannel::ConstantRescale => perturb_rescale(a, self.magnitude),
            NoiseChannel::Uniform => perturb_uniform(a, self.magnitude, rng),
        }
    }

    /// Applies the output-side part of the channel (readout only).
    pub fn apply_to_output(&self, x: &mut [f64], rng: &mut ChaCha8Rng) -> Result<()> {
        if self.channel == NoiseChannel::Readout {
            perturb_readout(x, self.magnitude, rng)?;
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::none()
    }
}

fn check_magnitude(magnitude: f64) -> Result<()> {
    if (0.0..1.0).contains(&magnitude) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("noise magnitude must lie in [0, 1), got {magnitude}")))
    }
}

/// `A'_ij = A_ij (1 + magnitude·σ_ij)` with `σ_ij = ±1` drawn from `seed`.
/// Signs depend only on `(seed, i, j)`, so repeated calls agree exactly.
pub fn perturb_constant(a: &Mat<f64>, magnitude: f64, seed: u64) -> Result<Mat<f64>> {
    check_magnitude(magnitude)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = a.clone();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            out[(i, j)] *= 1.0 + magnitude * sign;
        }
    }
    Ok(out)
}

/// `A' = (1 + magnitude) A`.
pub fn perturb_rescale(a: &Mat<f64>, magnitude: f64) -> Result<Mat<f64>> {
    check_magnitude(magnitude)?;
    Ok(a * faer::Scale(1.0 + magnitude))
}

/// `A'_ij = A_ij (1 + u_ij)`, `u_ij ~ U(−magnitude, magnitude)`, fresh draws
/// for every nonzero entry.
pub fn perturb_uniform(a: &Mat<f64>, magnitude: f64, rng: &mut impl Rng) -> Result<Mat<f64>> {
    check_magnitude(magnitude)?;
    let mut out = a.clone();
    if magnitude == 0.0 {
        return Ok(out);
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if out[(i, j)] != 0.0 {
                out[(i, j)] *= 1.0 + rng.gen_range(-magnitude..magnitude);
            }
        }
    }
    Ok(out)
}

/// `x_i ← x_i (1 + rel_sigma·z_i)`, `z_i ~ N(0, 1)`.
pub fn perturb_readout(x: &mut [f64], rel_sigma: f64, rng: &mut impl Rng) -> Result<()> {
    check_magnitude(rel_sigma)?;
    for v in x {
        let z: f64 = rng.sample(StandardNormal);
        *v *= 1.0 + rel_sigma * z;
    }
    Ok(())
}
