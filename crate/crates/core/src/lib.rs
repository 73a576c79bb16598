//! DC optimal power flow through interior-point methods whose Newton systems are
//! solved exactly, by an emulated HHL linear-system solver, or by a noisy
//! error model.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`] parses MATPOWER case files and compiles a network into the
//!   standard-form QP `min cᵀx + ½xᵀQx  s.t. Gx = J, x ≥ 0`.
//! - [`qp`] holds iterate semantics: residuals, duality measure, ε-optimality
//!   and central-path distance.
//! - [`linsys`] has the dense direct solver, null-space bases, Newton-system
//!   assembly, the spectral HHL emulator and the noise channels.
//! - [`ipm`] implements the four engines: classical IPM, plain QIPM,
//!   noise-tolerant NT-QIPM and the hybrid CNT-QIPM.
//! - [`bench`] drives load sweeps, traces, summaries and the runtime model.

pub mod bench;
pub mod error;
pub mod grid;
pub mod ipm;
pub mod linsys;
pub mod qp;

pub use error::{Error, Result};
pub use faer::Mat;
