//! Linear-system machinery: direct solvers, null-space bases, the HHL
//! emulator, noise channels and Newton-system assembly.

pub mod dense;
pub mod hhl;
pub mod newton;
pub mod noise;
pub mod sparse;

pub use dense::{condition_estimate, null_space_basis, solve_exact, solve_spd};
pub use hhl::{hhl_emulate, hhl_emulate_with_rng, C0Rule, HhlBackend, HhlConfig, HhlDiagnostics};
pub use newton::{
    assemble_newton_full, assemble_newton_reduced, recover_reduced_direction, solve_newton_normal, NewtonDirection,
};
pub use noise::{perturb_constant, perturb_readout, perturb_rescale, perturb_uniform, NoiseChannel, NoiseSpec};
