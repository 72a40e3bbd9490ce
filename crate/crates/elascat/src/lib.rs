//! Time-harmonic elastic scattering by an inhomogeneous medium on a disk,
//! and reconstruction of the material perturbations from near-field data.
//!
//! The forward model is the 2D Navier equation with Lamé parameters
//! `λ0(1+q_λ)`, `μ0(1+q_μ)` and density `ρ0(1+q_ρ)`, truncated to the disk
//! `B_R` by an exact Dirichlet-to-Neumann (DtN) boundary condition expanded
//! in Fourier modes. The inverse solver is a multi-frequency Landweber
//! iteration driven by adjoint-state gradients, with a phaseless-data
//! variant and a density-only special case.
//!
//! Module layout follows the pipeline:
//!
//! - [`specfun`] — Hankel functions `H_n^(1)` and the ratios α_n, β_n.
//! - [`dtn`] — per-mode 2×2 DtN matrices `W_n` and the boundary operator.
//! - [`fem`] — disk meshes, material fields, and the assembled complex
//!   system for the variational problem.
//! - [`solver`] — forward, adjoint and derivative boundary-value solves.
//! - [`inversion`] — Landweber sweeps, step rules, stopping rules, traces.
//! - [`scenarios`] — phantoms, synthetic datasets, and experiment presets.
//! - [`validate`] — self-check suites used by the CLI `validate` command.

pub mod dtn;
pub mod error;
pub mod fem;
pub mod inversion;
pub mod linalg;
pub(crate) mod par;
pub mod scenarios;
pub mod solver;
pub mod specfun;
pub mod validate;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Caps the global worker pool. A no-op without the `parallel` feature;
/// effective only before the pool's first use.
pub fn set_worker_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
