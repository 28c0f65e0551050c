//! Ground-truth 1-D law tracking and divergence / functional-inequality measurements.

mod divergence;
mod evolve;
mod grid;
mod poincare;

pub use divergence::{
    divergence, fisher_information, grad_second_moment_bound, ks_distance, richardson, score_perturbation_check,
    DivergenceKind, MomentBound, Richardson, FI_WINDOW,
};
pub use evolve::{averaged_law, averaged_lmc_law, evolve_lmc_law, DriftMap, LmcStep, MASS_TOL};
pub use grid::{grid_from_potential, GridDensity1D, BOUNDARY_FRACTION, DENSITY_FLOOR, KERNEL_SIGMAS};
pub use poincare::{
    fi_tv_bound, holley_stroock_bound, instance_poincare_bound, kl_init_bound, muckenhoupt_b, Muckenhoupt,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain [{lo}, {hi}] too small: boundary density is {ratio:.3e} of the peak")]
    DomainTooSmall { lo: f64, hi: f64, ratio: f64 },
    #[error("densities live on different grids")]
    GridMismatch,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("empty input")]
    Empty,
    #[error("mass drift {drift:.3e} exceeds tolerance {tol:.1e}")]
    MassDrift { drift: f64, tol: f64 },
    #[error("unknown divergence kind {0:?}")]
    UnknownKind(String),
}
