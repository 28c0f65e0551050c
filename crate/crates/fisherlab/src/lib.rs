//! Numerical laboratory for the query complexity of sampling from smooth,
//! non-log-concave densities when accuracy is measured in relative Fisher information.
//!
//! The crate is organised bottom-up:
//!
//! - [`bump`]: the bump profile φ.
//! - [`potential`]: the [`SmoothPotential`](potential::SmoothPotential) trait and wrappers.
//! - [`instance`]: the hard-instance family, its normalizers and JSON files.
//! - [`oracle`]: query-counting local oracles and free initialization oracles.
//! - [`samplers`]: LMC, averaged LMC, gradient descent, rejection sampling.
//! - [`diagnostics`]: grid densities, exact law evolution, divergences, Poincaré estimates.
//! - [`experiments`]: identification game, equivalence demo, scaling studies, bound evaluators.
//! - [`cli`]: the `fisherlab` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod cli;
pub mod diagnostics;
pub mod experiments;
pub mod instance;
pub mod potential;
pub mod oracle;
pub mod quad;
pub mod samplers;
