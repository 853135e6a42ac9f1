//! Numerical laboratory for weighted Bergman spaces on the unit ball of C^n.
//!
//! The crate computes the Kobayashi geometry of the ball (distances, metric
//! balls, lattices), exact weighted Bergman kernels, boundary-graded
//! quadrature, skew-Carleson diagnostics of finite positive measures, and
//! Toeplitz operators `T_mu^beta` together with two-sided operator-norm
//! probes. Everything is desk-scale: the default domain is the unit disk,
//! where every base quantity has a closed form or a cheap certified oracle.
//!
//! Module map:
//!
//! * [`geometry`] — domain, points, Kobayashi balls, lattices;
//! * [`quadrature`] — graded deterministic rules and a Monte Carlo oracle;
//! * [`kernels`] — weighted Bergman kernels, projection, norms, pairings;
//! * [`series`] — expansions of kernel-type functions in powers of `<z,a>`;
//! * [`measures`] — measure representations and Carleson diagnostics;
//! * [`toeplitz`] — the operator, parameter map and norm/compactness probes;
//! * [`config`], [`report`], [`verify`] — experiment orchestration and the
//!   built-in acceptance battery behind the `skewlab` CLI.

pub mod config;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod kernels;
pub mod measures;
pub mod numeric;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod toeplitz;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{KobayashiBall, Lattice, ModelDomain, Point, WeightConvention};
pub use kernels::{KernelParams, SpaceParams};
pub use measures::{CarlesonParams, Measure, Verdict};
pub use quadrature::QuadratureRule;
pub use toeplitz::OperatorParams;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
