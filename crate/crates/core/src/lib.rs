//! Numerical engine for local solutions of the k-Hessian equation
//! `S_k[u] = f(y, u, Du)`.
//!
//! The crate is layered bottom-up:
//!
//! * [`symfun`] evaluates elementary symmetric polynomials and their
//!   deleted-variable variants.
//! * [`cone`] decides membership in the Garding cone `Gamma_k(n)` and splits
//!   its boundary into the degenerate piece `P1` and the elliptic piece `P2`.
//! * [`seeds`] builds quadratic seeds `psi(y) = 1/2 sum tau_i y_i^2` with
//!   `sigma_k(tau) = c` whose linearization is uniformly elliptic.
//! * [`pde`] discretizes the rescaled problem on `[-1, 1]^n` and solves the
//!   linearized Dirichlet problem.
//! * [`iterate`] runs the Newton scheme, tunes the scaling parameter and
//!   certifies the convexity class of the result.
//! * [`verify`] holds seeded property sweeps over the cone algebra.

pub mod cone;
pub mod error;
pub mod iterate;
pub mod pde;
pub mod seeds;
pub mod symfun;
pub mod verify;

pub use cone::{ConeKind, ConeVerdict};
pub use error::{Error, Result};
pub use iterate::{ConvexityCertificate, IterationReport, NewtonOptions, RunStatus, Solution};
pub use pde::{GridShape, Rhs, RhsJet, RhsSpec, ScalarGrid};
pub use seeds::{SeedCertificate, SeedClass, SeedQuadratic};
pub use symfun::{Spectrum, SymValueTable};

/// Default tolerance for cone and convexity decisions.
pub const DEFAULT_TOL: f64 = 1e-9;
