//! Finite-difference discretization of the rescaled k-Hessian problem on the
//! cube `[-1, 1]^n` with homogeneous Dirichlet data.

mod grid;
mod io;
mod linsolve;
mod manufactured;
mod minors;
mod norms;
mod operator;
mod rhs;
mod stencil;

pub use grid::{GridShape, ScalarGrid};
pub use io::{read_csv, to_csv_string, write_grid, GridSidecar};
pub use linsolve::{solve_dirichlet, CsrMatrix, DirichletSolution, SolveMethod, DENSE_FALLBACK_LIMIT};
pub use manufactured::{CosineBump, ManufacturedRhs};
pub use minors::{sk_gradient, sk_of_matrix, SmallMat};
pub use norms::{c2alpha_surrogate, calpha_surrogate, holder_seminorm, HOLDER_RADIUS};
pub use operator::{
    assemble_linearized, eval_g, evaluation_error, ftilde_scale, HessianField, LinearSystem, MarginSummary,
};
pub use rhs::{Monomial, Rhs, RhsJet, RhsSpec, DEFAULT_BOX};
pub(crate) use stencil::point_derivatives;
pub use stencil::{hessian_of, Derivatives};
