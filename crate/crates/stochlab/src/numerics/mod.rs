//! Shared numerical kernels: adaptive quadrature, least squares, an
//! adaptive Runge–Kutta integrator, a tridiagonal solver, and the dense
//! linear algebra (LU, matrix exponential, conjugate gradients) behind the
//! graph heat semigroup.

pub mod fit;
pub mod linalg;
pub mod ode;
pub mod quad;
pub mod tridiag;

pub use fit::linear_fit;
pub use linalg::{expm, lu_solve, pcg, LuFactors};
pub use ode::{integrate_rk45, OdeSolution, OdeStatus};
pub use quad::integrate;
pub use tridiag::solve_tridiagonal;
