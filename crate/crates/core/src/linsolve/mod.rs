//! Sparse linear algebra: CSR storage, Jacobi-preconditioned CG, envelope Cholesky,
//! dense LU and block factorization of saddle-point systems.

mod cg;
mod cholesky;
mod dense;
mod saddle;
mod sparse;

pub use cg::{solve_spd, solve_spd_with};
pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use dense::DenseLu;
pub use saddle::{solve_saddle, SaddleFactorization, SaddleSystem, DIRECT_SCHUR_LIMIT, RESIDUAL_BOUND};
pub use sparse::{dot, norm2, SparseMatrix, TripletBuilder};
