use thiserror::Error;

/// Errors raised by mesh construction, assembly, linear algebra and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameter: {0}")]
    InvalidMesh(String),

    #[error("quadrature order {0} is below the minimum of 3")]
    QuadratureOrder(usize),

    #[error("edge ({0}, {1}) is not on the Dirichlet/Neumann junction")]
    NotJunctionEdge(usize, usize),

    #[error("exponent {value} outside admissible range {range}")]
    ExponentRange { value: f64, range: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (p'Ap = {curvature:e} at iteration {iteration})")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (final relative residual {final_residual:e})")]
    NoConvergence {
        iterations: usize,
        final_residual: f64,
        history: Vec<f64>,
    },

    #[error("singular factorization: zero pivot at row {row}")]
    SingularPivot { row: usize },

    #[error("saddle solve residual {residual:e} exceeds bound {bound:e}")]
    SaddleResidual { residual: f64, bound: f64 },

    #[error("inner momentum iteration diverged: contraction ratio >= 1 for 3 consecutive iterations")]
    InnerDivergence { trace: Box<crate::fixed_point::InnerTrace> },

    #[error("inner momentum iteration did not reach tolerance in {0} iterations")]
    InnerMaxIterations(usize),

    #[error("outer Picard loop did not converge in {iterations} iterations")]
    OuterMaxIterations {
        iterations: usize,
        trace: Box<crate::fixed_point::IterationTrace>,
    },

    #[error("root search: winding count {winding} but {found} roots polished in box {re_lo}..{re_hi} x {im_lo}..{im_hi}")]
    MissedRoot {
        winding: i64,
        found: usize,
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },

    #[error("spectrum inconsistency: {0}")]
    Spectrum(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
