//! Dense symmetric linear algebra: eigendecomposition, spectral matrix
//! functions, Loewner-matrix Fréchet derivatives, Schatten norms.

mod calculus;
mod dense;
mod eigen;
mod function;
mod norms;
mod symmat;

pub use calculus::{
    apply_scalar_function, default_loewner_tol, frechet_derivative, frechet_derivative_default,
    loewner_first_difference, matrix_function, taylor_remainder, LOEWNER_REL_TOL,
};
pub use dense::Mat;
pub use eigen::{eigh, eigvalsh, SpectralDecomp, SWEEPS_PER_DIM};
pub use function::{Domain, ScalarFunction, POSITIVE_MARGIN};
pub use norms::{
    effective_rank, operator_norm, schatten_norm, trace_inner_product, SchattenP, PSD_REL_TOL,
};
pub use symmat::SymMat;
