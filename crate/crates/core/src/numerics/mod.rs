//! Deterministic numerical machinery shared by every other module.

mod cholesky;
mod derivative;
mod quadrature;
mod summation;

pub use cholesky::{pivoted_cholesky, lower_inverse, PivotedCholesky};
pub use derivative::{
    complex_derivative, mixed_wirtinger, real_partial, DerivativeStencil, Scheme, Wirtinger,
};
pub use quadrature::{
    build_quadrature, gauss_legendre, integrate, integrate_real_components, try_integrate,
    LineRule, QuadratureRule, MIN_RESOLUTION,
};
pub use summation::{ComplexSum, NeumaierSum};
