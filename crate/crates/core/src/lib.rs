//! Numerical laboratory for Bergman kernels on model bounded domains.
//!
//! Each bounded domain Ω ⊂ ℂⁿ (n ≤ 2) is turned into a statistical manifold
//! through the Bergman density `P(z, ξ) = |K(z, ξ)|² / K(z, z)`. On top of
//! that the crate measures, for concrete proper holomorphic maps, how much
//! Fisher information the measure push-forward loses and whether the
//! pointwise criteria for sufficiency (score equality, ratio invariance,
//! diastasis factorization) hold.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | quadrature, compensated sums, Wirtinger stencils, pivoted Cholesky |
//! | [`domains`] | disk, annulus, polydisk, ball, ellipse |
//! | [`kernels`] | closed-form, Laurent-series and orthonormalized Bergman kernels |
//! | [`geometry`] | Bergman metric, diastasis, transformation formula, isometry defect |
//! | [`maps`] | proper holomorphic maps, local inverses, push-forward density |
//! | [`infogeo`] | Fisher matrices, deficiency, sufficiency tests, verdict |
//! | [`cli`] | config-driven experiment runner behind the `blab` binary |

pub mod cli;
pub mod domains;
pub mod error;
pub mod geometry;
pub mod infogeo;
pub mod kernels;
pub mod maps;
pub mod numerics;
pub mod point;

pub use error::{Error, Result};
pub use point::Point;
