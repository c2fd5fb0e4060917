//! Central-difference Wirtinger derivatives.
//!
//! `∂/∂z = (∂ₓ − i∂ᵧ)/2` and `∂/∂z̄ = (∂ₓ + i∂ᵧ)/2`; the actual step is
//! `step · (1 + |z|)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Central,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wirtinger {
    Holomorphic,
    Antiholomorphic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeStencil {
    step: f64,
    order: u8,
    scheme: Scheme,
}

impl DerivativeStencil {
    pub const MIN_STEP: f64 = 1e-8;
    pub const MAX_STEP: f64 = 1e-2;
    pub const DEFAULT_STEP: f64 = 1e-5;

    pub fn new(step: f64, order: u8) -> Result<Self> {
        if !(Self::MIN_STEP..=Self::MAX_STEP).contains(&step) {
            return Err(Error::InvalidStencil(format!(
                "step {step} outside [{}, {}]",
                Self::MIN_STEP,
                Self::MAX_STEP
            )));
        }
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidStencil(format!("order {order} must be 1 or 2")));
        }
        Ok(Self {
            step,
            order,
            scheme: Scheme::Central,
        })
    }

    pub fn first_order() -> Self {
        Self::new(Self::DEFAULT_STEP, 1).expect("default stencil is valid")
    }

    /// Second-order stencil; `1e-4` balances truncation against the `eps/h²`
    /// cancellation of second differences.
    pub fn second_order() -> Self {
        Self::new(1e-4, 2).expect("default stencil is valid")
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Absolute step used around `z`.
    pub fn h(&self, z: &Point) -> f64 {
        self.step * (1.0 + z.norm())
    }

    fn require_order(&self, order: u8) -> Result<()> {
        if self.order == order {
            Ok(())
        } else {
            Err(Error::InvalidStencil(format!(
                "stencil of order {} used for a derivative of order {order}",
                self.order
            )))
        }
    }
}

impl Default for DerivativeStencil {
    fn default() -> Self {
        Self::first_order()
    }
}

fn eval_at<T: Copy>(f: &impl Fn(&Point) -> Result<T>, at: Point, center: &Point, finite: impl Fn(T) -> bool) -> Result<T> {
    match f(&at) {
        Ok(v) if finite(v) => Ok(v),
        _ => Err(Error::StencilOutsideDomain(*center)),
    }
}

/// Wirtinger derivative of `f` in coordinate `var`.
pub fn complex_derivative(
    f: impl Fn(&Point) -> Result<Complex64>,
    z: &Point,
    var: usize,
    which: Wirtinger,
    stencil: &DerivativeStencil,
) -> Result<Complex64> {
    stencil.require_order(1)?;
    if var >= z.dim() {
        return Err(Error::InvalidArgument(format!(
            "variable index {var} for a point of dimension {}",
            z.dim()
        )));
    }
    let h = stencil.h(z);
    let finite = |c: Complex64| c.is_finite();
    let fx = (eval_at(&f, z.shifted_real(2 * var, h), z, finite)?
        - eval_at(&f, z.shifted_real(2 * var, -h), z, finite)?)
        / (2.0 * h);
    let fy = (eval_at(&f, z.shifted_real(2 * var + 1, h), z, finite)?
        - eval_at(&f, z.shifted_real(2 * var + 1, -h), z, finite)?)
        / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    Ok(match which {
        Wirtinger::Holomorphic => (fx - i * fy) * 0.5,
        Wirtinger::Antiholomorphic => (fx + i * fy) * 0.5,
    })
}

/// Partial derivative of a real function along real coordinate `k`
/// (interleaved order x₁, y₁, x₂, y₂).
pub fn real_partial(
    f: impl Fn(&Point) -> Result<f64>,
    z: &Point,
    k: usize,
    stencil: &DerivativeStencil,
) -> Result<f64> {
    stencil.require_order(1)?;
    let h = stencil.h(z);
    let finite = |v: f64| v.is_finite();
    let plus = eval_at(&f, z.shifted_real(k, h), z, finite)?;
    let minus = eval_at(&f, z.shifted_real(k, -h), z, finite)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `∂²u / ∂z_α ∂z̄_β` of a real function `u`, from real second differences:
/// `¼[(u_{xαxβ} + u_{yαyβ}) + i(u_{xαyβ} − u_{yαxβ})]`.
pub fn mixed_wirtinger(
    u: impl Fn(&Point) -> Result<f64>,
    z: &Point,
    alpha: usize,
    beta: usize,
    stencil: &DerivativeStencil,
) -> Result<Complex64> {
    stencil.require_order(2)?;
    let h = stencil.h(z);
    let finite = |v: f64| v.is_finite();
    let second = |a: usize, b: usize| -> Result<f64> {
        let at = |sa: f64, sb: f64| eval_at(&u, z.shifted_real(a, sa * h).shifted_real(b, sb * h), z, finite);
        Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h))
    };
    let (xa, ya) = (2 * alpha, 2 * alpha + 1);
    let (xb, yb) = (2 * beta, 2 * beta + 1);
    let re = second(xa, xb)? + second(ya, yb)?;
    let im = second(xa, yb)? - second(ya, xb)?;
    Ok(Complex64::new(re, im) * 0.25)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_at_one() {
        let st = DerivativeStencil::first_order();
        let f = |p: &Point| Ok(p.z() * p.z());
        let d = complex_derivative(f, &Point::re(1.0), 0, Wirtinger::Holomorphic, &st).unwrap();
        assert!((d - c(2.0, 0.0)).norm() < 1e-9);
        let db = complex_derivative(f, &Point::re(1.0), 0, Wirtinger::Antiholomorphic, &st).unwrap();
        assert!(db.norm() < 1e-9);
    }

    #[test]
    fn log_disk_kernel_derivative() {
        // ∂_z log K(z, ξ) = 2ξ̄ / (1 − z ξ̄); at z = 0, ξ = 0.3 this is 0.6
        let xi = c(0.3, 0.0);
        let f = |p: &Point| Ok((1.0 / (PI * (c(1.0, 0.0) - p.z() * xi.conj()).powi(2))).ln());
        let st = DerivativeStencil::first_order();
        let d = complex_derivative(f, &Point::re(0.0), 0, Wirtinger::Holomorphic, &st).unwrap();
        assert!((d - c(0.6, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn conjugate_function_is_antiholomorphic() {
        let st = DerivativeStencil::first_order();
        let z = Point::c(0.2, -0.4);
        let f = |p: &Point| Ok(p.z().conj().powi(3));
        let d = complex_derivative(f, &z, 0, Wirtinger::Holomorphic, &st).unwrap();
        let db = complex_derivative(f, &z, 0, Wirtinger::Antiholomorphic, &st).unwrap();
        assert!(d.norm() < 1e-9);
        assert!((db - 3.0 * z.z().conj().powi(2)).norm() < 1e-8);
    }

    #[test]
    fn stencil_leaving_the_domain() {
        let st = DerivativeStencil::first_order();
        let f = |p: &Point| {
            if p.z().norm() < 1.0 {
                Ok(p.z())
            } else {
                Err(Error::OutsideDomain(*p))
            }
        };
        let err = complex_derivative(f, &Point::re(1.0 - 1e-7), 0, Wirtinger::Holomorphic, &st).unwrap_err();
        assert!(matches!(err, Error::StencilOutsideDomain(_)));
    }

    #[test]
    fn stencil_validation() {
        assert!(DerivativeStencil::new(1e-9, 1).is_err());
        assert!(DerivativeStencil::new(0.1, 1).is_err());
        assert!(DerivativeStencil::new(1e-5, 3).is_err());
        let st = DerivativeStencil::new(1e-5, 2).unwrap();
        let f = |p: &Point| Ok(p.z());
        assert!(complex_derivative(f, &Point::re(0.0), 0, Wirtinger::Holomorphic, &st).is_err());
    }

    #[test]
    fn mixed_second_derivative_of_log_disk_diagonal() {
        // log K(z,z) = −log π − 2 log(1 − |z|²) has ∂∂̄ = 2 / (1 − |z|²)²
        let u = |p: &Point| Ok(-PI.ln() - 2.0 * (1.0 - p.z().norm_sqr()).ln());
        let st = DerivativeStencil::second_order();
        for x in [0.0, 0.5] {
            let g = mixed_wirtinger(u, &Point::re(x), 0, 0, &st).unwrap();
            let exact = 2.0 / (1.0 - x * x).powi(2);
            assert!((g.re - exact).abs() < 1e-6 * exact, "{g} vs {exact}");
            assert!(g.im.abs() < 1e-6);
        }
    }

    #[test]
    fn mixed_derivative_off_diagonal_in_c2() {
        // u = |z₁ + i z₂|², ∂₁∂̄₂ u = conj(i)·1 = −i
        let u = |p: &Point| Ok((p.coord(0) + c(0.0, 1.0) * p.coord(1)).norm_sqr());
        let st = DerivativeStencil::second_order();
        let z = Point::two(c(0.1, 0.2), c(-0.3, 0.1));
        let g = mixed_wirtinger(u, &z, 0, 1, &st).unwrap();
        assert!((g - c(0.0, -1.0)).norm() < 1e-6, "{g}");
    }

    proptest! {
        #[test]
        fn holomorphic_polynomials_have_no_antiholomorphic_part(
            a0 in -1.0f64..1.0, a1 in -1.0f64..1.0, a2 in -1.0f64..1.0, a3 in -1.0f64..1.0,
            x in -0.9f64..0.9, y in -0.9f64..0.9,
        ) {
            let st = DerivativeStencil::first_order();
            let f = |p: &Point| {
                let z = p.z();
                Ok(c(a0, a1) + z * a2 + z * z * c(0.0, a3) + z * z * z * c(a1, a0))
            };
            let db = complex_derivative(f, &Point::c(x, y), 0, Wirtinger::Antiholomorphic, &st).unwrap();
            prop_assert!(db.norm() <= 1e-8);
        }
    }
}
