//! Bergman metric, Calabi diastasis, and the transformation and isometry checks
//! for proper maps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::KernelModel;
use crate::maps::ProperMap;
use crate::numerics::{mixed_wirtinger, DerivativeStencil};
use crate::point::Point;

/// Below this `|J_ℂ f(z)|` a sample point counts as critical.
pub const CRITICAL_JACOBIAN: f64 = 1e-10;

/// `g_{αβ̄}(z) = ∂²/∂z_α∂z̄_β log K(z, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMetric {
    pub point: Point,
    pub matrix: DMatrix<Complex64>,
}

impl HermitianMetric {
    /// Largest entry of `g − gᴴ`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// The real symmetric `2n × 2n` form `Re(vᵀ g v̄)` in interleaved
    /// coordinates `(x₁, y₁, x₂, y₂)`.
    pub fn realified(&self) -> DMatrix<f64> {
        realify(&self.matrix)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_symmetric_eigenvalue(&self.realified())
    }
}

/// Writing `g = S + iA`, the real block at `(α, β)` is `[[S, A], [−A, S]]`.
pub fn realify(g: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let h = g[(a, b)];
            out[(2 * a, 2 * b)] = h.re;
            out[(2 * a + 1, 2 * b + 1)] = h.re;
            out[(2 * a, 2 * b + 1)] = h.im;
            out[(2 * a + 1, 2 * b)] = -h.im;
        }
    }
    out
}

pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn checked_metric(point: Point, matrix: DMatrix<Complex64>) -> Result<HermitianMetric> {
    let metric = HermitianMetric { point, matrix };
    let min_eigenvalue = metric.min_eigenvalue();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::MetricNotPositive {
            point,
            min_eigenvalue,
            matrix: format!("{:?}", metric.matrix.as_slice()),
        });
    }
    Ok(metric)
}

/// Bergman metric from the analytic kernel derivatives:
/// `g = ∂∂̄K / K − ∂K ∂̄K / K²` at `(z, z)`.
pub fn bergman_metric(k: &KernelModel, z: &Point) -> Result<HermitianMetric> {
    let kzz = k.diagonal(z)?;
    let jet = k.jet(z, z)?;
    let n = k.dimension();
    let matrix = DMatrix::from_fn(n, n, |a, b| jet.mixed[a][b] / kzz - jet.dz[a] * jet.dwbar[b] / (kzz * kzz));
    checked_metric(*z, matrix)
}

/// Bergman metric from second differences of `log K(z, z)`; an independent
/// check on [`bergman_metric`].
pub fn bergman_metric_stencil(k: &KernelModel, z: &Point, stencil: &DerivativeStencil) -> Result<HermitianMetric> {
    k.domain().require(z)?;
    let log_k = |p: &Point| k.diagonal(p).map(f64::ln);
    let n = k.dimension();
    let mut matrix = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            matrix[(a, b)] = mixed_wirtinger(log_k, z, a, b, stencil)?;
        }
    }
    checked_metric(*z, matrix)
}

/// `D(w, ζ) = log(K(w,w) K(ζ,ζ) / |K(w,ζ)|²)`.
///
/// Exactly zero when `w == ζ`; rounding below zero is floored at zero.
pub fn diastasis(k: &KernelModel, w: &Point, zeta: &Point) -> Result<f64> {
    let kw = k.diagonal(w)?;
    let kz = k.diagonal(zeta)?;
    if w == zeta {
        return Ok(0.0);
    }
    let cross = k.eval(w, zeta)?.norm_sqr();
    if cross == 0.0 {
        return Err(Error::KernelVanishes { z: *w, xi: *zeta });
    }
    Ok((kw * kz / cross).ln().max(0.0))
}

/// How the transformation residual is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualScale {
    /// Divide by `|K₁(z, ξ)|`; a vanishing kernel is an error.
    Relative,
    /// Like `Relative`, but fall back to the absolute residual when `K₁(z, ξ) = 0`.
    RelativeOrAbsolute,
}

/// `|K₁(z,ξ) − J f(z) K₂(f z, f ξ) conj(J f(ξ))| / |K₁(z,ξ)|`.
pub fn transformation_residual(
    k1: &KernelModel,
    k2: &KernelModel,
    f: &ProperMap,
    z: &Point,
    xi: &Point,
    scale: ResidualScale,
) -> Result<f64> {
    let lhs = k1.eval(z, xi)?;
    let rhs = f.jacobian_det(z)? * k2.eval(&f.eval(z)?, &f.eval(xi)?)? * f.jacobian_det(xi)?.conj();
    let diff = (lhs - rhs).norm();
    match (lhs.norm(), scale) {
        (0.0, ResidualScale::Relative) => Err(Error::KernelVanishes { z: *z, xi: *xi }),
        (0.0, ResidualScale::RelativeOrAbsolute) => Ok(diff),
        (norm, _) => Ok(diff / norm),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    /// Median of `tr(f*g₂) / tr(g₁)` over the effective sample.
    pub lambda_hat: f64,
    /// Largest `‖f*g₂ − λ̂ g₁‖_F / max(‖f*g₂‖_F, ‖λ̂ g₁‖_F)`.
    pub defect: f64,
    /// Points actually used, in input order.
    pub sample: Vec<Point>,
    pub trace_ratios: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Critical points removed from the sample.
    pub skipped: Vec<Point>,
}

/// Pullback `(f*g)_{αβ̄} = Σ ∂_α f_γ g_{γδ̄}(f z) conj(∂_β f_δ)`, i.e. `Jᵀ g J̄`.
pub fn pullback_metric(k2: &KernelModel, f: &ProperMap, z: &Point) -> Result<DMatrix<Complex64>> {
    let jac = f.jacobian(z)?;
    let g2 = bergman_metric(k2, &f.eval(z)?)?;
    Ok(jac.transpose() * g2.matrix * jac.map(|c| c.conj()))
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tests `f*g_{B₂} = λ g_{B₁}` on a sample, estimating `λ`.
pub fn isometry_defect(
    k1: &KernelModel,
    k2: &KernelModel,
    f: &ProperMap,
    sample: &[Point],
) -> Result<IsometryReport> {
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut pairs = Vec::new();
    for z in sample {
        if f.jacobian_det(z)?.norm() <= CRITICAL_JACOBIAN {
            log::warn!("isometry check: skipping critical point {z}");
            skipped.push(*z);
            continue;
        }
        let g1 = bergman_metric(k1, z)?.matrix;
        let pulled = pullback_metric(k2, f, z)?;
        used.push(*z);
        pairs.push((pulled, g1));
    }
    if used.is_empty() {
        return Err(Error::EmptySample("every isometry sample point is critical".into()));
    }
    let trace_ratios: Vec<f64> = pairs.iter().map(|(p, g)| p.trace().re / g.trace().re).collect();
    let lambda_hat = median(&trace_ratios);
    let deviations: Vec<f64> = pairs
        .iter()
        .map(|(p, g)| {
            let scaled = g * Complex64::new(lambda_hat, 0.0);
            let denom = p.norm().max(scaled.norm());
            if denom == 0.0 {
                0.0
            } else {
                (p - scaled).norm() / denom
            }
        })
        .collect();
    let defect = deviations.iter().copied().fold(0.0, f64::max);
    Ok(IsometryReport {
        lambda_hat,
        defect,
        sample: used,
        trace_ratios,
        deviations,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::domains::Domain;
    use crate::kernels::{make_kernel, KernelSpec};
    use crate::maps::{make_map, MapSpec};

    fn disk() -> KernelModel {
        make_kernel(&Domain::disk(), KernelSpec::ClosedForm).unwrap()
    }

    fn map(s: &str) -> ProperMap {
        make_map(&s.parse::<MapSpec>().unwrap()).unwrap()
    }

    fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Point {
        let r = radius * rng.gen::<f64>().sqrt();
        Point::one(Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI)))
    }

    #[test]
    fn disk_metric_examples() {
        let k = disk();
        let g0 = bergman_metric(&k, &Point::re(0.0)).unwrap();
        assert!((g0.matrix[(0, 0)] - 2.0).norm() < 1e-12);
        let g = bergman_metric(&k, &Point::re(0.5)).unwrap();
        assert!((g.matrix[(0, 0)] - 2.0 / 0.5625).norm() < 1e-12);
        let p = make_kernel(&Domain::polydisk(), KernelSpec::ClosedForm).unwrap();
        let g = bergman_metric(&p, &Point::two(0.0.into(), 0.0.into())).unwrap();
        let expected = DMatrix::from_diagonal_element(2, 2, Complex64::new(2.0, 0.0));
        assert!((g.matrix - expected).norm() < 1e-12);
    }

    #[test]
    fn analytic_metric_matches_stencil() {
        let stencil = DerivativeStencil::second_order();
        let ball = make_kernel(&Domain::ball(), KernelSpec::ClosedForm).unwrap();
        let z = Point::two(Complex64::new(0.2, -0.1), Complex64::new(0.05, 0.3));
        let exact = bergman_metric(&ball, &z).unwrap();
        let fd = bergman_metric_stencil(&ball, &z, &stencil).unwrap();
        assert!((&exact.matrix - &fd.matrix).norm() < 1e-5 * exact.matrix.norm());
        // the ball metric is not diagonal, so this also pins the off-diagonal convention
        assert!(exact.matrix[(0, 1)].norm() > 0.1);
        assert!(exact.hermitian_defect() < 1e-10);

        let ann = make_kernel(&Domain::annulus(0.5).unwrap(), KernelSpec::AnnulusSeries { truncation: 40 }).unwrap();
        let z = Point::c(-0.3, 0.6);
        let exact = bergman_metric(&ann, &z).unwrap();
        let fd = bergman_metric_stencil(&ann, &z, &stencil).unwrap();
        assert!((exact.matrix[(0, 0)] - fd.matrix[(0, 0)]).norm() < 1e-5 * exact.matrix[(0, 0)].norm());
    }

    #[test]
    fn realification_is_a_real_form() {
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.3, -0.4),
                Complex64::new(1.5, 0.0),
            ],
        );
        let m = realify(&g);
        assert_eq!(m, m.transpose());
        // Re(vᵀ g v̄) for a concrete v
        let v = [Complex64::new(0.7, -0.2), Complex64::new(-0.1, 0.5)];
        let mut form = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                form += v[a] * g[(a, b)] * v[b].conj();
            }
        }
        let x = nalgebra::DVector::from_vec(vec![v[0].re, v[0].im, v[1].re, v[1].im]);
        assert!(((x.transpose() * &m * &x)[(0, 0)] - form.re).abs() < 1e-14);
    }

    #[test]
    fn diastasis_examples() {
        let k = disk();
        let w = Point::c(0.2, 0.1);
        assert_eq!(diastasis(&k, &w, &w).unwrap(), 0.0);
        let d = diastasis(&k, &Point::re(0.0), &Point::re(0.5)).unwrap();
        assert!((d - (16.0f64 / 9.0).ln()).abs() < 1e-14);
        let a = diastasis(&k, &w, &Point::re(-0.4)).unwrap();
        let b = diastasis(&k, &Point::re(-0.4), &w).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn transformation_formula() {
        let k = disk();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let id = map("identity");
        let mobius = map("mobius:a=0.3+0i");
        for _ in 0..10 {
            let z = random_disk_point(&mut rng, 0.95);
            let xi = random_disk_point(&mut rng, 0.95);
            assert_eq!(transformation_residual(&k, &k, &id, &z, &xi, ResidualScale::Relative).unwrap(), 0.0);
            let r = transformation_residual(&k, &k, &mobius, &z, &xi, ResidualScale::Relative).unwrap();
            assert!(r <= 1e-10, "{r}");
        }
        let square = map("powerdisk:m=2");
        let r = transformation_residual(&k, &k, &square, &Point::re(0.5), &Point::re(0.6), ResidualScale::Relative)
            .unwrap();
        assert!(r > 0.01, "{r}");
    }

    #[test]
    fn isometry_examples() {
        let k = disk();
        let sample: Vec<Point> = [0.3, 0.5, 0.7]
            .iter()
            .flat_map(|&r| (0..4).map(move |j| Point::one(Complex64::from_polar(r, 0.4 + j as f64))))
            .collect();
        let rep = isometry_defect(&k, &k, &map("identity"), &sample).unwrap();
        assert_eq!(rep.lambda_hat, 1.0);
        assert_eq!(rep.defect, 0.0);

        let rep = isometry_defect(&k, &k, &map("mobius:a=0.3+0i"), &sample).unwrap();
        assert!((rep.lambda_hat - 1.0).abs() < 1e-10);
        assert!(rep.defect <= 1e-8);

        let rep = isometry_defect(&k, &k, &map("powerdisk:m=2"), &sample).unwrap();
        for (z, ratio) in rep.sample.iter().zip(&rep.trace_ratios) {
            let s = z.norm_sqr();
            assert!((ratio - 4.0 * s / (1.0 + s).powi(2)).abs() < 1e-12);
        }
        assert!(rep.defect > 0.1);
    }

    #[test]
    fn isometry_skips_critical_points() {
        let k = disk();
        let f = map("powerdisk:m=2");
        let rep = isometry_defect(&k, &k, &f, &[Point::re(0.0), Point::re(0.4)]).unwrap();
        assert_eq!(rep.skipped, vec![Point::re(0.0)]);
        assert_eq!(rep.sample, vec![Point::re(0.4)]);
        assert!(matches!(isometry_defect(&k, &k, &f, &[Point::re(0.0)]), Err(Error::EmptySample(_))));
    }

    #[test]
    fn mobius_pullback_is_entrywise_isometric() {
        let k = disk();
        let f = map("mobius:a=-0.2+0.45i");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = random_disk_point(&mut rng, 0.9);
            let pulled = pullback_metric(&k, &f, &z).unwrap();
            let g = bergman_metric(&k, &z).unwrap().matrix;
            assert!((pulled[(0, 0)] - g[(0, 0)]).norm() <= 1e-7 * g[(0, 0)].norm());
        }
        let p = make_kernel(&Domain::polydisk(), KernelSpec::ClosedForm).unwrap();
        let f = map("product(mobius:a=0.3+0i;mobius:a=0-0.5i)");
        let z = Point::two(Complex64::new(0.1, 0.6), Complex64::new(-0.3, 0.2));
        let pulled = pullback_metric(&p, &f, &z).unwrap();
        let g = bergman_metric(&p, &z).unwrap().matrix;
        assert!((pulled - &g).norm() <= 1e-7 * g.norm());
    }

    fn disk_point() -> impl Strategy<Value = Point> {
        (0.0..0.97f64, 0.0..(2.0 * PI)).prop_map(|(r, t)| Point::one(Complex64::from_polar(r, t)))
    }

    fn ball_point() -> impl Strategy<Value = Point> {
        (0.0..0.95f64, 0.0..1.0f64, 0.0..(2.0 * PI), 0.0..(2.0 * PI)).prop_map(|(r, s, t1, t2)| {
            let (a, b) = (r * s.sqrt(), r * (1.0 - s).sqrt());
            Point::two(Complex64::from_polar(a, t1), Complex64::from_polar(b, t2))
        })
    }

    proptest! {
        #[test]
        fn metrics_are_hermitian_positive(z in disk_point(), w in ball_point()) {
            let g = bergman_metric(&disk(), &z).unwrap();
            prop_assert!(g.hermitian_defect() < 1e-10);
            prop_assert!(g.min_eigenvalue() > 0.0);
            let ball = make_kernel(&Domain::ball(), KernelSpec::ClosedForm).unwrap();
            let g = bergman_metric(&ball, &w).unwrap();
            prop_assert!(g.hermitian_defect() < 1e-10 * g.matrix.norm());
            prop_assert!(g.min_eigenvalue() > 0.0);
        }

        #[test]
        fn diastasis_is_symmetric_and_positive_off_diagonal(w in disk_point(), z in disk_point()) {
            let k = disk();
            let a = diastasis(&k, &w, &z).unwrap();
            let b = diastasis(&k, &z, &w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            prop_assert!(a >= 0.0);
            if w.distance(&z) > 1e-3 {
                prop_assert!(a > 1e-10);
            }
        }
    }
}
