//! Tensor-product quadrature over the model domains.
//!
//! Disk and annulus use polar coordinates: Gauss–Legendre in the radius and
//! the periodic trapezoid rule in the angle. The polydisk is a product of
//! two disk rules, the ball uses spherical-polar coordinates
//! `(R cos φ e^{iθ₁}, R sin φ e^{iθ₂})`, and the ellipse uses an iterated
//! (chord-mapped) Gauss–Legendre rule with an indicator mask.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::summation::{ComplexSum, NeumaierSum};
use crate::domains::{Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::point::Point;

pub const MIN_RESOLUTION: usize = 4;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A one-dimensional rule on an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// Gauss–Legendre rule with `n` nodes on `[a, b]`.
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
        }
    }

    /// Periodic trapezoid rule with `n` nodes on `[0, 2π)`.
    pub fn periodic(n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        Self {
            nodes: (0..n).map(|k| k as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect::<NeumaierSum>()
            .value()
    }
}

/// Nodes and positive Lebesgue weights over a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    domain_id: String,
    resolution: usize,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<Point>, weights: Vec<f64>, domain_id: String, resolution: usize) -> Self {
        assert_eq!(nodes.len(), weights.len());
        Self {
            nodes,
            weights,
            domain_id,
            resolution,
        }
    }

    /// Polar rule on `{ r_in < |z| < r_out }` with `n_r` radial and `n_theta` angular nodes.
    pub fn polar(r_in: f64, r_out: f64, n_r: usize, n_theta: usize) -> Self {
        let radial = LineRule::gauss_legendre(r_in, r_out, n_r);
        let angular = LineRule::periodic(n_theta);
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (&t, &wt) in radial.nodes.iter().zip(&radial.weights) {
            for (&theta, &wa) in angular.nodes.iter().zip(&angular.weights) {
                nodes.push(Point::one(Complex64::from_polar(t, theta)));
                weights.push(wt * wa * t);
            }
        }
        Self::new(nodes, weights, format!("polar:{r_in},{r_out}"), n_r)
    }

    /// Tensor product of two planar rules, a rule on a product domain in ℂ².
    pub fn product(first: &QuadratureRule, second: &QuadratureRule) -> Self {
        let mut nodes = Vec::with_capacity(first.len() * second.len());
        let mut weights = Vec::with_capacity(first.len() * second.len());
        for (p, &wp) in first.nodes.iter().zip(&first.weights) {
            for (q, &wq) in second.nodes.iter().zip(&second.weights) {
                nodes.push(Point::two(p.z(), q.z()));
                weights.push(wp * wq);
            }
        }
        Self::new(
            nodes,
            weights,
            format!("({})x({})", first.domain_id, second.domain_id),
            first.resolution.max(second.resolution),
        )
    }

    /// Keeps only the nodes satisfying `keep`, in their original order.
    pub fn masked(&self, keep: impl Fn(&Point) -> bool) -> Self {
        let (nodes, weights): (Vec<Point>, Vec<f64>) = self
            .nodes
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| keep(p))
            .map(|(p, w)| (*p, *w))
            .unzip();
        Self::new(nodes, weights, format!("{}|masked", self.domain_id), self.resolution)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.domain_id = id.into();
        self
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain_id(&self) -> &str {
        &self.domain_id
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().copied().collect::<NeumaierSum>().value()
    }

    /// Rough a-priori bound on the relative volume error of the rule.
    pub fn stated_tolerance(spec: &DomainSpec) -> f64 {
        match spec {
            DomainSpec::Ellipse { .. } => 1e-3,
            _ => 1e-10,
        }
    }
}

/// Builds the quadrature rule of `domain` at refinement `resolution`.
///
/// Planar polar rules use `resolution` radial and `2·resolution` angular
/// nodes; the ℂ² rules use half that per factor to keep node counts sane.
pub fn build_quadrature(domain: &Domain, resolution: usize) -> Result<QuadratureRule> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooLow {
            got: resolution,
            min: MIN_RESOLUTION,
        });
    }
    let id = domain.to_string();
    let rule = match domain.spec() {
        DomainSpec::UnitDisk => QuadratureRule::polar(0.0, 1.0, resolution, 2 * resolution),
        DomainSpec::Annulus { r } => QuadratureRule::polar(r, 1.0, resolution, 2 * resolution),
        DomainSpec::Polydisk => {
            let factor = QuadratureRule::polar(0.0, 1.0, resolution / 2, resolution);
            QuadratureRule::product(&factor, &factor)
        }
        DomainSpec::UnitBall => ball_rule(resolution),
        DomainSpec::Ellipse { a, b } => ellipse_rule(a, b, resolution),
    };
    let rule = QuadratureRule {
        resolution,
        ..rule.with_id(id)
    };
    debug_assert!(rule.nodes.iter().all(|p| domain.contains_unchecked(p)));
    Ok(rule)
}

fn ball_rule(resolution: usize) -> QuadratureRule {
    let n = resolution / 2;
    let radial = LineRule::gauss_legendre(0.0, 1.0, n);
    let polar = LineRule::gauss_legendre(0.0, 0.5 * PI, n);
    let angular = LineRule::periodic(resolution);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (&rr, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (&phi, &wp) in polar.nodes.iter().zip(&polar.weights) {
            let (s, c) = phi.sin_cos();
            // dV = R³ cos φ sin φ dR dφ dθ₁ dθ₂
            let base = wr * wp * rr.powi(3) * c * s;
            for (&t1, &w1) in angular.nodes.iter().zip(&angular.weights) {
                for (&t2, &w2) in angular.nodes.iter().zip(&angular.weights) {
                    nodes.push(Point::two(
                        Complex64::from_polar(rr * c, t1),
                        Complex64::from_polar(rr * s, t2),
                    ));
                    weights.push(base * w1 * w2);
                }
            }
        }
    }
    QuadratureRule::new(nodes, weights, String::new(), resolution)
}

fn ellipse_rule(a: f64, b: f64, resolution: usize) -> QuadratureRule {
    let outer = LineRule::gauss_legendre(-a, a, 2 * resolution);
    let (ys, wys) = gauss_legendre(resolution);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (&x, &wx) in outer.nodes.iter().zip(&outer.weights) {
        let half_chord = b * (1.0 - (x / a).powi(2)).max(0.0).sqrt();
        for (&t, &wt) in ys.iter().zip(&wys) {
            let y = half_chord * t;
            if (x / a).powi(2) + (y / b).powi(2) < 1.0 {
                nodes.push(Point::c(x, y));
                weights.push(wx * wt * half_chord);
            }
        }
    }
    QuadratureRule::new(nodes, weights, String::new(), resolution)
}

/// ∫ f dV, compensated summation in node order.
pub fn integrate(rule: &QuadratureRule, f: impl Fn(&Point) -> Complex64 + Sync) -> Result<Complex64> {
    try_integrate(rule, |p| Ok(f(p)))
}

/// Like [`integrate`] for fallible integrands. Node values may be computed
/// in parallel; the reduction is always sequential.
pub fn try_integrate(
    rule: &QuadratureRule,
    f: impl Fn(&Point) -> Result<Complex64> + Sync,
) -> Result<Complex64> {
    let values: Vec<Complex64> = rule.nodes.par_iter().map(&f).collect::<Result<_>>()?;
    let mut sum = ComplexSum::new();
    for (index, (v, &w)) in values.iter().zip(&rule.weights).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                index,
                point: rule.nodes[index],
            });
        }
        sum.add(*v * w);
    }
    Ok(sum.value())
}

/// Integrates a vector of `len` real components at once. `f` fills the
/// component slice for one node.
pub fn integrate_real_components(
    rule: &QuadratureRule,
    len: usize,
    f: impl Fn(&Point, &mut [f64]) -> Result<()> + Sync,
) -> Result<Vec<f64>> {
    let values: Vec<Vec<f64>> = rule
        .nodes
        .par_iter()
        .map(|p| {
            let mut buf = vec![0.0; len];
            f(p, &mut buf).map(|_| buf)
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![NeumaierSum::new(); len];
    for (index, (v, &w)) in values.iter().zip(&rule.weights).enumerate() {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteIntegrand {
                index,
                point: rule.nodes[index],
            });
        }
        for (s, x) in sums.iter_mut().zip(v) {
            s.add(x * w);
        }
    }
    Ok(sums.iter().map(NeumaierSum::value).collect())
}
