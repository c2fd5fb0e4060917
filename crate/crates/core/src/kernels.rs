//! Bergman kernels `K(z, ξ) = Σ s_j(z) conj(s_j(ξ))`.
//!
//! Three constructions are supported:
//!
//! * closed forms for the disk, the bidisk and the ball in ℂ²;
//! * the bilateral Laurent series of the annulus, truncated at `|j| ≤ J`;
//! * numerical orthonormalization of a monomial basis against a quadrature
//!   rule, for any model domain.
//!
//! Every kernel also exposes its first and mixed derivatives through
//! [`KernelJet`], computed termwise (no finite differences).
//!
//! Kernel grammar for the CLI: `closed`, `series:J=40`, `ortho:deg=12,res=64`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::domains::{param_f64, reject_unknown, split_spec, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    build_quadrature, integrate, lower_inverse, pivoted_cholesky, ComplexSum, QuadratureRule,
};
use crate::point::Point;

pub const DEFAULT_SERIES_TRUNCATION: usize = 40;
pub const PIVOT_DROP_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    ClosedForm,
    AnnulusSeries { truncation: usize },
    Orthonormalized { degree: usize, resolution: usize },
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::ClosedForm => write!(f, "closed"),
            KernelSpec::AnnulusSeries { truncation } => write!(f, "series:J={truncation}"),
            KernelSpec::Orthonormalized { degree, resolution } => {
                write!(f, "ortho:deg={degree},res={resolution}")
            }
        }
    }
}

pub(crate) fn param_usize(params: &[(&str, &str)], key: &str, spec: &str) -> Result<usize> {
    let v = param_f64(params, key, spec)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::Parse(format!("parameter `{key}` in `{spec}` must be a non-negative integer")));
    }
    Ok(v as usize)
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = split_spec(s)?;
        match name {
            "closed" => {
                reject_unknown(&params, &[], s)?;
                Ok(KernelSpec::ClosedForm)
            }
            "series" => {
                reject_unknown(&params, &["J"], s)?;
                let truncation = if params.is_empty() {
                    DEFAULT_SERIES_TRUNCATION
                } else {
                    param_usize(&params, "J", s)?
                };
                Ok(KernelSpec::AnnulusSeries { truncation })
            }
            "ortho" => {
                reject_unknown(&params, &["deg", "res"], s)?;
                Ok(KernelSpec::Orthonormalized {
                    degree: param_usize(&params, "deg", s)?,
                    resolution: param_usize(&params, "res", s)?,
                })
            }
            other => Err(Error::Parse(format!("unknown kernel strategy `{other}`"))),
        }
    }
}

/// Kernel value together with its derivatives at `(z, w)`:
/// `dz[α] = ∂K/∂z_α`, `dwbar[β] = ∂K/∂w̄_β`, `mixed[α][β] = ∂²K/∂z_α∂w̄_β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelJet {
    pub value: Complex64,
    pub dz: [Complex64; 2],
    pub dwbar: [Complex64; 2],
    pub mixed: [[Complex64; 2]; 2],
}

impl KernelJet {
    fn zero() -> Self {
        Self {
            value: ZERO,
            dz: [ZERO; 2],
            dwbar: [ZERO; 2],
            mixed: [[ZERO; 2]; 2],
        }
    }
}

#[derive(Clone, Debug)]
struct OrthoBasis {
    exponents: Vec<[i32; 2]>,
    /// Row `a` holds the monomial coefficients of the orthonormal function `s_a`.
    coeffs: DMatrix<Complex64>,
    gram_error: f64,
    rule_id: String,
}

#[derive(Clone, Debug)]
enum Repr {
    Disk,
    Bidisk,
    Ball,
    Series { coeffs: Vec<(i32, f64)> },
    Ortho(OrthoBasis),
}

#[derive(Clone, Debug)]
pub struct KernelModel {
    domain: Domain,
    spec: KernelSpec,
    repr: Repr,
}

/// Squared norm `‖ξ^j‖²` on the annulus `{ r < |ξ| < 1 }`.
pub fn annulus_monomial_norm_sqr(r: f64, j: i32) -> f64 {
    if j == -1 {
        2.0 * PI * (1.0 / r).ln()
    } else {
        let e = 2 * j + 2;
        2.0 * PI * (1.0 - r.powi(e)) / e as f64
    }
}

pub fn make_kernel(domain: &Domain, spec: KernelSpec) -> Result<KernelModel> {
    let repr = match (spec, domain.spec()) {
        (KernelSpec::ClosedForm, DomainSpec::UnitDisk) => Repr::Disk,
        (KernelSpec::ClosedForm, DomainSpec::Polydisk) => Repr::Bidisk,
        (KernelSpec::ClosedForm, DomainSpec::UnitBall) => Repr::Ball,
        (KernelSpec::ClosedForm, _) => {
            return Err(Error::UnsupportedDomain {
                what: "closed-form kernel",
                domain: domain.to_string(),
            })
        }
        (KernelSpec::AnnulusSeries { truncation }, DomainSpec::Annulus { r }) => {
            let j_max = truncation as i32;
            let coeffs = (-j_max..=j_max)
                .map(|j| (j, 1.0 / annulus_monomial_norm_sqr(r, j)))
                .collect();
            Repr::Series { coeffs }
        }
        (KernelSpec::AnnulusSeries { .. }, _) => {
            return Err(Error::UnsupportedDomain {
                what: "annulus series kernel",
                domain: domain.to_string(),
            })
        }
        (KernelSpec::Orthonormalized { degree, resolution }, _) => {
            let rule = build_quadrature(domain, resolution)?;
            Repr::Ortho(orthonormalize(domain, degree, &rule)?)
        }
    };
    Ok(KernelModel {
        domain: domain.clone(),
        spec,
        repr,
    })
}

fn monomial_exponents(domain: &Domain, degree: usize) -> Vec<[i32; 2]> {
    let d = degree as i32;
    match domain.spec() {
        DomainSpec::Annulus { .. } => (-d..=d).map(|j| [j, 0]).collect(),
        _ if domain.dimension() == 1 => (0..=d).map(|j| [j, 0]).collect(),
        _ => (0..=d)
            .flat_map(|t| (0..=t).rev().map(move |a| [a, t - a]))
            .collect(),
    }
}

fn monomial(z: &Point, e: [i32; 2]) -> Complex64 {
    let mut v = z.z().powi(e[0]);
    if z.dim() == 2 {
        v *= z.coord(1).powi(e[1]);
    }
    v
}

/// ∂/∂z_var of the monomial with exponents `e`.
fn monomial_derivative(z: &Point, e: [i32; 2], var: usize) -> Complex64 {
    let k = e[var];
    if k == 0 {
        return ZERO;
    }
    let mut shifted = e;
    shifted[var] -= 1;
    monomial(z, shifted) * k as f64
}

/// Compensated Gram matrix `G_ij = Σ w · v_i conj(v_j)` of node values
/// (rows = nodes, columns = functions).
fn gram_matrix(values: &DMatrix<Complex64>, weights: &[f64]) -> DMatrix<Complex64> {
    let n = values.ncols();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut s = ComplexSum::new();
            for (k, &w) in weights.iter().enumerate() {
                s.add(values[(k, i)] * values[(k, j)].conj() * w);
            }
            s.value()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&entries) {
        g[(i, j)] = v;
        g[(j, i)] = v.conj();
    }
    for i in 0..n {
        g[(i, i)].im = 0.0;
    }
    g
}

/// One pivoted-Cholesky orthonormalization pass: returns `T` (rank × n)
/// such that the functions `values · Tᵀ` are orthonormal under `weights`.
fn orthonormalization_pass(values: &DMatrix<Complex64>, weights: &[f64]) -> Result<DMatrix<Complex64>> {
    let gram = gram_matrix(values, weights);
    let ch = pivoted_cholesky(&gram, PIVOT_DROP_TOLERANCE)?;
    if ch.rank() < gram.nrows() {
        log::warn!(
            "Gram matrix has numerical rank {} of {}; effective basis truncated",
            ch.rank(),
            gram.nrows()
        );
    }
    let inv = lower_inverse(&ch.factor);
    let mut t = DMatrix::zeros(ch.rank(), gram.nrows());
    for a in 0..ch.rank() {
        for (b, &p) in ch.pivots.iter().enumerate() {
            t[(a, p)] = inv[(a, b)] / ch.scale[p];
        }
    }
    Ok(t)
}

fn max_identity_deviation(g: &DMatrix<Complex64>) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            err = err.max((g[(i, j)] - target).norm());
        }
    }
    err
}

fn orthonormalize(domain: &Domain, degree: usize, rule: &QuadratureRule) -> Result<OrthoBasis> {
    let exponents = monomial_exponents(domain, degree);
    let nodes = rule.nodes();
    let values = DMatrix::from_fn(nodes.len(), exponents.len(), |k, i| monomial(&nodes[k], exponents[i]));
    let first = orthonormalization_pass(&values, rule.weights())?;
    // second pass on the already nearly orthonormal functions
    let ortho_values = &values * first.transpose();
    let second = orthonormalization_pass(&ortho_values, rule.weights())?;
    let coeffs = &second * &first;
    let final_values = &values * coeffs.transpose();
    let gram_error = max_identity_deviation(&gram_matrix(&final_values, rule.weights()));
    Ok(OrthoBasis {
        exponents,
        coeffs,
        gram_error,
        rule_id: format!("{}@{}", rule.domain_id(), rule.resolution()),
    })
}

/// Jet of `c · (1 − ⟨z, w⟩)^{-p}` in `dim` variables.
fn power_kernel_jet(z: &Point, w: &Point, c: f64, p: f64) -> KernelJet {
    let u = ONE - z.inner(w);
    let u1 = u.powf(-p - 1.0);
    let value = if p == 2.0 { c / (u * u) } else { c * u.powf(-p) };
    let mut jet = KernelJet::zero();
    jet.value = value;
    let cp = c * p;
    let u2 = u1 / u;
    for a in 0..z.dim() {
        jet.dz[a] = w.coord(a).conj() * u1 * cp;
        jet.dwbar[a] = z.coord(a) * u1 * cp;
        for b in 0..z.dim() {
            let delta = if a == b { u1 * cp } else { ZERO };
            jet.mixed[a][b] = delta + w.coord(a).conj() * z.coord(b) * u2 * (cp * (p + 1.0));
        }
    }
    jet
}

fn disk_jet(z: Complex64, w: Complex64) -> KernelJet {
    power_kernel_jet(&Point::one(z), &Point::one(w), 1.0 / PI, 2.0)
}

impl KernelModel {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Max entrywise deviation of the orthonormal basis Gram matrix from
    /// the identity under its own rule (orthonormalized strategy only).
    pub fn basis_gram_error(&self) -> Option<f64> {
        match &self.repr {
            Repr::Ortho(b) => Some(b.gram_error),
            _ => None,
        }
    }

    /// Number of orthonormal functions kept after pivoting.
    pub fn basis_rank(&self) -> Option<usize> {
        match &self.repr {
            Repr::Ortho(b) => Some(b.coeffs.nrows()),
            _ => None,
        }
    }

    pub fn basis_rule_id(&self) -> Option<&str> {
        match &self.repr {
            Repr::Ortho(b) => Some(&b.rule_id),
            _ => None,
        }
    }

    /// Laurent coefficients `1/‖ξ^j‖²` of the series strategy.
    pub fn series_coefficients(&self) -> Option<&[(i32, f64)]> {
        match &self.repr {
            Repr::Series { coeffs } => Some(coeffs),
            _ => None,
        }
    }

    fn check(&self, z: &Point, w: &Point) -> Result<()> {
        self.domain.require(z)?;
        self.domain.require(w)
    }

    /// `K(z, w)`. Diagonal values are returned as exact reals.
    pub fn eval(&self, z: &Point, w: &Point) -> Result<Complex64> {
        self.check(z, w)?;
        let mut v = self.value_unchecked(z, w);
        if z == w {
            v.im = 0.0;
        }
        Ok(v)
    }

    /// `K(z, z)`, validated to be positive.
    pub fn diagonal(&self, z: &Point) -> Result<f64> {
        let v = self.eval(z, z)?.re;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositiveDiagonal { point: *z, value: v })
        }
    }

    /// Value and derivatives at `(z, w)`.
    pub fn jet(&self, z: &Point, w: &Point) -> Result<KernelJet> {
        self.check(z, w)?;
        let mut jet = self.jet_unchecked(z, w);
        if z == w {
            jet.value.im = 0.0;
        }
        Ok(jet)
    }

    fn value_unchecked(&self, z: &Point, w: &Point) -> Complex64 {
        match &self.repr {
            Repr::Disk => {
                let u = ONE - z.z() * w.z().conj();
                (1.0 / PI) / (u * u)
            }
            Repr::Bidisk => {
                let u1 = ONE - z.coord(0) * w.coord(0).conj();
                let u2 = ONE - z.coord(1) * w.coord(1).conj();
                (1.0 / (PI * PI)) / (u1 * u1 * u2 * u2)
            }
            Repr::Ball => {
                let u = ONE - z.inner(w);
                (2.0 / (PI * PI)) / (u * u * u)
            }
            Repr::Series { .. } | Repr::Ortho(_) => self.jet_unchecked(z, w).value,
        }
    }

    fn jet_unchecked(&self, z: &Point, w: &Point) -> KernelJet {
        match &self.repr {
            Repr::Disk => disk_jet(z.z(), w.z()),
            Repr::Ball => power_kernel_jet(z, w, 2.0 / (PI * PI), 3.0),
            Repr::Bidisk => {
                let k1 = disk_jet(z.coord(0), w.coord(0));
                let k2 = disk_jet(z.coord(1), w.coord(1));
                KernelJet {
                    value: k1.value * k2.value,
                    dz: [k1.dz[0] * k2.value, k1.value * k2.dz[0]],
                    dwbar: [k1.dwbar[0] * k2.value, k1.value * k2.dwbar[0]],
                    mixed: [
                        [k1.mixed[0][0] * k2.value, k1.dz[0] * k2.dwbar[0]],
                        [k1.dwbar[0] * k2.dz[0], k1.value * k2.mixed[0][0]],
                    ],
                }
            }
            Repr::Series { coeffs } => series_jet(coeffs, z.z(), w.z()),
            Repr::Ortho(basis) => ortho_jet(basis, z, w),
        }
    }
}

fn series_jet(coeffs: &[(i32, f64)], z: Complex64, w: Complex64) -> KernelJet {
    let t = z * w.conj();
    let (mut value, mut dz, mut dw, mut mixed) =
        (ComplexSum::new(), ComplexSum::new(), ComplexSum::new(), ComplexSum::new());
    for &(j, c) in coeffs {
        let term = t.powi(j) * c;
        let jf = j as f64;
        value.add(term);
        dz.add(term * jf);
        dw.add(term * jf);
        mixed.add(term * (jf * jf));
    }
    let mut jet = KernelJet::zero();
    jet.value = value.value();
    jet.dz[0] = dz.value() / z;
    jet.dwbar[0] = dw.value() / w.conj();
    jet.mixed[0][0] = mixed.value() / t;
    jet
}

fn ortho_jet(basis: &OrthoBasis, z: &Point, w: &Point) -> KernelJet {
    let dim = z.dim();
    let n = basis.exponents.len();
    let mz = DMatrix::from_fn(n, 1, |i, _| monomial(z, basis.exponents[i]));
    let mw = DMatrix::from_fn(n, 1, |i, _| monomial(w, basis.exponents[i]));
    let sz = &basis.coeffs * &mz;
    let sw = &basis.coeffs * &mw;
    let dot = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| -> Complex64 {
        let mut s = ComplexSum::new();
        for (x, y) in a.iter().zip(b.iter()) {
            s.add(x * y.conj());
        }
        s.value()
    };
    let mut jet = KernelJet::zero();
    jet.value = dot(&sz, &sw);
    let mut dsz = Vec::with_capacity(dim);
    let mut dsw = Vec::with_capacity(dim);
    for var in 0..dim {
        let dmz = DMatrix::from_fn(n, 1, |i, _| monomial_derivative(z, basis.exponents[i], var));
        let dmw = DMatrix::from_fn(n, 1, |i, _| monomial_derivative(w, basis.exponents[i], var));
        dsz.push(&basis.coeffs * dmz);
        dsw.push(&basis.coeffs * dmw);
    }
    for a in 0..dim {
        jet.dz[a] = dot(&dsz[a], &sw);
        jet.dwbar[a] = dot(&sz, &dsw[a]);
        for b in 0..dim {
            jet.mixed[a][b] = dot(&dsz[a], &dsw[b]);
        }
    }
    jet
}

/// `|∫ |K(z, ξ)|² dV(ξ) − K(z, z)| / K(z, z)`: how far `P(z, ·)` is from
/// being a probability density under `rule`.
pub fn reproducing_residual(kernel: &KernelModel, z: &Point, rule: &QuadratureRule) -> Result<f64> {
    let diag = kernel.diagonal(z)?;
    let mass = integrate(rule, |xi| {
        Complex64::new(kernel.value_unchecked(z, xi).norm_sqr(), 0.0)
    })?;
    Ok((mass.re - diag).abs() / diag)
}
