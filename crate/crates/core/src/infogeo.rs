//! Bergman statistical models, Fisher matrices and the sufficiency tests for
//! proper maps.
//!
//! A model on Ω ⊂ ℂⁿ is the family `z ↦ P(z, ξ) dV(ξ)` with
//! `P(z, ξ) = |K(z, ξ)|² / K(z, z)`. Parameters are differentiated in real
//! coordinates `(x₁, y₁, x₂, y₂)`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::geometry::diastasis;
use crate::kernels::KernelModel;
use crate::maps::{pushforward_density, ProperMap};
use crate::numerics::{
    complex_derivative, integrate_real_components, real_partial, DerivativeStencil, LineRule, NeumaierSum,
    QuadratureRule, Wirtinger,
};
use crate::point::Point;

/// Real Fisher matrix over the Hermitian Bergman metric, fixed by the disk at `z = 0`.
pub const CONVENTION_CONSTANT: f64 = 2.0;

/// Masks removing more than this much probability trigger renormalization.
pub const MASS_RENORMALIZATION: f64 = 1e-6;

/// Eigenvalues of a Fisher matrix below this are a numerical failure.
pub const FISHER_NEGATIVE_LIMIT: f64 = -1e-6;

#[derive(Clone, Debug)]
pub struct StatModel {
    kernel: KernelModel,
}

impl StatModel {
    pub fn new(kernel: KernelModel) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn domain(&self) -> &Domain {
        self.kernel.domain()
    }

    pub fn parameter_dim(&self) -> usize {
        2 * self.kernel.dimension()
    }
}

/// `P(z, ξ) = |K(z, ξ)|² / K(z, z)`; on the diagonal this is exactly `K(z, z)`.
pub fn bergman_density(model: &StatModel, z: &Point, xi: &Point) -> Result<f64> {
    let kzz = model.kernel.diagonal(z)?;
    if z == xi {
        return Ok(kzz);
    }
    Ok(model.kernel.eval(z, xi)?.norm_sqr() / kzz)
}

/// `∫ P(z, ξ) dV(ξ)`.
pub fn normalization(model: &StatModel, z: &Point, rule: &QuadratureRule) -> Result<f64> {
    let v = integrate_real_components(rule, 1, |xi, out| {
        out[0] = bergman_density(model, z, xi)?;
        Ok(())
    })?;
    Ok(v[0])
}

/// How parameter scores `∂ log P / ∂x_k` are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScoreMethod {
    /// Central differences in the real parameter coordinates.
    Stencil(DerivativeStencil),
    /// Logarithmic derivatives of the kernel jet.
    Analytic,
}

impl Default for ScoreMethod {
    fn default() -> Self {
        ScoreMethod::Stencil(DerivativeStencil::first_order())
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreMethod::Stencil(s) => write!(f, "stencil(h={})", s.step()),
            ScoreMethod::Analytic => write!(f, "analytic"),
        }
    }
}

/// Thresholds for the three sufficiency tests and the monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Spectral norm of the Fisher gap.
    pub suff: f64,
    pub score: f64,
    pub ratio: f64,
    pub mono: f64,
}

impl Tolerances {
    pub fn for_method(method: &ScoreMethod) -> Self {
        Self {
            suff: 1e-3,
            score: match method {
                ScoreMethod::Analytic => 1e-6,
                ScoreMethod::Stencil(_) => 1e-4,
            },
            ratio: 1e-4,
            mono: 1e-4,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::for_method(&ScoreMethod::default())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    pub point: Point,
    /// `2n × 2n`, interleaved real coordinates.
    pub matrix: DMatrix<f64>,
    pub rule_id: String,
}

impl FisherMatrix {
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.matrix).iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).iter().map(|e| e.abs()).fold(0.0, f64::max)
}

/// Converts `∂u/∂z_α` of a real function into `(∂u/∂x_α, ∂u/∂y_α)`.
fn real_from_holomorphic(d: Complex64) -> [f64; 2] {
    [2.0 * d.re, -2.0 * d.im]
}

fn scores_from_holomorphic(dz: &[Complex64], out: &mut [f64]) {
    for (a, d) in dz.iter().enumerate() {
        let [x, y] = real_from_holomorphic(*d);
        out[2 * a] = x;
        out[2 * a + 1] = y;
    }
}

fn stencil_scores(log_density: impl Fn(&Point) -> Result<f64>, z: &Point, stencil: &DerivativeStencil, out: &mut [f64]) -> Result<()> {
    for (k, o) in out.iter_mut().enumerate() {
        *o = real_partial(&log_density, z, k, stencil)?;
    }
    Ok(())
}

/// `∂_{z_α} K(z, z) / K(z, z)` for each α.
fn diagonal_log_derivative(kernel: &KernelModel, z: &Point) -> Result<Vec<Complex64>> {
    let jet = kernel.jet(z, z)?;
    Ok((0..kernel.dimension()).map(|a| jet.dz[a] / jet.value.re).collect())
}

/// Scores of `log P(·, ξ)` at `z`.
fn bergman_scores(
    model: &StatModel,
    z: &Point,
    xi: &Point,
    method: &ScoreMethod,
    diag: &[Complex64],
    out: &mut [f64],
) -> Result<()> {
    match method {
        ScoreMethod::Stencil(st) => stencil_scores(|p| bergman_density(model, p, xi).map(f64::ln), z, st, out),
        ScoreMethod::Analytic => {
            let jet = model.kernel.jet(z, xi)?;
            let dz: Vec<Complex64> = (0..diag.len()).map(|a| jet.dz[a] / jet.value - diag[a]).collect();
            scores_from_holomorphic(&dz, out);
            Ok(())
        }
    }
}

/// Scores of `log Q(·, ζ)` for the push-forward family at `z`.
fn pushforward_scores(
    f: &ProperMap,
    model: &StatModel,
    z: &Point,
    zeta: &Point,
    method: &ScoreMethod,
    diag: &[Complex64],
    out: &mut [f64],
) -> Result<()> {
    match method {
        ScoreMethod::Stencil(st) => stencil_scores(
            |p| pushforward_density(f, &model.kernel, p, zeta).map(|(q, _)| q.ln()),
            z,
            st,
            out,
        ),
        ScoreMethod::Analytic => {
            let n = diag.len();
            let mut weight = NeumaierSum::new();
            let mut num = vec![Complex64::new(0.0, 0.0); n];
            for inv in f.local_inverses(zeta)? {
                let jac = inv.jac_inv.norm_sqr();
                let jet = model.kernel.jet(z, &inv.point)?;
                weight.add(jac * jet.value.norm_sqr());
                for (a, s) in num.iter_mut().enumerate() {
                    *s += jac * jet.value.conj() * jet.dz[a];
                }
            }
            let total = weight.value();
            let dz: Vec<Complex64> = num.iter().zip(diag).map(|(s, d)| s / total - d).collect();
            scores_from_holomorphic(&dz, out);
            Ok(())
        }
    }
}

/// Zeroth, first and second score moments against a density.
#[derive(Clone, Debug)]
struct ScoreMoments {
    mass: f64,
    mean: Vec<f64>,
    second: DMatrix<f64>,
}

impl ScoreMoments {
    fn compute(
        rule: &QuadratureRule,
        d: usize,
        density_and_scores: impl Fn(&Point, &mut [f64]) -> Result<f64> + Sync,
    ) -> Result<Self> {
        let len = 1 + d + d * (d + 1) / 2;
        let raw = integrate_real_components(rule, len, |p, out| {
            let mut s = [0.0; 4];
            let rho = density_and_scores(p, &mut s[..d])?;
            out[0] = rho;
            let mut idx = 1 + d;
            for k in 0..d {
                out[1 + k] = s[k] * rho;
                for l in k..d {
                    out[idx] = s[k] * s[l] * rho;
                    idx += 1;
                }
            }
            Ok(())
        })?;
        let mut second = DMatrix::zeros(d, d);
        let mut idx = 1 + d;
        for k in 0..d {
            for l in k..d {
                second[(k, l)] = raw[idx];
                second[(l, k)] = raw[idx];
                idx += 1;
            }
        }
        Ok(Self {
            mass: raw[0],
            mean: raw[1..1 + d].to_vec(),
            second,
        })
    }

    /// Fisher matrix of the family restricted to the rule's support, renormalized
    /// when the support carries noticeably less than unit mass.
    fn fisher(&self) -> DMatrix<f64> {
        if (1.0 - self.mass).abs() <= MASS_RENORMALIZATION {
            return self.second.clone();
        }
        let d = self.mean.len();
        DMatrix::from_fn(d, d, |k, l| {
            self.second[(k, l)] / self.mass - self.mean[k] * self.mean[l] / (self.mass * self.mass)
        })
    }
}

fn checked_fisher(point: Point, matrix: DMatrix<f64>, rule_id: &str) -> Result<FisherMatrix> {
    let fisher = FisherMatrix {
        point,
        matrix,
        rule_id: rule_id.to_string(),
    };
    let min_eigenvalue = fisher.min_eigenvalue();
    if min_eigenvalue < FISHER_NEGATIVE_LIMIT {
        return Err(Error::FisherNotPositive { point, min_eigenvalue });
    }
    Ok(fisher)
}

/// `g_{kl}(z) = ∫ ∂_k log P · ∂_l log P · P dV` over `rule`.
pub fn fisher_matrix(model: &StatModel, z: &Point, rule: &QuadratureRule, method: &ScoreMethod) -> Result<FisherMatrix> {
    model.domain().require(z)?;
    let diag = diagonal_log_derivative(&model.kernel, z)?;
    let moments = ScoreMoments::compute(rule, model.parameter_dim(), |xi, s| {
        bergman_scores(model, z, xi, method, &diag, s)?;
        bergman_density(model, z, xi)
    })?;
    checked_fisher(*z, moments.second, rule.domain_id())
}

/// Gauss–Legendre rule on `[μ − 10σ, μ + 10σ]`.
pub fn gaussian_line_rule(mu: f64, sigma: f64, n: usize) -> LineRule {
    LineRule::gauss_legendre(mu - 10.0 * sigma, mu + 10.0 * sigma, n)
}

/// Fisher matrix of the normal family `N(μ, σ²)` in the parameters `(μ, σ)`.
pub fn gaussian_fisher(mu: f64, sigma: f64, rule: &LineRule) -> Result<DMatrix<f64>> {
    if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("need finite μ and σ > 0, got μ={mu}, σ={sigma}")));
    }
    let lo = rule.nodes.first().copied().unwrap_or(f64::NAN);
    let hi = rule.nodes.last().copied().unwrap_or(f64::NAN);
    // interior nodes of a rule spanning 8σ still reach past ±3.9σ
    if !(lo <= mu - 3.9 * sigma && hi >= mu + 3.9 * sigma) {
        return Err(Error::InsufficientTruncation { mass: f64::NAN });
    }
    let density = |theta: &Point, x: f64| {
        let (m, s) = (theta.real_coord(0), theta.real_coord(1));
        (-0.5 * ((x - m) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let theta = Point::c(mu, sigma);
    let mass = rule.integrate(|x| density(&theta, x));
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InsufficientTruncation { mass });
    }
    let stencil = DerivativeStencil::first_order();
    let mut sums = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let log_p = |t: &Point| Ok(density(t, x).ln());
        let s0 = real_partial(log_p, &theta, 0, &stencil)?;
        let s1 = real_partial(log_p, &theta, 1, &stencil)?;
        let p = density(&theta, x);
        sums[0].add(w * s0 * s0 * p);
        sums[1].add(w * s0 * s1 * p);
        sums[2].add(w * s1 * s1 * p);
    }
    let [a, b, c] = sums.map(|s| s.value());
    Ok(DMatrix::from_row_slice(2, 2, &[a, b, b, c]))
}

/// Fisher entry over Bergman metric entry on the disk at `z = 0`.
pub fn calibrate_convention(rule: &QuadratureRule, method: &ScoreMethod) -> Result<f64> {
    let kernel = crate::kernels::make_kernel(&Domain::disk(), crate::kernels::KernelSpec::ClosedForm)?;
    let z = Point::re(0.0);
    let g = crate::geometry::bergman_metric(&kernel, &z)?;
    let fisher = fisher_matrix(&StatModel::new(kernel), &z, rule, method)?;
    Ok(fisher.matrix[(0, 0)] / g.matrix[(0, 0)].re)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeficiencyReport {
    pub point: Point,
    pub fisher_before: FisherMatrix,
    pub fisher_after: FisherMatrix,
    pub gap: DMatrix<f64>,
    pub gap_norm: f64,
    pub min_gap_eigenvalue: f64,
    /// Probability outside each rule's support.
    pub removed_mass_before: f64,
    pub removed_mass_after: f64,
    pub sufficient: bool,
    pub monotone: bool,
}

fn check_source(f: &ProperMap, model: &StatModel) -> Result<()> {
    if f.source() != model.domain() {
        return Err(Error::InvalidMap(format!(
            "map `{}` starts on {}, but the model lives on {}",
            f.spec(),
            f.source().spec(),
            model.domain().spec()
        )));
    }
    Ok(())
}

/// Fisher information before and after pushing `P(z, ·) dV` forward by `f`.
///
/// `rule1` integrates over the source and `rule2` over the target; when `f`
/// has an exclusion tube they should cover `f⁻¹(Ω₂ ∖ tube)` and `Ω₂ ∖ tube`
/// (see [`ProperMap::source_rule`] and [`ProperMap::target_rule`]), so both
/// matrices describe the same conditioned family.
pub fn deficiency(
    f: &ProperMap,
    model: &StatModel,
    z: &Point,
    rule1: &QuadratureRule,
    rule2: &QuadratureRule,
    method: &ScoreMethod,
    tol: &Tolerances,
) -> Result<DeficiencyReport> {
    check_source(f, model)?;
    model.domain().require(z)?;
    let d = model.parameter_dim();
    let diag = diagonal_log_derivative(&model.kernel, z)?;
    let before = ScoreMoments::compute(rule1, d, |xi, s| {
        bergman_scores(model, z, xi, method, &diag, s)?;
        bergman_density(model, z, xi)
    })?;
    let after = ScoreMoments::compute(rule2, d, |zeta, s| {
        pushforward_scores(f, model, z, zeta, method, &diag, s)?;
        Ok(pushforward_density(f, &model.kernel, z, zeta)?.0)
    })?;
    let fisher_before = checked_fisher(*z, before.fisher(), rule1.domain_id())?;
    let fisher_after = checked_fisher(*z, after.fisher(), rule2.domain_id())?;
    let gap = &fisher_before.matrix - &fisher_after.matrix;
    let min_gap_eigenvalue = symmetric_eigenvalues(&gap).iter().copied().fold(f64::INFINITY, f64::min);
    let gap_norm = spectral_norm(&gap);
    Ok(DeficiencyReport {
        point: *z,
        fisher_before,
        fisher_after,
        gap,
        gap_norm,
        min_gap_eigenvalue,
        removed_mass_before: 1.0 - before.mass,
        removed_mass_after: 1.0 - after.mass,
        sufficient: gap_norm <= tol.suff,
        monotone: min_gap_eigenvalue >= -tol.mono,
    })
}

/// `max_{α, k, l} |∂_α log K(z, f_k⁻¹ζ) − ∂_α log K(z, f_l⁻¹ζ)|`; zero for one sheet.
pub fn score_equality_gap(f: &ProperMap, model: &StatModel, z: &Point, zeta: &Point, method: &ScoreMethod) -> Result<f64> {
    check_source(f, model)?;
    model.domain().require(z)?;
    let inverses = f.local_inverses(zeta)?;
    let n = model.kernel.dimension();
    let mut logs = Vec::with_capacity(inverses.len());
    for inv in &inverses {
        let w = inv.point;
        let row: Vec<Complex64> = match method {
            ScoreMethod::Analytic => {
                let jet = model.kernel.jet(z, &w)?;
                (0..n).map(|a| jet.dz[a] / jet.value).collect()
            }
            ScoreMethod::Stencil(st) => {
                let value = model.kernel.eval(z, &w)?;
                (0..n)
                    .map(|a| {
                        complex_derivative(|p| model.kernel.eval(p, &w), z, a, Wirtinger::Holomorphic, st)
                            .map(|d| d / value)
                    })
                    .collect::<Result<_>>()?
            }
        };
        logs.push(row);
    }
    let mut gap: f64 = 0.0;
    for (k, a) in logs.iter().enumerate() {
        for b in &logs[k + 1..] {
            for (x, y) in a.iter().zip(b) {
                gap = gap.max((x - y).norm());
            }
        }
    }
    Ok(gap)
}

/// `|P₁(z,ξ) − e^{−λ D₂(f z, f ξ)} K₁(ξ,ξ)| / P₁(z,ξ)`, absolute when `P₁(z,ξ) = 0`.
pub fn factorization_residual(
    f: &ProperMap,
    model: &StatModel,
    k2: &KernelModel,
    lambda: f64,
    z: &Point,
    xi: &Point,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    check_source(f, model)?;
    let p = bergman_density(model, z, xi)?;
    let d2 = diastasis(k2, &f.eval(z)?, &f.eval(xi)?)?;
    let factored = (-lambda * d2).exp() * model.kernel.diagonal(xi)?;
    let diff = (p - factored).abs();
    Ok(if p == 0.0 { diff } else { diff / p })
}

/// Ratios `r(z) = P₁(z, ξ) / Q(z, f ξ)` for each `z`, and their relative spread
/// `(max − min) / mean`.
pub fn ratio_invariance(f: &ProperMap, model: &StatModel, z_list: &[Point], xi: &Point) -> Result<(f64, Vec<f64>)> {
    check_source(f, model)?;
    if z_list.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "ratio invariance needs at least two parameter points, got {}",
            z_list.len()
        )));
    }
    let zeta = f.eval(xi)?;
    let ratios: Vec<f64> = z_list
        .iter()
        .map(|z| {
            let (q_num, base) = pushforward_density(f, &model.kernel, z, &zeta)?;
            Ok(bergman_density(model, z, xi)? / (q_num / base))
        })
        .collect::<Result<_>>()?;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().copied().collect::<NeumaierSum>().value() / ratios.len() as f64;
    Ok(((max - min) / mean, ratios))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Injective,
    NonInjective,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Injective => "injective",
            Verdict::NonInjective => "non-injective",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "injective" => Ok(Verdict::Injective),
            "non-injective" => Ok(Verdict::NonInjective),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(Error::Parse(format!("unknown verdict `{other}`"))),
        }
    }
}

/// The largest statistic observed by one test, against its tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub tolerance: f64,
}

impl TestOutcome {
    pub fn passes(&self) -> bool {
        self.statistic <= self.tolerance
    }

    pub fn fails_decisively(&self) -> bool {
        self.statistic > 10.0 * self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct VerdictRecord {
    pub verdict: Verdict,
    pub deficiency: TestOutcome,
    pub score: TestOutcome,
    pub ratio: TestOutcome,
    pub deficiency_reports: Vec<DeficiencyReport>,
    /// `(z, ζ, gap)`
    pub score_gaps: Vec<(Point, Point, f64)>,
    /// `(ξ, spread)`
    pub ratio_spreads: Vec<(Point, f64)>,
}

/// Injective iff all three tests pass; non-injective iff any exceeds ten times
/// its tolerance; inconclusive otherwise.
pub fn classify(tests: &[TestOutcome]) -> Verdict {
    if tests.iter().all(TestOutcome::passes) {
        Verdict::Injective
    } else if tests.iter().any(TestOutcome::fails_decisively) {
        Verdict::NonInjective
    } else {
        Verdict::Inconclusive
    }
}

/// Runs deficiency, score equality and ratio invariance over the samples.
/// Target points inside the exclusion tube are dropped.
#[allow(clippy::too_many_arguments)]
pub fn injectivity_verdict(
    f: &ProperMap,
    model: &StatModel,
    sample_z: &[Point],
    sample_zeta: &[Point],
    rule1: &QuadratureRule,
    rule2: &QuadratureRule,
    method: &ScoreMethod,
    tol: &Tolerances,
) -> Result<VerdictRecord> {
    check_source(f, model)?;
    let zetas: Vec<Point> = sample_zeta.iter().filter(|p| !f.is_excluded(p)).copied().collect();
    if sample_z.len() < 2 || zetas.is_empty() {
        return Err(Error::EmptySample(format!(
            "need at least two parameter points and one admissible target point, got {} and {}",
            sample_z.len(),
            zetas.len()
        )));
    }
    let deficiency_reports: Vec<DeficiencyReport> = sample_z
        .iter()
        .map(|z| deficiency(f, model, z, rule1, rule2, method, tol))
        .collect::<Result<_>>()?;
    let pairs: Vec<(Point, Point)> = sample_z.iter().flat_map(|z| zetas.iter().map(move |w| (*z, *w))).collect();
    let score_gaps: Vec<(Point, Point, f64)> = pairs
        .par_iter()
        .map(|(z, w)| Ok((*z, *w, score_equality_gap(f, model, z, w, method)?)))
        .collect::<Result<_>>()?;
    let ratio_spreads: Vec<(Point, f64)> = zetas
        .iter()
        .map(|zeta| {
            let xi = f.local_inverses(zeta)?[0].point;
            Ok((xi, ratio_invariance(f, model, sample_z, &xi)?.0))
        })
        .collect::<Result<_>>()?;
    let worst = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let deficiency = TestOutcome {
        statistic: worst(&mut deficiency_reports.iter().map(|r| r.gap_norm)),
        tolerance: tol.suff,
    };
    let score = TestOutcome {
        statistic: worst(&mut score_gaps.iter().map(|g| g.2)),
        tolerance: tol.score,
    };
    let ratio = TestOutcome {
        statistic: worst(&mut ratio_spreads.iter().map(|r| r.1)),
        tolerance: tol.ratio,
    };
    Ok(VerdictRecord {
        verdict: classify(&[deficiency, score, ratio]),
        deficiency,
        score,
        ratio,
        deficiency_reports,
        score_gaps,
        ratio_spreads,
    })
}
