//! The experiment bodies. Each turns a validated setup into a table, checks
//! and notes.

use num_complex::Complex64;

use crate::domains::{make_domain, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::geometry::{bergman_metric, bergman_metric_stencil, isometry_defect, transformation_residual, ResidualScale};
use crate::infogeo::{
    deficiency, factorization_residual, fisher_matrix, injectivity_verdict, ratio_invariance, score_equality_gap,
    StatModel, Tolerances, Verdict, CONVENTION_CONSTANT,
};
use crate::kernels::{make_kernel, KernelModel};
use crate::maps::{make_map, pushforward_density, MapSpec, ProperMap};
use crate::numerics::{build_quadrature, integrate, DerivativeStencil, QuadratureRule};
use crate::point::Point;

use super::config::{Experiment, ExperimentConfig};
use super::sample::default_sample;
use super::{point_cells, point_header, Cell, Check, Findings, Table};

/// Largest tolerated Fisher asymmetry.
const SYMMETRY_LIMIT: f64 = 1e-10;

pub(super) struct Setup<'a> {
    cfg: &'a ExperimentConfig,
    map: Option<ProperMap>,
    domain1: Domain,
    k1: KernelModel,
    k2: Option<KernelModel>,
    sample: Vec<Point>,
}

impl<'a> Setup<'a> {
    pub(super) fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let map = if cfg.experiment.needs_map() {
            let spec = cfg
                .map
                .clone()
                .ok_or_else(|| Error::InvalidArgument(format!("experiment `{}` needs a `map`", cfg.experiment)))?;
            // a bare `identity` follows domain1
            let spec = match (spec, cfg.domain1) {
                (MapSpec::Identity(DomainSpec::UnitDisk), Some(d)) => MapSpec::Identity(d),
                (spec, _) => spec,
            };
            let map = make_map(&spec)?;
            let source = cfg.domain1.map(make_domain).transpose()?.unwrap_or_else(|| map.source().clone());
            let target = cfg.domain2.map(make_domain).transpose()?.unwrap_or_else(|| map.target().clone());
            map.check_domains(&source, &target)?;
            Some(map)
        } else {
            None
        };
        let domain1 = match &map {
            Some(m) => m.source().clone(),
            None => make_domain(cfg.domain1.unwrap_or(DomainSpec::UnitDisk))?,
        };
        let k1 = make_kernel(&domain1, cfg.kernel1.unwrap_or_else(|| cfg.default_kernel(&domain1)))?;
        let k2 = match (&map, cfg.kernel2) {
            (Some(m), spec) => Some(make_kernel(m.target(), spec.unwrap_or_else(|| cfg.default_kernel(m.target())))?),
            (None, Some(spec)) => Some(make_kernel(&domain1, spec)?),
            (None, None) => None,
        };
        let sample = match &cfg.sample {
            Some(s) => s.resolve(&domain1)?,
            None => default_sample(&domain1),
        };
        if sample.is_empty() {
            return Err(Error::EmptySample("no sample points".into()));
        }
        Ok(Self {
            cfg,
            map,
            domain1,
            k1,
            k2,
            sample,
        })
    }

    fn map(&self) -> &ProperMap {
        self.map.as_ref().expect("map experiments always carry a map")
    }

    fn k2(&self) -> &KernelModel {
        self.k2.as_ref().expect("map experiments always carry a target kernel")
    }

    fn model(&self) -> StatModel {
        StatModel::new(self.k1.clone())
    }

    fn tol(&self, name: &str) -> f64 {
        self.cfg.tolerance(name)
    }

    fn infogeo_tolerances(&self) -> Tolerances {
        Tolerances {
            suff: self.tol("suff"),
            score: self.tol("score"),
            ratio: self.tol("ratio"),
            mono: self.tol("mono"),
        }
    }

    /// The second sample, resolved in `domain`, or `fallback` when absent.
    fn zeta_sample(&self, domain: &Domain, fallback: impl FnOnce() -> Vec<Point>) -> Result<Vec<Point>> {
        match &self.cfg.zeta_sample {
            Some(s) => s.resolve(domain),
            None => Ok(fallback()),
        }
    }

    /// Pairs `(z, ξ)` in the source: the sample zipped with the second sample,
    /// or consecutive sample points.
    fn source_pairs(&self) -> Result<Vec<(Point, Point)>> {
        let n = self.sample.len();
        let xis = self.zeta_sample(&self.domain1, || (0..n).map(|i| self.sample[(i + 1) % n]).collect())?;
        Ok(self.sample.iter().copied().zip(xis).collect())
    }

    fn expect_injective(&self) -> bool {
        match self.cfg.expected {
            Some(Verdict::Injective) => true,
            Some(Verdict::NonInjective) => false,
            _ => self.map().is_injective(),
        }
    }

    /// Small statistic for injective maps, large (beyond `large`) otherwise.
    fn expectation_check(&self, name: &str, statistic: f64, small: f64, large: f64) -> Check {
        if self.expect_injective() {
            Check::at_most(name, statistic, small)
        } else {
            Check::above(name, statistic, large)
        }
    }

    fn rules(&self) -> Result<(QuadratureRule, QuadratureRule)> {
        let f = self.map();
        Ok((f.source_rule(self.cfg.resolution)?, f.target_rule(self.cfg.resolution)?))
    }
}

pub(super) fn run(setup: &Setup<'_>) -> Result<Findings> {
    match setup.cfg.experiment {
        Experiment::KernelTable => kernel_table(setup),
        Experiment::MetricTable => metric_table(setup),
        Experiment::FisherVsBergman => fisher_vs_bergman(setup),
        Experiment::TransformationCheck => transformation_check(setup),
        Experiment::IsometryCheck => isometry_check(setup),
        Experiment::PushforwardCheck => pushforward_check(setup),
        Experiment::DeficiencySweep => deficiency_sweep(setup),
        Experiment::ScoreSweep => score_sweep(setup),
        Experiment::FactorizationCheck => factorization_check(setup),
        Experiment::RatioCheck => ratio_check(setup),
        Experiment::Verdict => verdict(setup),
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn header(parts: &[Vec<String>]) -> Vec<String> {
    parts.concat()
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn kernel_table(s: &Setup<'_>) -> Result<Findings> {
    let n = s.domain1.dimension();
    let mut out = Findings::default();
    out.notes.push(format!("kernel: {} on {}", s.k1.spec(), s.domain1.spec()));
    if let Some(reference) = &s.k2 {
        out.notes.push(format!("reference kernel: {}", reference.spec()));
        let xis = s.zeta_sample(&s.domain1, || s.sample.clone())?;
        let mut table = Table::new(header(&[
            point_header("z", n),
            point_header("xi", n),
            names(&["k_re", "k_im", "ref_re", "ref_im", "abs_err"]),
        ]));
        for z in &s.sample {
            for xi in &xis {
                let k = s.k1.eval(z, xi)?;
                let r = reference.eval(z, xi)?;
                let mut row = point_cells(z);
                row.extend(point_cells(xi));
                row.extend([k.re, k.im, r.re, r.im, (k - r).norm()].map(Cell::Num));
                table.push(row);
            }
        }
        let err = max_of(&table.column("abs_err"));
        out.checks.push(Check::at_most("sup_abs_error", err, s.tol("kernel")));
        out.table = table;
    } else {
        let rule = build_quadrature(&s.domain1, s.cfg.resolution)?;
        out.notes.push(format!("reproducing integrals over rule {} ({} nodes)", rule.domain_id(), rule.len()));
        let mut table = Table::new(header(&[point_header("z", n), names(&["k_zz", "integral", "rel_err"])]));
        for z in &s.sample {
            let kzz = s.k1.diagonal(z)?;
            let integral = integrate(&rule, |xi| {
                Complex64::new(s.k1.eval(z, xi).map(|v| v.norm_sqr()).unwrap_or(f64::NAN), 0.0)
            })?
            .re;
            let mut row = point_cells(z);
            row.extend([kzz, integral, (integral - kzz).abs() / kzz].map(Cell::Num));
            table.push(row);
        }
        let err = max_of(&table.column("rel_err"));
        out.checks.push(Check::at_most("max_reproducing_error", err, s.tol("reproducing")));
        out.table = table;
    }
    Ok(out)
}

fn metric_table(s: &Setup<'_>) -> Result<Findings> {
    let n = s.domain1.dimension();
    let stencil = DerivativeStencil::second_order();
    let entry_names = |prefix: &str| -> Vec<String> {
        (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| [format!("{prefix}{}{}_re", a + 1, b + 1), format!("{prefix}{}{}_im", a + 1, b + 1)]))
            .collect()
    };
    let mut table = Table::new(header(&[
        point_header("z", n),
        entry_names("g"),
        entry_names("gs"),
        names(&["rel_diff", "min_eig"]),
    ]));
    for z in &s.sample {
        let g = bergman_metric(&s.k1, z)?;
        let gs = bergman_metric_stencil(&s.k1, z, &stencil)?;
        let mut row = point_cells(z);
        for m in [&g.matrix, &gs.matrix] {
            for a in 0..n {
                for b in 0..n {
                    row.push(Cell::Num(m[(a, b)].re));
                    row.push(Cell::Num(m[(a, b)].im));
                }
            }
        }
        let rel = (&g.matrix - &gs.matrix).norm() / g.matrix.norm();
        row.extend([rel, g.min_eigenvalue()].map(Cell::Num));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!("kernel: {} on {}; stencil step {}", s.k1.spec(), s.domain1.spec(), stencil.step()));
    out.checks.push(Check::at_most("max_rel_diff", max_of(&table.column("rel_diff")), s.tol("metric")));
    out.checks.push(Check::above("min_eigenvalue", min_of(&table.column("min_eig")), 0.0));
    out.table = table;
    Ok(out)
}

fn upper_names(prefix: &str, d: usize) -> Vec<String> {
    (0..d).flat_map(|k| (k..d).map(move |l| format!("{prefix}{}{}", k + 1, l + 1))).collect()
}

fn upper_cells(m: &nalgebra::DMatrix<f64>) -> Vec<Cell> {
    let d = m.nrows();
    (0..d).flat_map(|k| (k..d).map(move |l| Cell::Num(m[(k, l)]))).collect()
}

fn fisher_vs_bergman(s: &Setup<'_>) -> Result<Findings> {
    let n = s.domain1.dimension();
    let d = 2 * n;
    let rule = build_quadrature(&s.domain1, s.cfg.resolution)?;
    let model = s.model();
    let mut table = Table::new(header(&[
        point_header("z", n),
        upper_names("f", d),
        upper_names("b", d),
        names(&["max_abs_diff", "asymmetry"]),
    ]));
    for z in &s.sample {
        let fisher = fisher_matrix(&model, z, &rule, &s.cfg.scores)?;
        let bergman = bergman_metric(&s.k1, z)?.realified() * CONVENTION_CONSTANT;
        let mut row = point_cells(z);
        row.extend(upper_cells(&fisher.matrix));
        row.extend(upper_cells(&bergman));
        row.push(Cell::Num((&fisher.matrix - &bergman).amax()));
        row.push(Cell::Num(fisher.asymmetry()));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!(
        "b = {CONVENTION_CONSTANT} x realified Bergman metric; the constant is the calibrated real/Hermitian convention (disk, z = 0)"
    ));
    out.notes.push(format!("scores: {}; rule {} ({} nodes)", s.cfg.scores, rule.domain_id(), rule.len()));
    out.checks.push(Check::at_most("max_abs_diff", max_of(&table.column("max_abs_diff")), s.tol("fisher")));
    out.checks.push(Check::at_most("max_asymmetry", max_of(&table.column("asymmetry")), SYMMETRY_LIMIT));
    out.table = table;
    Ok(out)
}

fn transformation_check(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let mut table = Table::new(header(&[point_header("z", n), point_header("xi", n), names(&["residual"])]));
    for (z, xi) in s.source_pairs()? {
        let r = transformation_residual(&s.k1, s.k2(), f, &z, &xi, ResidualScale::RelativeOrAbsolute)?;
        let mut row = point_cells(&z);
        row.extend(point_cells(&xi));
        row.push(Cell::Num(r));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!("map: {}", f.spec()));
    out.checks.push(s.expectation_check(
        "max_residual",
        max_of(&table.column("residual")),
        s.tol("transform"),
        s.tol("witness"),
    ));
    out.table = table;
    Ok(out)
}

fn isometry_check(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let rep = isometry_defect(&s.k1, s.k2(), f, &s.sample)?;
    let mut table = Table::new(header(&[point_header("z", n), names(&["trace_ratio", "deviation"])]));
    for ((z, ratio), dev) in rep.sample.iter().zip(&rep.trace_ratios).zip(&rep.deviations) {
        let mut row = point_cells(z);
        row.extend([*ratio, *dev].map(Cell::Num));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!("map: {}; lambda_hat is the median of trace_ratio", f.spec()));
    for p in &rep.skipped {
        out.notes.push(format!("skipped critical point {p}"));
    }
    out.checks.push(s.expectation_check("defect", rep.defect, s.tol("isometry"), s.tol("witness")));
    out.table = table;
    Ok(out)
}

type TestFunction = (&'static str, fn(Complex64) -> f64);

const TEST_FUNCTIONS: [TestFunction; 6] = [
    ("one", |_| 1.0),
    ("re", |w| w.re),
    ("im_sq", |w| w.im * w.im),
    ("abs_sq", |w| w.norm_sqr()),
    ("cos3re", |w| (3.0 * w.re).cos()),
    ("inv2mre", |w| 1.0 / (2.0 - w.re)),
];

fn pushforward_check(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let (rule1, rule2) = s.rules()?;
    let model = s.model();
    let mut table = Table::new(header(&[point_header("z", n), names(&["test", "source_side", "target_side", "abs_err"])]));
    for z in &s.sample {
        let kzz = s.k1.diagonal(z)?;
        for (name, h) in TEST_FUNCTIONS {
            let lhs = integrate(&rule1, |xi| {
                let p = s.k1.eval(z, xi).map(|v| v.norm_sqr() / kzz).unwrap_or(f64::NAN);
                Complex64::new(h(f.apply_unchecked(xi).coord(0)) * p, 0.0)
            })?
            .re;
            let rhs = integrate(&rule2, |zeta| {
                let q = pushforward_density(f, model.kernel(), z, zeta).map(|v| v.0).unwrap_or(f64::NAN);
                Complex64::new(h(zeta.coord(0)) * q, 0.0)
            })?
            .re;
            let mut row = point_cells(z);
            row.extend([Cell::Text(name.into()), Cell::Num(lhs), Cell::Num(rhs), Cell::Num((lhs - rhs).abs())]);
            table.push(row);
        }
    }
    // the Jacobian-sum density integrates to the source volume
    let base = integrate(&rule2, |zeta| {
        Complex64::new(pushforward_density(f, model.kernel(), &s.sample[0], zeta).map(|v| v.1).unwrap_or(f64::NAN), 0.0)
    })?
    .re;
    let volume = rule1.weight_sum();
    let mut row = point_cells(&s.sample[0]);
    row.extend([Cell::Text("base_density".into()), Cell::Num(volume), Cell::Num(base), Cell::Num((volume - base).abs())]);
    table.push(row);

    let mut out = Findings::default();
    out.notes.push(format!(
        "map: {}; source rule {} and target rule {} exclude the tube of radius {}",
        f.spec(),
        rule1.domain_id(),
        rule2.domain_id(),
        f.exclusion_radius()
    ));
    out.checks.push(Check::at_most("max_abs_err", max_of(&table.column("abs_err")), s.tol("pushforward")));
    out.table = table;
    Ok(out)
}

fn deficiency_sweep(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let d = 2 * n;
    let (rule1, rule2) = s.rules()?;
    let model = s.model();
    let tol = s.infogeo_tolerances();
    let mut table = Table::new(header(&[
        point_header("z", n),
        upper_names("before", d),
        upper_names("after", d),
        names(&["gap_norm", "min_gap_eig", "removed_before", "removed_after"]),
    ]));
    for z in &s.sample {
        let r = deficiency(f, &model, z, &rule1, &rule2, &s.cfg.scores, &tol)?;
        let mut row = point_cells(z);
        row.extend(upper_cells(&r.fisher_before.matrix));
        row.extend(upper_cells(&r.fisher_after.matrix));
        row.extend([r.gap_norm, r.min_gap_eigenvalue, r.removed_mass_before, r.removed_mass_after].map(Cell::Num));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!("map: {}; scores: {}", f.spec(), s.cfg.scores));
    out.checks.push(Check::above("min_gap_eigenvalue", min_of(&table.column("min_gap_eig")), -tol.mono));
    out.checks.push(s.expectation_check("max_gap_norm", max_of(&table.column("gap_norm")), tol.suff, 10.0 * tol.suff));
    out.table = table;
    Ok(out)
}

/// Target points: the configured second sample or the image of the sample,
/// without points in the exclusion tube.
fn target_points(s: &Setup<'_>) -> Result<Vec<Point>> {
    let f = s.map();
    let pts = s.zeta_sample(f.target(), || s.sample.iter().map(|z| f.apply_unchecked(z)).collect())?;
    Ok(pts.into_iter().filter(|p| !f.is_excluded(p)).collect())
}

fn score_sweep(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let model = s.model();
    let zetas = target_points(s)?;
    if zetas.is_empty() {
        return Err(Error::EmptySample("every target point lies in the exclusion tube".into()));
    }
    let mut table = Table::new(header(&[point_header("z", n), point_header("zeta", n), names(&["gap"])]));
    for z in &s.sample {
        for zeta in &zetas {
            let g = score_equality_gap(f, &model, z, zeta, &s.cfg.scores)?;
            let mut row = point_cells(z);
            row.extend(point_cells(zeta));
            row.push(Cell::Num(g));
            table.push(row);
        }
    }
    let tol = s.tol("score");
    let mut out = Findings::default();
    out.notes.push(format!("map: {}; scores: {}", f.spec(), s.cfg.scores));
    out.checks.push(s.expectation_check("max_gap", max_of(&table.column("gap")), tol, 10.0 * tol));
    out.table = table;
    Ok(out)
}

fn factorization_check(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let model = s.model();
    let lambda = s.cfg.lambda;
    let mut table = Table::new(header(&[
        point_header("z", n),
        point_header("xi", n),
        names(&["diagonal", "residual"]),
    ]));
    let pairs = s.source_pairs()?;
    let diagonal = s.sample.iter().map(|p| (*p, *p));
    for (z, xi) in pairs.into_iter().chain(diagonal) {
        let r = factorization_residual(f, &model, s.k2(), lambda, &z, &xi)?;
        let mut row = point_cells(&z);
        row.extend(point_cells(&xi));
        row.extend([if z == xi { 1.0 } else { 0.0 }, r].map(Cell::Num));
        table.push(row);
    }
    let (diag, off): (Vec<(f64, f64)>, Vec<(f64, f64)>) = table
        .column("diagonal")
        .into_iter()
        .zip(table.column("residual"))
        .partition(|(flag, _)| *flag == 1.0);
    let diag: Vec<f64> = diag.into_iter().map(|x| x.1).collect();
    let off: Vec<f64> = off.into_iter().map(|x| x.1).collect();
    let mut out = Findings::default();
    out.notes.push(format!("map: {}; lambda = {lambda}", f.spec()));
    out.checks.push(Check::at_most("max_diagonal_residual", max_of(&diag), 0.0));
    if !off.is_empty() {
        out.checks.push(s.expectation_check(
            "max_offdiagonal_residual",
            max_of(&off),
            s.tol("factorization"),
            s.tol("witness"),
        ));
    }
    out.table = table;
    Ok(out)
}

fn ratio_check(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let model = s.model();
    let xis: Vec<Point> = s
        .zeta_sample(&s.domain1, || s.sample.clone())?
        .into_iter()
        .filter(|xi| !f.is_excluded(&f.apply_unchecked(xi)))
        .collect();
    if xis.is_empty() {
        return Err(Error::EmptySample("every ξ maps into the exclusion tube".into()));
    }
    let mut table = Table::new(header(&[point_header("xi", n), point_header("z", n), names(&["ratio"])]));
    let mut spreads = Vec::new();
    for xi in &xis {
        let (spread, ratios) = ratio_invariance(f, &model, &s.sample, xi)?;
        spreads.push(spread);
        for (z, r) in s.sample.iter().zip(ratios) {
            let mut row = point_cells(xi);
            row.extend(point_cells(z));
            row.push(Cell::Num(r));
            table.push(row);
        }
    }
    let tol = s.tol("ratio");
    let mut out = Findings::default();
    out.notes.push(format!(
        "map: {}; spread per xi is (max - min) / mean of its ratio rows",
        f.spec()
    ));
    out.checks.push(s.expectation_check("max_spread", max_of(&spreads), tol, 10.0 * tol));
    out.table = table;
    Ok(out)
}

fn verdict(s: &Setup<'_>) -> Result<Findings> {
    let f = s.map();
    let n = s.domain1.dimension();
    let model = s.model();
    let (rule1, rule2) = s.rules()?;
    let zetas = s.zeta_sample(f.target(), || s.sample.iter().map(|z| f.apply_unchecked(z)).collect())?;
    let tol = s.infogeo_tolerances();
    let rec = injectivity_verdict(f, &model, &s.sample, &zetas, &rule1, &rule2, &s.cfg.scores, &tol)?;
    let mut table = Table::new(header(&[names(&["test"]), point_header("p", n), point_header("zeta", n), names(&["value"])]));
    let blank = || vec![Cell::Empty; 2 * n];
    for r in &rec.deficiency_reports {
        let mut row = vec![Cell::Text("deficiency".into())];
        row.extend(point_cells(&r.point));
        row.extend(blank());
        row.push(Cell::Num(r.gap_norm));
        table.push(row);
    }
    for (z, zeta, g) in &rec.score_gaps {
        let mut row = vec![Cell::Text("score".into())];
        row.extend(point_cells(z));
        row.extend(point_cells(zeta));
        row.push(Cell::Num(*g));
        table.push(row);
    }
    for (xi, spread) in &rec.ratio_spreads {
        let mut row = vec![Cell::Text("ratio".into())];
        row.extend(point_cells(xi));
        row.extend(blank());
        row.push(Cell::Num(*spread));
        table.push(row);
    }
    let mut out = Findings::default();
    out.notes.push(format!("map: {}; scores: {}", f.spec(), s.cfg.scores));
    for (name, t) in [("deficiency", rec.deficiency), ("score", rec.score), ("ratio", rec.ratio)] {
        out.notes.push(format!(
            "{name}: max {} against tolerance {} ({})",
            super::fmt_float(t.statistic),
            super::fmt_float(t.tolerance),
            if t.passes() {
                "pass"
            } else if t.fails_decisively() {
                "exceeds 10x tolerance"
            } else {
                "ambiguous"
            }
        ));
    }
    out.verdict = Some(rec.verdict);
    out.table = table;
    Ok(out)
}
