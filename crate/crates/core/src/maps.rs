//! Proper holomorphic maps with explicit inverse systems.
//!
//! Map grammar: `identity`, `identity(<domain>)`, `mobius:a=0.3+0i`,
//! `powerdisk:m=2`, `powerann:r=0.5,m=2`, and on the bidisk
//! `product(<map>;<map>)` with planar disk maps as factors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::domains::{make_domain, param_f64, reject_unknown, split_spec, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::kernels::{param_usize, KernelModel};
use crate::numerics::{build_quadrature, QuadratureRule, MIN_RESOLUTION};
use crate::point::{parse_complex, Point};

/// Radius of the excluded tube around the critical image, per unit domain scale.
pub const EXCLUSION_TUBE: f64 = 0.02;

/// A one-variable holomorphic map acting on a single coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanarMap {
    Identity,
    /// `z ↦ (z − a)/(1 − ā z)`
    Mobius { a: Complex64 },
    /// `z ↦ zᵐ`
    Power { m: u32 },
}

impl PlanarMap {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        match *self {
            PlanarMap::Identity => z,
            PlanarMap::Mobius { a } => (z - a) / (1.0 - a.conj() * z),
            PlanarMap::Power { m } => z.powu(m),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match *self {
            PlanarMap::Identity => Complex64::new(1.0, 0.0),
            PlanarMap::Mobius { a } => {
                let d = 1.0 - a.conj() * z;
                (1.0 - a.norm_sqr()) / (d * d)
            }
            PlanarMap::Power { m } => f64::from(m) * z.powu(m - 1),
        }
    }

    pub fn sheets(&self) -> usize {
        match *self {
            PlanarMap::Power { m } => m as usize,
            _ => 1,
        }
    }

    /// All preimages of `zeta` with `1/f'(w)`, in branch order.
    pub fn inverses(&self, zeta: Complex64) -> Vec<(Complex64, Complex64)> {
        match *self {
            PlanarMap::Identity => vec![(zeta, Complex64::new(1.0, 0.0))],
            PlanarMap::Mobius { a } => {
                let w = (zeta + a) / (1.0 + a.conj() * zeta);
                vec![(w, 1.0 / self.derivative(w))]
            }
            PlanarMap::Power { m } => {
                let mf = f64::from(m);
                let principal = Complex64::from_polar(zeta.norm().powf(1.0 / mf), zeta.arg() / mf);
                (0..m)
                    .map(|k| {
                        let w = if k == 0 {
                            principal
                        } else {
                            principal * Complex64::from_polar(1.0, 2.0 * PI * f64::from(k) / mf)
                        };
                        (w, 1.0 / self.derivative(w))
                    })
                    .collect()
            }
        }
    }

    /// Critical values in the target coordinate.
    fn critical_values(&self) -> Vec<Complex64> {
        match self {
            PlanarMap::Power { .. } => vec![Complex64::new(0.0, 0.0)],
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec {
    Identity(DomainSpec),
    Mobius { a: Complex64 },
    PowerDisk { m: u32 },
    PowerAnnulus { r: f64, m: u32 },
    /// Coordinatewise product on the bidisk; both factors are disk maps.
    Product(Box<MapSpec>, Box<MapSpec>),
}

impl MapSpec {
    /// The planar factor of a disk-to-disk map.
    fn as_disk_factor(&self) -> Option<PlanarMap> {
        match *self {
            MapSpec::Identity(DomainSpec::UnitDisk) => Some(PlanarMap::Identity),
            MapSpec::Mobius { a } => Some(PlanarMap::Mobius { a }),
            MapSpec::PowerDisk { m } => Some(PlanarMap::Power { m }),
            _ => None,
        }
    }

    /// Names accepted by the parser, for `blab list-maps`.
    pub fn registry() -> Vec<MapSpec> {
        vec![
            MapSpec::Identity(DomainSpec::UnitDisk),
            MapSpec::Mobius { a: Complex64::new(0.3, 0.0) },
            MapSpec::PowerDisk { m: 2 },
            MapSpec::PowerAnnulus { r: 0.5, m: 2 },
            MapSpec::Product(
                Box::new(MapSpec::Mobius { a: Complex64::new(0.3, 0.0) }),
                Box::new(MapSpec::PowerDisk { m: 2 }),
            ),
        ]
    }
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Identity(DomainSpec::UnitDisk) => write!(f, "identity"),
            MapSpec::Identity(d) => write!(f, "identity({d})"),
            MapSpec::Mobius { a } => write!(f, "mobius:a={}", fmt_complex(*a)),
            MapSpec::PowerDisk { m } => write!(f, "powerdisk:m={m}"),
            MapSpec::PowerAnnulus { r, m } => write!(f, "powerann:r={r},m={m}"),
            MapSpec::Product(a, b) => write!(f, "product({a};{b})"),
        }
    }
}

fn parse_exponent(params: &[(&str, &str)], spec: &str) -> Result<u32> {
    let m = param_usize(params, "m", spec)?;
    if m < 2 {
        return Err(Error::InvalidMap(format!("power exponent m={m} in `{spec}` must be at least 2")));
    }
    u32::try_from(m).map_err(|_| Error::InvalidMap(format!("power exponent in `{spec}` is too large")))
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = split_top_level(inner)
                .ok_or_else(|| Error::Parse(format!("expected `product(<map>;<map>)`, got `{s}`")))?;
            let (a, b): (MapSpec, MapSpec) = (a.parse()?, b.parse()?);
            if a.as_disk_factor().is_none() || b.as_disk_factor().is_none() {
                return Err(Error::InvalidMap(format!(
                    "product factors must be disk maps (identity, mobius, powerdisk) in `{s}`"
                )));
            }
            return Ok(MapSpec::Product(Box::new(a), Box::new(b)));
        }
        if let Some(inner) = s.strip_prefix("identity(").and_then(|r| r.strip_suffix(')')) {
            return Ok(MapSpec::Identity(inner.parse()?));
        }
        let (name, params) = split_spec(s)?;
        match name {
            "identity" => {
                reject_unknown(&params, &[], s)?;
                Ok(MapSpec::Identity(DomainSpec::UnitDisk))
            }
            "mobius" => {
                reject_unknown(&params, &["a"], s)?;
                let raw = params
                    .iter()
                    .find(|(k, _)| *k == "a")
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::Parse(format!("missing parameter `a` in `{s}`")))?;
                let a = parse_complex(raw)
                    .ok_or_else(|| Error::Parse(format!("parameter `a={raw}` in `{s}` is not a complex number")))?;
                if !(a.norm() < 1.0) {
                    return Err(Error::InvalidMap(format!("Möbius parameter must satisfy |a| < 1, got |a|={}", a.norm())));
                }
                Ok(MapSpec::Mobius { a })
            }
            "powerdisk" => {
                reject_unknown(&params, &["m"], s)?;
                Ok(MapSpec::PowerDisk { m: parse_exponent(&params, s)? })
            }
            "powerann" => {
                reject_unknown(&params, &["r", "m"], s)?;
                let r = param_f64(&params, "r", s)?;
                DomainSpec::Annulus { r }.validate()?;
                Ok(MapSpec::PowerAnnulus { r, m: parse_exponent(&params, s)? })
            }
            other => Err(Error::Parse(format!("unknown map `{other}`"))),
        }
    }
}

/// Splits `a;b` at the single `;` outside parentheses.
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    let mut cut = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                if cut.is_some() {
                    return None;
                }
                cut = Some(i);
            }
            _ => {}
        }
    }
    cut.map(|i| (s[..i].trim(), s[i + 1..].trim()))
}

/// One component `{ ζ : ζ_coordinate = value }` of the critical image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalComponent {
    pub coordinate: usize,
    pub value: Complex64,
}

/// A local inverse branch evaluated at a target point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalInverse {
    pub point: Point,
    /// `1 / J_ℂ f(point)`
    pub jac_inv: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProperMap {
    spec: MapSpec,
    source: Domain,
    target: Domain,
    factors: Vec<PlanarMap>,
    sheet_count: usize,
    critical: Vec<CriticalComponent>,
}

pub fn make_map(spec: &MapSpec) -> Result<ProperMap> {
    let (source, target, factors) = match spec {
        MapSpec::Identity(d) => {
            let domain = make_domain(*d)?;
            let factors = vec![PlanarMap::Identity; domain.dimension()];
            (domain.clone(), domain, factors)
        }
        MapSpec::Mobius { a } => {
            if !(a.norm() < 1.0) {
                return Err(Error::InvalidMap(format!("Möbius parameter must satisfy |a| < 1, got {a}")));
            }
            (Domain::disk(), Domain::disk(), vec![PlanarMap::Mobius { a: *a }])
        }
        MapSpec::PowerDisk { m } => {
            if *m < 2 {
                return Err(Error::InvalidMap(format!("power exponent m={m} must be at least 2")));
            }
            (Domain::disk(), Domain::disk(), vec![PlanarMap::Power { m: *m }])
        }
        MapSpec::PowerAnnulus { r, m } => {
            if *m < 2 {
                return Err(Error::InvalidMap(format!("power exponent m={m} must be at least 2")));
            }
            let exponent = i32::try_from(*m).map_err(|_| Error::InvalidMap("exponent too large".into()))?;
            (Domain::annulus(*r)?, Domain::annulus(r.powi(exponent))?, vec![PlanarMap::Power { m: *m }])
        }
        MapSpec::Product(a, b) => {
            let pair = a.as_disk_factor().zip(b.as_disk_factor()).ok_or_else(|| {
                Error::InvalidMap(format!("product factors must be disk maps, got `{spec}`"))
            })?;
            (Domain::polydisk(), Domain::polydisk(), vec![pair.0, pair.1])
        }
    };
    let sheet_count = factors.iter().map(PlanarMap::sheets).product();
    // zᵐ has no critical point inside an annulus
    let critical = if matches!(spec, MapSpec::PowerAnnulus { .. }) {
        Vec::new()
    } else {
        factors
            .iter()
            .enumerate()
            .flat_map(|(coordinate, f)| {
                f.critical_values()
                    .into_iter()
                    .map(move |value| CriticalComponent { coordinate, value })
            })
            .collect()
    };
    Ok(ProperMap {
        spec: spec.clone(),
        source,
        target,
        factors,
        sheet_count,
        critical,
    })
}

impl ProperMap {
    /// Checks that the map runs between the given domains.
    pub fn check_domains(&self, source: &Domain, target: &Domain) -> Result<()> {
        if source != &self.source || target != &self.target {
            return Err(Error::InvalidMap(format!(
                "map `{}` runs from {} to {}, not from {} to {}",
                self.spec,
                self.source.spec(),
                self.target.spec(),
                source.spec(),
                target.spec()
            )));
        }
        Ok(())
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn source(&self) -> &Domain {
        &self.source
    }

    pub fn target(&self) -> &Domain {
        &self.target
    }

    pub fn sheet_count(&self) -> usize {
        self.sheet_count
    }

    pub fn critical_image(&self) -> &[CriticalComponent] {
        &self.critical
    }

    pub fn is_injective(&self) -> bool {
        self.sheet_count == 1
    }

    pub fn exclusion_radius(&self) -> f64 {
        EXCLUSION_TUBE * self.target.scale()
    }

    pub fn eval(&self, z: &Point) -> Result<Point> {
        self.source.require(z)?;
        Ok(self.apply_unchecked(z))
    }

    pub(crate) fn apply_unchecked(&self, z: &Point) -> Point {
        let mut out = *z;
        for (c, f) in out.coords_mut().iter_mut().zip(&self.factors) {
            *c = f.apply(*c);
        }
        out
    }

    /// Complex Jacobian matrix `∂f_c/∂z_a` (row `c`, column `a`).
    pub fn jacobian(&self, z: &Point) -> Result<DMatrix<Complex64>> {
        self.source.require(z)?;
        let n = self.factors.len();
        Ok(DMatrix::from_fn(n, n, |c, a| {
            if c == a {
                self.factors[c].derivative(z.coord(c))
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Complex Jacobian determinant `J_ℂ f(z)`.
    pub fn jacobian_det(&self, z: &Point) -> Result<Complex64> {
        self.source.require(z)?;
        Ok(self
            .factors
            .iter()
            .zip(z.coords())
            .map(|(f, c)| f.derivative(*c))
            .product())
    }

    pub fn distance_to_critical(&self, zeta: &Point) -> f64 {
        self.critical
            .iter()
            .map(|c| (zeta.coord(c.coordinate) - c.value).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_excluded(&self, zeta: &Point) -> bool {
        self.distance_to_critical(zeta) < self.exclusion_radius()
    }

    /// Every preimage of `zeta` with its inverse Jacobian, in branch order
    /// (for products, the first factor's branch varies slowest).
    pub fn local_inverses(&self, zeta: &Point) -> Result<Vec<LocalInverse>> {
        self.target.require(zeta)?;
        if self.is_excluded(zeta) {
            return Err(Error::ExcludedPoint(*zeta));
        }
        let mut out = vec![LocalInverse {
            point: *zeta,
            jac_inv: Complex64::new(1.0, 0.0),
        }];
        for (c, f) in self.factors.iter().enumerate() {
            let branches = f.inverses(zeta.coord(c));
            out = out
                .iter()
                .flat_map(|partial| {
                    branches.iter().map(move |&(w, j)| LocalInverse {
                        point: partial.point.with_coord(c, w),
                        jac_inv: partial.jac_inv * j,
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Quadrature rule on the target with the exclusion tube removed.
    pub fn target_rule(&self, resolution: usize) -> Result<QuadratureRule> {
        let rho = self.exclusion_radius();
        self.tube_rule(resolution, |_| rho, "target")
    }

    /// Quadrature rule on the preimage of the target minus the exclusion tube.
    pub fn source_rule(&self, resolution: usize) -> Result<QuadratureRule> {
        let rho = self.exclusion_radius();
        self.tube_rule(resolution, |m| rho.powf(1.0 / f64::from(m)), "source")
    }

    fn tube_rule(&self, resolution: usize, inner: impl Fn(u32) -> f64, side: &str) -> Result<QuadratureRule> {
        if self.critical.is_empty() {
            let domain = if side == "target" { &self.target } else { &self.source };
            return build_quadrature(domain, resolution);
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooLow {
                got: resolution,
                min: MIN_RESOLUTION,
            });
        }
        // only disk factors carry critical values, so every factor is a disk map
        let factor_rule = |f: &PlanarMap, n_r: usize, n_theta: usize| {
            let r_in = match f {
                PlanarMap::Power { m } => inner(*m),
                _ => 0.0,
            };
            QuadratureRule::polar(r_in, 1.0, n_r, n_theta)
        };
        let rule = match self.factors.as_slice() {
            [f] => factor_rule(f, resolution, 2 * resolution),
            [f, g] => QuadratureRule::product(
                &factor_rule(f, resolution / 2, resolution),
                &factor_rule(g, resolution / 2, resolution),
            ),
            _ => unreachable!("maps act on one or two coordinates"),
        };
        Ok(rule.with_id(format!("{side}:{}/tube={}", self.spec, self.exclusion_radius())))
    }
}

/// `(Q_numerator(z, ζ), base_density(ζ))` of the push-forward of `P(z, ·) dV`.
pub fn pushforward_density(f: &ProperMap, k1: &KernelModel, z: &Point, zeta: &Point) -> Result<(f64, f64)> {
    let kzz = k1.diagonal(z)?;
    let mut numerator = 0.0;
    let mut base = 0.0;
    for inv in f.local_inverses(zeta)? {
        let jac_sqr = inv.jac_inv.norm_sqr();
        numerator += k1.eval(z, &inv.point)?.norm_sqr() * jac_sqr / kzz;
        base += jac_sqr;
    }
    Ok((numerator, base))
}
