//! Model bounded domains in ℂ and ℂ².
//!
//! Textual grammar (used by the CLI): `disk`, `annulus:r=0.5`, `polydisk`,
//! `ball2`, `ellipse:a=1,b=0.5`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    UnitDisk,
    /// `{ r < |z| < 1 }`
    Annulus { r: f64 },
    /// Unit bidisk in ℂ².
    Polydisk,
    /// Unit ball in ℂ².
    UnitBall,
    /// `{ (x/a)² + (y/b)² < 1 }`
    Ellipse { a: f64, b: f64 },
}

impl DomainSpec {
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Polydisk | DomainSpec::UnitBall => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::Annulus { r } if !(r > 0.0 && r < 1.0) => Err(Error::InvalidDomain(
                format!("annulus inner radius r={r} must satisfy 0 < r < 1"),
            )),
            DomainSpec::Ellipse { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(Error::InvalidDomain(format!(
                    "ellipse semi-axes a={a}, b={b} must be positive and finite"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::UnitDisk => write!(f, "disk"),
            DomainSpec::Annulus { r } => write!(f, "annulus:r={r}"),
            DomainSpec::Polydisk => write!(f, "polydisk"),
            DomainSpec::UnitBall => write!(f, "ball2"),
            DomainSpec::Ellipse { a, b } => write!(f, "ellipse:a={a},b={b}"),
        }
    }
}

/// Splits `name:k=v,k=v` into the name and its parameters.
pub(crate) fn split_spec(s: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let s = s.trim();
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (s, None),
    };
    let mut params = Vec::new();
    if let Some(rest) = rest {
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in `{item}` of `{s}`")))?;
            params.push((k.trim(), v.trim()));
        }
    }
    Ok((name, params))
}

pub(crate) fn param_f64(params: &[(&str, &str)], key: &str, spec: &str) -> Result<f64> {
    let raw = params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse(format!("missing parameter `{key}` in `{spec}`")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("parameter `{key}={raw}` in `{spec}` is not a number")))
}

pub(crate) fn reject_unknown(params: &[(&str, &str)], allowed: &[&str], spec: &str) -> Result<()> {
    match params.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(Error::Parse(format!("unknown parameter `{k}` in `{spec}`"))),
        None => Ok(()),
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = split_spec(s)?;
        let spec = match name {
            "disk" => {
                reject_unknown(&params, &[], s)?;
                DomainSpec::UnitDisk
            }
            "annulus" => {
                reject_unknown(&params, &["r"], s)?;
                DomainSpec::Annulus {
                    r: param_f64(&params, "r", s)?,
                }
            }
            "polydisk" => {
                reject_unknown(&params, &[], s)?;
                DomainSpec::Polydisk
            }
            "ball2" => {
                reject_unknown(&params, &[], s)?;
                DomainSpec::UnitBall
            }
            "ellipse" => {
                reject_unknown(&params, &["a", "b"], s)?;
                DomainSpec::Ellipse {
                    a: param_f64(&params, "a", s)?,
                    b: param_f64(&params, "b", s)?,
                }
            }
            other => return Err(Error::Parse(format!("unknown domain `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A validated model domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    spec: DomainSpec,
    volume_hint: Option<f64>,
}

pub fn make_domain(spec: DomainSpec) -> Result<Domain> {
    spec.validate()?;
    let volume_hint = Some(match spec {
        DomainSpec::UnitDisk => PI,
        DomainSpec::Annulus { r } => PI * (1.0 - r * r),
        DomainSpec::Polydisk => PI * PI,
        DomainSpec::UnitBall => PI * PI / 2.0,
        DomainSpec::Ellipse { a, b } => PI * a * b,
    });
    Ok(Domain { spec, volume_hint })
}

impl Domain {
    pub fn disk() -> Self {
        make_domain(DomainSpec::UnitDisk).expect("unit disk is valid")
    }

    pub fn annulus(r: f64) -> Result<Self> {
        make_domain(DomainSpec::Annulus { r })
    }

    pub fn polydisk() -> Self {
        make_domain(DomainSpec::Polydisk).expect("polydisk is valid")
    }

    pub fn ball() -> Self {
        make_domain(DomainSpec::UnitBall).expect("ball is valid")
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        make_domain(DomainSpec::Ellipse { a, b })
    }

    pub fn spec(&self) -> DomainSpec {
        self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    pub fn volume_hint(&self) -> Option<f64> {
        self.volume_hint
    }

    /// Length scale used for exclusion tubes and accuracy regions.
    pub fn scale(&self) -> f64 {
        match self.spec {
            DomainSpec::Ellipse { a, b } => a.max(b),
            _ => 1.0,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, p: &Point) -> Result<bool> {
        if p.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: p.dim(),
            });
        }
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Point) -> bool {
        match self.spec {
            DomainSpec::UnitDisk => p.z().norm_sqr() < 1.0,
            DomainSpec::Annulus { r } => {
                let t = p.z().norm_sqr();
                t > r * r && t < 1.0
            }
            DomainSpec::Polydisk => p.coords().iter().all(|c| c.norm_sqr() < 1.0),
            DomainSpec::UnitBall => p.norm_sqr() < 1.0,
            DomainSpec::Ellipse { a, b } => {
                let z = p.z();
                (z.re / a).powi(2) + (z.im / b).powi(2) < 1.0
            }
        }
    }

    pub fn require(&self, p: &Point) -> Result<()> {
        if self.contains(p)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain(*p))
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn volume_hints() {
        assert_eq!(Domain::disk().volume_hint(), Some(PI));
        assert_eq!(Domain::annulus(0.5).unwrap().volume_hint(), Some(0.75 * PI));
        assert_eq!(Domain::ellipse(1.0, 0.5).unwrap().volume_hint(), Some(PI / 2.0));
        assert_eq!(Domain::polydisk().volume_hint(), Some(PI * PI));
        assert_eq!(Domain::ball().volume_hint(), Some(PI * PI / 2.0));
    }

    #[test]
    fn membership_examples() {
        assert!(Domain::disk().contains(&Point::re(0.99)).unwrap());
        assert!(!Domain::disk().contains(&Point::re(1.0)).unwrap());
        assert!(!Domain::annulus(0.5).unwrap().contains(&Point::re(0.3)).unwrap());
        let p = Point::two(Complex64::new(0.8, 0.0), Complex64::new(0.7, 0.0));
        assert!(!Domain::ball().contains(&p).unwrap());
        assert!(Domain::polydisk().contains(&p).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = Point::two(Complex64::new(0.1, 0.0), Complex64::new(0.1, 0.0));
        assert!(matches!(
            Domain::disk().contains(&p),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(Domain::annulus(1.5), Err(Error::InvalidDomain(_))));
        assert!(matches!(Domain::annulus(0.0), Err(Error::InvalidDomain(_))));
        assert!(matches!(Domain::ellipse(1.0, -0.5), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["disk", "annulus:r=0.5", "polydisk", "ball2", "ellipse:a=1,b=0.5"] {
            let spec: DomainSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let err = "annulus:r=1.5".parse::<DomainSpec>().unwrap_err();
        assert!(err.to_string().contains("0 < r < 1"));
        assert!("annulus".parse::<DomainSpec>().is_err());
        assert!("torus".parse::<DomainSpec>().is_err());
    }

    proptest! {
        #[test]
        fn membership_is_symmetric(x in -1.2f64..1.2, y in -1.2f64..1.2, theta in 0.0f64..6.3) {
            let z = Complex64::new(x, y);
            let rot = Complex64::from_polar(1.0, theta);
            for d in [Domain::disk(), Domain::annulus(0.4).unwrap()] {
                let inside = d.contains(&Point::one(z)).unwrap();
                prop_assert_eq!(inside, d.contains(&Point::one(z.conj())).unwrap());
                // rotation can move a point across the boundary only through rounding
                let rotated = Point::one(z * rot);
                let margin = (z.norm() - 1.0).abs().min((z.norm() - 0.4).abs());
                if margin > 1e-12 {
                    prop_assert_eq!(inside, d.contains(&rotated).unwrap());
                }
            }
            let e = Domain::ellipse(1.0, 0.5).unwrap();
            let inside = e.contains(&Point::one(z)).unwrap();
            prop_assert_eq!(inside, e.contains(&Point::one(z.conj())).unwrap());
            prop_assert_eq!(inside, e.contains(&Point::one(-z)).unwrap());
        }
    }
}
