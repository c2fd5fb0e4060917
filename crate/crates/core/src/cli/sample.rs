//! Point samples for experiments.
//!
//! * explicit lists: `0.1+0.2i; -0.3` (coordinates of a point in ℂ² separated by `,`);
//! * polar grids: `polar:r=0.3|0.5|0.7,k=4,phase=0.3`;
//! * seeded uniform samples: `random:n=100,r=0.9,seed=7`.
//!
//! Grid and random radii are relative: on an ellipse they scale the two
//! semi-axes, and in ℂ² a radius-ρ point is split across both coordinates so
//! that it lies in the ball of radius ρ.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::{param_f64, reject_unknown, split_spec, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::point::{parse_complex, Point};

#[derive(Clone, Debug, PartialEq)]
pub enum SampleSpec {
    Points(Vec<Vec<Complex64>>),
    Polar { radii: Vec<f64>, k: usize, phase: f64 },
    Random { n: usize, r: f64, seed: u64 },
}

impl FromStr for SampleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with("polar:") {
            let (_, params) = split_spec(s)?;
            reject_unknown(&params, &["r", "k", "phase"], s)?;
            let radii_raw = params
                .iter()
                .find(|(k, _)| *k == "r")
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("missing radii `r` in `{s}`")))?;
            let radii = radii_raw
                .split('|')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad radius `{v}` in `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            let k = param_f64(&params, "k", s)?;
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(Error::Parse(format!("angle count k in `{s}` must be a positive integer")));
            }
            let phase = if params.iter().any(|(k, _)| *k == "phase") {
                param_f64(&params, "phase", s)?
            } else {
                0.0
            };
            return Ok(SampleSpec::Polar {
                radii,
                k: k as usize,
                phase,
            });
        }
        if s.starts_with("random:") {
            let (_, params) = split_spec(s)?;
            reject_unknown(&params, &["n", "r", "seed"], s)?;
            let n = param_f64(&params, "n", s)?;
            let seed = param_f64(&params, "seed", s)?;
            if !(n >= 1.0 && n.fract() == 0.0 && seed >= 0.0 && seed.fract() == 0.0) {
                return Err(Error::Parse(format!("`n` and `seed` in `{s}` must be non-negative integers, n ≥ 1")));
            }
            return Ok(SampleSpec::Random {
                n: n as usize,
                r: param_f64(&params, "r", s)?,
                seed: seed as u64,
            });
        }
        let points = s
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.split(',')
                    .map(|c| parse_complex(c).ok_or_else(|| Error::Parse(format!("`{c}` is not a complex number"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::Parse("empty point list".into()));
        }
        Ok(SampleSpec::Points(points))
    }
}

/// Places a point of relative radius `rho` and angle `theta` in the domain's frame.
fn place(domain: &Domain, rho: f64, theta: f64, split: f64, theta2: f64) -> Point {
    let z = Complex64::from_polar(rho, theta);
    match domain.spec() {
        DomainSpec::Ellipse { a, b } => Point::c(a * z.re, b * z.im),
        DomainSpec::Polydisk | DomainSpec::UnitBall => Point::two(
            Complex64::from_polar(rho * split.sqrt(), theta),
            Complex64::from_polar(rho * (1.0 - split).sqrt(), theta2),
        ),
        _ => Point::one(z),
    }
}

impl SampleSpec {
    /// Materializes the sample; every point must lie in `domain`.
    pub fn resolve(&self, domain: &Domain) -> Result<Vec<Point>> {
        let points: Vec<Point> = match self {
            SampleSpec::Points(list) => list
                .iter()
                .map(|coords| {
                    Point::from_slice(coords).ok_or_else(|| Error::Parse(format!("points have 1 or 2 coordinates, got {}", coords.len())))
                })
                .collect::<Result<_>>()?,
            SampleSpec::Polar { radii, k, phase } => radii
                .iter()
                .flat_map(|&r| {
                    (0..*k).map(move |j| {
                        let theta = phase + 2.0 * PI * j as f64 / *k as f64;
                        place(domain, r, theta, 0.5, theta + 1.0)
                    })
                })
                .collect(),
            SampleSpec::Random { n, r, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*n);
                let mut attempts = 0usize;
                while out.len() < *n {
                    attempts += 1;
                    if attempts > 1000 * n {
                        return Err(Error::EmptySample(format!(
                            "random sample with r={r} found only {} points inside {}",
                            out.len(),
                            domain.spec()
                        )));
                    }
                    let rho = r * rng.gen::<f64>().sqrt();
                    let theta = rng.gen_range(0.0..2.0 * PI);
                    let split = rng.gen::<f64>();
                    let theta2 = rng.gen_range(0.0..2.0 * PI);
                    let p = place(domain, rho, theta, split, theta2);
                    if domain.contains(&p)? {
                        out.push(p);
                    }
                }
                out
            }
        };
        for p in &points {
            domain.require(p)?;
        }
        Ok(points)
    }
}

/// A spread of interior points used when no sample is configured.
pub fn default_sample(domain: &Domain) -> Vec<Point> {
    let radii: &[f64] = match domain.spec() {
        DomainSpec::Annulus { r } => &[r + 0.3 * (1.0 - r), r + 0.5 * (1.0 - r), r + 0.7 * (1.0 - r)],
        _ => &[0.0, 0.3, 0.5, 0.7],
    };
    let mut out = Vec::new();
    for &rho in radii {
        let count = if rho == 0.0 { 1 } else { 4 };
        for j in 0..count {
            let theta = 0.3 + 2.0 * PI * j as f64 / count as f64;
            out.push(place(domain, rho, theta, 0.5, theta + 1.0));
        }
    }
    out
}
