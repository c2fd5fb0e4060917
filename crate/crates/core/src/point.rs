use std::fmt;

use num_complex::Complex64;

/// A point of ℂⁿ for n ∈ {1, 2}.
///
/// Unused trailing coordinates are kept at zero so that `==` is a plain
/// coordinate comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [Complex64; 2],
    dim: usize,
}

impl Point {
    pub fn one(z: Complex64) -> Self {
        Self {
            coords: [z, Complex64::new(0.0, 0.0)],
            dim: 1,
        }
    }

    pub fn two(z1: Complex64, z2: Complex64) -> Self {
        Self {
            coords: [z1, z2],
            dim: 2,
        }
    }

    /// Builds a point from a coordinate slice of length 1 or 2.
    pub fn from_slice(zs: &[Complex64]) -> Option<Self> {
        match zs {
            [z] => Some(Self::one(*z)),
            [z1, z2] => Some(Self::two(*z1, *z2)),
            _ => None,
        }
    }

    pub fn re(x: f64) -> Self {
        Self::one(Complex64::new(x, 0.0))
    }

    pub fn c(re: f64, im: f64) -> Self {
        Self::one(Complex64::new(re, im))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords[..self.dim]
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.coords[..self.dim]
    }

    pub fn coord(&self, i: usize) -> Complex64 {
        self.coords()[i]
    }

    /// First coordinate; the natural accessor for planar points.
    pub fn z(&self) -> Complex64 {
        self.coords[0]
    }

    pub fn with_coord(mut self, i: usize, value: Complex64) -> Self {
        self.coords_mut()[i] = value;
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        let mut p = *self;
        p.coords_mut().iter_mut().for_each(|c| *c = c.conj());
        p
    }

    /// Hermitian product ⟨self, other⟩ = Σ selfᵢ · conj(otherᵢ).
    pub fn inner(&self, other: &Point) -> Complex64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Real coordinate `k` in the interleaved order (x₁, y₁, x₂, y₂).
    pub fn real_coord(&self, k: usize) -> f64 {
        let c = self.coords()[k / 2];
        if k % 2 == 0 {
            c.re
        } else {
            c.im
        }
    }

    /// Shifts real coordinate `k` (interleaved order) by `delta`.
    pub fn shifted_real(mut self, k: usize, delta: f64) -> Self {
        let c = &mut self.coords_mut()[k / 2];
        if k % 2 == 0 {
            c.re += delta;
        } else {
            c.im += delta;
        }
        self
    }

    pub fn real_dim(&self) -> usize {
        2 * self.dim
    }
}

fn fmt_complex(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            return fmt_complex(self.coords[0], f);
        }
        write!(f, "(")?;
        fmt_complex(self.coords[0], f)?;
        write!(f, ", ")?;
        fmt_complex(self.coords[1], f)?;
        write!(f, ")")
    }
}

/// Parses `0.3`, `-0.2i`, `0.3+0i`, `1e-3-2.5i` into a complex number.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Some(Complex64::new(re.parse().ok()?, im.trim_start_matches('+').parse().ok()?))
}
