//! Projective 2x2 real matrices acting on the extended real line.
//!
//! Every interval map in this crate is piecewise given by a [`MoebiusMap`],
//! and every planar transformation is built from one. Matrices are stored
//! with `|det| = 1`; products are renormalized so long words do not drift.

mod context;
mod word;

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

pub use context::GroupContext;
pub use word::HeckeWord;

/// Below this magnitude a denominator `cx + d` (or the entry `c`) is a pole.
pub const POLE_TOL: f64 = 1e-12;
/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance of the group-relation suite.
pub const IDENTITY_TOL: f64 = 1e-10;

/// A point of `R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }

    /// Equality up to `tol`; the point at infinity only equals itself.
    pub fn approx_eq(self, other: ExtendedReal, tol: f64) -> bool {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() <= tol,
            (ExtendedReal::Infinity, ExtendedReal::Infinity) => true,
            _ => false,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            ExtendedReal::Finite(x)
        } else {
            ExtendedReal::Infinity
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Infinity => write!(f, "inf"),
        }
    }
}

/// A real matrix `(a b; c d)` taken up to sign, acting by `x -> (ax+b)/(cx+d)`.
///
/// The determinant is `+1` for elements of PSL(2,R). The only
/// orientation-reversing matrices (determinant `-1`) come from the original
/// Rosen map and are refused by the planar machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MoebiusMap {
    pub const IDENTITY: MoebiusMap = MoebiusMap {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds a matrix and rescales it so that `|det| = 1`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::DegenerateMatrix { det });
        }
        let s = det.abs().sqrt().recip();
        Ok(MoebiusMap {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    /// Entries known to have determinant one; computing `ad - bc` would
    /// cancel catastrophically for large entries.
    pub(crate) fn unimodular(a: f64, b: f64, c: f64, d: f64) -> Self {
        MoebiusMap { a, b, c, d }
    }

    /// `x -> x + t`.
    pub fn translation(t: f64) -> Self {
        MoebiusMap {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Counter-clockwise rotation of the hyperbolic plane by `angle` about `i`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        MoebiusMap {
            a: c,
            b: -s,
            c: s,
            d: c,
        }
    }

    /// The diagonal matrix `g_t = diag(e^{t/2}, e^{-t/2})` of the geodesic flow.
    pub fn geodesic_flow(t: f64) -> Self {
        let e = (t / 2.0).exp();
        MoebiusMap {
            a: e,
            b: 0.0,
            c: 0.0,
            d: e.recip(),
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.det() > 0.0
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        MoebiusMap {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        }
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.inverse() } else { *self };
        let mut e = e.unsigned_abs();
        let mut acc = MoebiusMap::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn negated(&self) -> Self {
        MoebiusMap {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Sign representative with `c > 0`, or `d > 0` when `|c| <= tol`.
    pub fn canonical(&self, tol: f64) -> Self {
        let flip = if self.c.abs() > tol {
            self.c < 0.0
        } else {
            self.d < 0.0
        };
        if flip {
            self.negated()
        } else {
            *self
        }
    }

    /// Largest entrywise gap between `self` and the nearer of `±other`.
    pub fn projective_distance(&self, other: &MoebiusMap) -> f64 {
        let gap = |m: &MoebiusMap| {
            self.entries()
                .iter()
                .zip(m.entries().iter())
                .fold(0.0_f64, |g, (x, y)| g.max((x - y).abs()))
        };
        gap(other).min(gap(&other.negated()))
    }

    /// Projective equality: entrywise agreement of `self` with `±other`.
    ///
    /// The tolerance is absolute for matrices with entries of size at most
    /// one and relative to the largest entry otherwise.
    pub fn projective_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        let scale = self
            .entries()
            .iter()
            .chain(other.entries().iter())
            .fold(1.0_f64, |m, v| m.max(v.abs()));
        let close = |m: &MoebiusMap| {
            self.entries()
                .iter()
                .zip(m.entries().iter())
                .all(|(x, y)| (x - y).abs() <= tol * scale)
        };
        close(other) || close(&other.negated())
    }

    /// The denominator `cx + d` of the action at `x`.
    pub fn denominator(&self, x: f64) -> f64 {
        self.c * x + self.d
    }

    /// Möbius action on the extended real line.
    pub fn act(&self, x: ExtendedReal) -> ExtendedReal {
        match x {
            ExtendedReal::Finite(x) => self.apply(x),
            ExtendedReal::Infinity => {
                if self.c.abs() <= POLE_TOL {
                    ExtendedReal::Infinity
                } else {
                    ExtendedReal::Finite(self.a / self.c)
                }
            }
        }
    }

    /// Möbius action on a finite real.
    pub fn apply(&self, x: f64) -> ExtendedReal {
        let den = self.denominator(x);
        if den.abs() <= POLE_TOL {
            ExtendedReal::Infinity
        } else {
            ExtendedReal::Finite((self.a * x + self.b) / den)
        }
    }

    /// Return time `-2 log|cx + d|`.
    pub fn tau(&self, x: f64) -> Result<f64> {
        let den = self.denominator(x);
        if den.abs() <= POLE_TOL {
            return Err(Error::Pole {
                x,
                denominator: den,
            });
        }
        Ok(-2.0 * den.abs().ln())
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, o: MoebiusMap) -> MoebiusMap {
        let a = self.a * o.a + self.b * o.c;
        let b = self.a * o.b + self.b * o.d;
        let c = self.c * o.a + self.d * o.c;
        let d = self.c * o.b + self.d * o.d;
        let det = (a * d - b * c).abs();
        if (det - 1.0).abs() > 1e-14 && det > 0.0 {
            let s = det.sqrt().recip();
            MoebiusMap {
                a: a * s,
                b: b * s,
                c: c * s,
                d: d * s,
            }
        } else {
            MoebiusMap { a, b, c, d }
        }
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// `M·x` on the extended real line.
pub fn act(m: &MoebiusMap, x: ExtendedReal) -> ExtendedReal {
    m.act(x)
}

/// `τ(M, x) = -2 log|cx + d|`.
pub fn tau(m: &MoebiusMap, x: f64) -> Result<f64> {
    m.tau(x)
}

pub fn projective_equal(m: &MoebiusMap, n: &MoebiusMap, tol: f64) -> bool {
    m.projective_eq(n, tol)
}
