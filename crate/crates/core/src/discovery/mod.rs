//! Orbit clouds, boundary-pole fitting and invariance checks of candidate domains.

mod invariance;
mod sampler;

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::maps::MapKind;
use crate::moebius::GroupContext;
use crate::output::{fmt_f64, CsvWriter};
use crate::planar::{planar_step, PlanarPoint};

pub use invariance::{preimages, verify_invariance, InvarianceReport, Preimages};
pub use sampler::DomainSampler;

/// Default number of discarded initial steps.
pub const DEFAULT_BURN_IN: usize = 100;

/// Extreme points of one x-bin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CloudBin {
    pub count: usize,
    /// Point of largest `y`.
    pub top: Option<PlanarPoint>,
    /// Point of smallest `y`.
    pub bottom: Option<PlanarPoint>,
}

#[derive(Debug, Clone)]
pub struct CloudReport {
    pub points: Vec<PlanarPoint>,
    /// Number of orbit aborts (each followed by a restart).
    pub escaped: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub bins: Vec<CloudBin>,
}

impl CloudReport {
    /// Bins `points` over `[x_lo, x_hi]` in `bins` equal cells.
    pub fn from_points(x_lo: f64, x_hi: f64, points: Vec<PlanarPoint>, bins: usize) -> Result<Self> {
        if bins == 0 || !(x_lo < x_hi) {
            return Err(Error::InvalidParameter("need at least one bin over a nonempty interval".into()));
        }
        let mut cells = vec![CloudBin::default(); bins];
        let width = (x_hi - x_lo) / bins as f64;
        for &p in &points {
            if !(p.x >= x_lo && p.x <= x_hi) {
                continue;
            }
            let i = (((p.x - x_lo) / width) as usize).min(bins - 1);
            let c = &mut cells[i];
            c.count += 1;
            if c.top.is_none_or(|t| p.y > t.y) {
                c.top = Some(p);
            }
            if c.bottom.is_none_or(|b| p.y < b.y) {
                c.bottom = Some(p);
            }
        }
        Ok(CloudReport {
            points,
            escaped: 0,
            x_lo,
            x_hi,
            bins: cells,
        })
    }

    pub fn bin_width(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.bins.len() as f64
    }

    /// Fewer than ten points per bin on average.
    pub fn insufficient(&self) -> bool {
        self.points.len() < 10 * self.bins.len()
    }

    /// CSV with columns `step,x,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<W> {
        let mut w = CsvWriter::new(out, &["step", "x", "y"])?;
        for (i, p) in self.points.iter().enumerate() {
            w.row(&[i.to_string(), fmt_f64(p.x), fmt_f64(p.y)])?;
        }
        Ok(w.into_inner())
    }
}

/// Runs the planar orbit of `map` from `p0`, drops `burn_in` points and bins
/// the next `n`. An aborted orbit restarts from its last point nudged in `x`.
pub fn simulate_cloud(
    ctx: &GroupContext,
    map: MapKind,
    p0: PlanarPoint,
    n: usize,
    bins: usize,
    burn_in: usize,
) -> Result<CloudReport> {
    if !map.is_orientation_preserving() {
        return Err(Error::OrientationReversing);
    }
    let (lo, hi) = map.interval(ctx);
    let mut points = Vec::with_capacity(n);
    let mut escaped = 0;
    let mut p = p0;
    let mut i = 0;
    while points.len() < n {
        match planar_step(ctx, map, p) {
            Ok(q) => {
                p = q;
                i += 1;
                if i > burn_in {
                    points.push(p);
                }
            }
            Err(_) => {
                escaped += 1;
                if escaped > n.max(1000) {
                    break;
                }
                let nudge = 1e-7 * (1.0 + escaped as f64).sqrt();
                let x = if p.x + nudge < hi { p.x + nudge } else { p.x - nudge };
                p = PlanarPoint::new(x.clamp(lo, hi), p.y);
            }
        }
    }
    let mut report = CloudReport::from_points(lo, hi, points, bins)?;
    report.escaped = escaped;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Tightest curve `y = 1/(x - δ)` that keeps every bin extreme on the domain side.
    Envelope,
    /// Mean of `x - 1/y`, i.e. regression of `1/y` on `x` with unit slope.
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFit {
    pub delta: f64,
    /// Largest `|y - 1/(x - δ̂)|` over the points used.
    pub residual: f64,
    pub bins_used: usize,
}

/// Fits the pole of the boundary piece over `window` from the bin extremes.
pub fn fit_boundary_delta(
    report: &CloudReport,
    window: (f64, f64),
    side: Side,
    method: FitMethod,
) -> Result<BoundaryFit> {
    let (a, b) = window;
    let pts: Vec<PlanarPoint> = report
        .bins
        .iter()
        .filter_map(|bin| match side {
            Side::Upper => bin.top,
            Side::Lower => bin.bottom,
        })
        .filter(|p| p.x >= a && p.x < b)
        .filter(|p| match side {
            Side::Upper => p.y > 0.0,
            Side::Lower => p.y < 0.0,
        })
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} usable bins in [{a}, {b})",
            pts.len()
        )));
    }
    let deltas = pts.iter().map(|p| p.x - 1.0 / p.y);
    let delta = match (method, side) {
        (FitMethod::Envelope, Side::Upper) => deltas.fold(f64::NEG_INFINITY, f64::max),
        (FitMethod::Envelope, Side::Lower) => deltas.fold(f64::INFINITY, f64::min),
        (FitMethod::LeastSquares, _) => deltas.sum::<f64>() / pts.len() as f64,
    };
    let residual = pts
        .iter()
        .map(|p| (p.y - 1.0 / (p.x - delta)).abs())
        .fold(0.0, f64::max);
    Ok(BoundaryFit {
        delta,
        residual,
        bins_used: pts.len(),
    })
}
