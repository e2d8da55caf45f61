//! Natural-extension domains bounded by pieces of hyperbolas `y = 1/(x - δ)`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::maps::MapKind;
use crate::moebius::{ExtendedReal, GroupContext, DEFAULT_TOL};
use crate::planar::PlanarPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `ℰ`, for the symmetric Rosen map.
    E,
    /// `Ω_a`, for the additive Veech map (infinite area).
    OmegaAdd,
    /// `Ω_v`, for the multiplicative Veech map.
    OmegaVeech,
    /// `Ω_r`, for the doubled conjugated Rosen map.
    OmegaR,
    /// `Ω̄ = Ω_v ∩ Ω_r`.
    OmegaBar,
}

impl DomainKind {
    pub const ALL: [DomainKind; 5] = [
        DomainKind::E,
        DomainKind::OmegaAdd,
        DomainKind::OmegaVeech,
        DomainKind::OmegaR,
        DomainKind::OmegaBar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::E => "E",
            DomainKind::OmegaAdd => "omega_a",
            DomainKind::OmegaVeech => "omega_v",
            DomainKind::OmegaR => "omega_r",
            DomainKind::OmegaBar => "omega_bar",
        }
    }

    /// The map whose planar extension lives on this domain.
    pub fn natural_map(self) -> Option<MapKind> {
        match self {
            DomainKind::E => Some(MapKind::RosenSym),
            DomainKind::OmegaAdd => Some(MapKind::VeechAdditive),
            DomainKind::OmegaVeech => Some(MapKind::VeechMultiplicative),
            DomainKind::OmegaR => Some(MapKind::DoubledRosen),
            DomainKind::OmegaBar => None,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DomainKind::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown domain '{s}'")))
    }
}

/// The curve `y = 1/(x - δ)` over `[x_lo, x_hi)`; `δ = ∞` is `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaArc {
    pub x_lo: f64,
    pub x_hi: f64,
    pub delta: ExtendedReal,
}

impl HyperbolaArc {
    pub fn new(x_lo: f64, x_hi: f64, delta: f64) -> Self {
        HyperbolaArc {
            x_lo,
            x_hi,
            delta: ExtendedReal::Finite(delta),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.delta {
            ExtendedReal::Finite(d) => 1.0 / (x - d),
            ExtendedReal::Infinity => 0.0,
        }
    }

    /// Image under `(x, y) ↦ (-x, -y)`.
    pub fn mirrored(&self) -> Self {
        HyperbolaArc {
            x_lo: -self.x_hi,
            x_hi: -self.x_lo,
            delta: match self.delta {
                ExtendedReal::Finite(d) => ExtendedReal::Finite(-d),
                ExtendedReal::Infinity => ExtendedReal::Infinity,
            },
        }
    }

    /// `∫ 1/(x - δ) dx` over `[a, b] ⊆ [x_lo, x_hi]`.
    fn integral(&self, a: f64, b: f64) -> Result<f64> {
        match self.delta {
            ExtendedReal::Infinity => Ok(0.0),
            ExtendedReal::Finite(d) => {
                if (a - d).abs() <= DEFAULT_TOL || (b - d).abs() <= DEFAULT_TOL {
                    return Err(Error::InfiniteArea(format!(
                        "pole {d} at the end of [{a}, {b}]"
                    )));
                }
                Ok((b - d).abs().ln() - (a - d).abs().ln())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    pub q: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub upper: Vec<HyperbolaArc>,
    pub lower: Vec<HyperbolaArc>,
    /// The lower arcs are the central mirror image of the upper ones.
    pub symmetric: bool,
}

fn symmetric(kind: DomainKind, ctx: &GroupContext, lo: f64, hi: f64, upper: Vec<HyperbolaArc>) -> Domain {
    let mut lower: Vec<HyperbolaArc> = upper.iter().rev().map(HyperbolaArc::mirrored).collect();
    // Mirroring recomputes the breakpoints; pin the shared ends exactly.
    if let Some(first) = lower.first_mut() {
        first.x_lo = lo;
    }
    if let Some(last) = lower.last_mut() {
        last.x_hi = hi;
    }
    Domain {
        kind,
        q: ctx.q,
        x_lo: lo,
        x_hi: hi,
        upper,
        lower,
        symmetric: true,
    }
}

/// Builds the domain `which` for the group of `ctx`.
pub fn build_domain(ctx: &GroupContext, which: DomainKind) -> Result<Domain> {
    let h = ctx.mu / 2.0;
    let d = match which {
        DomainKind::E => {
            let n = ctx.n as usize;
            let mut upper: Vec<HyperbolaArc> = (0..n - 1)
                .map(|j| HyperbolaArc::new(ctx.phi(j), ctx.phi(j + 1), ctx.delta(j)))
                .collect();
            upper.push(HyperbolaArc::new(0.0, ctx.lambda / 2.0, -1.0));
            symmetric(which, ctx, -ctx.lambda / 2.0, ctx.lambda / 2.0, upper)
        }
        DomainKind::OmegaAdd => {
            symmetric(which, ctx, -h, h, vec![HyperbolaArc::new(-h, h, -h)])
        }
        DomainKind::OmegaVeech => symmetric(
            which,
            ctx,
            -h,
            h,
            vec![
                HyperbolaArc::new(-h, -ctx.alpha, -ctx.gamma),
                HyperbolaArc::new(-ctx.alpha, h, -h),
            ],
        ),
        DomainKind::OmegaR => {
            let n = i64::from(ctx.n);
            let tan = |j: i64| (j as f64 * ctx.theta).tan();
            let mut upper = vec![HyperbolaArc::new(-h, tan(1), -ctx.q1)];
            for j in 1..=n - 2 {
                let hi = if j == n - 2 { h } else { tan(j + 1) };
                upper.push(HyperbolaArc::new(tan(j), hi, -ctx.u_power_q1(j)));
            }
            symmetric(which, ctx, -h, h, upper)
        }
        DomainKind::OmegaBar => {
            if ctx.q < 8 {
                return Err(Error::UnsupportedQ {
                    q: ctx.q,
                    what: "the intersection domain needs q >= 8",
                });
            }
            let t = 2.0 / ctx.mu;
            symmetric(
                which,
                ctx,
                -h,
                h,
                vec![HyperbolaArc::new(-h, t, -ctx.q1), HyperbolaArc::new(t, h, -h)],
            )
        }
    };
    Ok(d)
}

fn arc_at(arcs: &[HyperbolaArc], x: f64) -> &HyperbolaArc {
    let i = arcs.partition_point(|a| a.x_hi <= x);
    &arcs[i.min(arcs.len() - 1)]
}

impl Domain {
    pub fn upper_at(&self, x: f64) -> f64 {
        arc_at(&self.upper, x).eval(x)
    }

    pub fn lower_at(&self, x: f64) -> f64 {
        arc_at(&self.lower, x).eval(x)
    }

    /// Classifies `p`; points within `tol` of a boundary curve, a vertical
    /// edge or a vertical jump of a boundary count as [`Membership::Boundary`].
    pub fn contains(&self, p: PlanarPoint, tol: f64) -> Membership {
        let PlanarPoint { x, y } = p;
        if !(x.is_finite() && y.is_finite()) || x < self.x_lo - tol || x > self.x_hi + tol {
            return Membership::Outside;
        }
        let xs = [
            (x - tol).max(self.x_lo),
            x.clamp(self.x_lo, self.x_hi),
            (x + tol).min(self.x_hi),
        ];
        let (mut up_min, mut up_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_min, mut lo_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &xx in &xs {
            let u = self.upper_at(xx);
            let l = self.lower_at(xx);
            up_min = up_min.min(u);
            up_max = up_max.max(u);
            lo_min = lo_min.min(l);
            lo_max = lo_max.max(l);
        }
        if y > up_max + tol || y < lo_min - tol {
            return Membership::Outside;
        }
        let on_edge = x < self.x_lo + tol || x > self.x_hi - tol;
        if !on_edge && y > lo_max + tol && y < up_min - tol {
            Membership::Inside
        } else {
            Membership::Boundary
        }
    }

    /// Breakpoints of both boundaries, merged.
    fn breakpoints(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .upper
            .iter()
            .chain(self.lower.iter())
            .flat_map(|a| [a.x_lo, a.x_hi])
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        xs
    }

    /// Exact area from log differences of the boundary arcs.
    pub fn area_analytic(&self) -> Result<f64> {
        let xs = self.breakpoints();
        let mut area = 0.0;
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            area += arc_at(&self.upper, mid).integral(a, b)?;
            area -= arc_at(&self.lower, mid).integral(a, b)?;
        }
        Ok(area)
    }

    /// Largest `|y|` of the upper or lower boundary over `[a, b]`.
    pub fn y_range(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut probe = |x: f64| {
            hi = hi.max(self.upper_at(x));
            lo = lo.min(self.lower_at(x));
        };
        probe(a);
        probe(b);
        // Each arc is monotone, so interior extremes sit at arc ends.
        for arc in self.upper.iter().chain(self.lower.iter()) {
            for x in [arc.x_lo, arc.x_hi - 1e-15 * arc.x_hi.abs().max(1.0)] {
                if x > a && x < b {
                    probe(x);
                }
            }
        }
        (lo, hi)
    }

    /// Checks tiling, the no-interior-pole rule and `lower < upper` on a grid.
    pub fn validate(&self) -> Result<()> {
        for (name, arcs) in [("upper", &self.upper), ("lower", &self.lower)] {
            let bad = |msg: String| Error::InvalidParameter(format!("{} {name}: {msg}", self.kind));
            if arcs.is_empty() {
                return Err(bad("no arcs".into()));
            }
            if (arcs[0].x_lo - self.x_lo).abs() > 1e-12
                || (arcs[arcs.len() - 1].x_hi - self.x_hi).abs() > 1e-12
            {
                return Err(bad("arcs do not cover the x-interval".into()));
            }
            for w in arcs.windows(2) {
                if (w[0].x_hi - w[1].x_lo).abs() > 1e-12 {
                    return Err(bad(format!("gap at {}", w[0].x_hi)));
                }
            }
            for a in arcs.iter() {
                if a.x_lo >= a.x_hi {
                    return Err(bad(format!("empty arc [{}, {})", a.x_lo, a.x_hi)));
                }
                if let ExtendedReal::Finite(d) = a.delta {
                    if d > a.x_lo && d < a.x_hi {
                        return Err(bad(format!("pole {d} inside [{}, {})", a.x_lo, a.x_hi)));
                    }
                }
            }
        }
        let n = 10_000;
        for i in 1..n {
            let x = self.x_lo + (self.x_hi - self.x_lo) * f64::from(i) / f64::from(n);
            if !(self.lower_at(x) < self.upper_at(x)) {
                return Err(Error::InvalidParameter(format!(
                    "{}: boundaries cross at x = {x}",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    /// Plain-text arc list: `x_lo,x_hi,delta` per line under `# upper` / `# lower`.
    pub fn to_arc_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# domain {} q={}", self.kind, self.q);
        for (name, arcs) in [("upper", &self.upper), ("lower", &self.lower)] {
            let _ = writeln!(s, "# {name}");
            for a in arcs {
                let d = match a.delta {
                    ExtendedReal::Finite(d) => crate::output::fmt_f64(d),
                    ExtendedReal::Infinity => "inf".to_string(),
                };
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    crate::output::fmt_f64(a.x_lo),
                    crate::output::fmt_f64(a.x_hi),
                    d
                );
            }
        }
        s
    }

    /// Parses the output of [`Domain::to_arc_list`].
    pub fn from_arc_list(text: &str) -> Result<Domain> {
        let bad = |m: &str| Error::InvalidParameter(format!("arc list: {m}"));
        let mut kind = None;
        let mut q = 0;
        let mut section = None;
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(head) = rest.strip_prefix("domain") {
                    let mut parts = head.split_whitespace();
                    kind = Some(parts.next().ok_or_else(|| bad("missing name"))?.parse()?);
                    q = parts
                        .next()
                        .and_then(|t| t.strip_prefix("q="))
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("missing q"))?;
                } else {
                    section = Some(rest.to_string());
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad(line));
            }
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(t));
            let delta = if f[2].trim() == "inf" {
                ExtendedReal::Infinity
            } else {
                ExtendedReal::Finite(num(f[2])?)
            };
            let arc = HyperbolaArc {
                x_lo: num(f[0])?,
                x_hi: num(f[1])?,
                delta,
            };
            match section.as_deref() {
                Some("upper") => upper.push(arc),
                Some("lower") => lower.push(arc),
                _ => return Err(bad("arc outside a section")),
            }
        }
        let kind = kind.ok_or_else(|| bad("missing header"))?;
        if upper.is_empty() || lower.is_empty() {
            return Err(bad("missing arcs"));
        }
        let symmetric = upper.len() == lower.len()
            && upper
                .iter()
                .rev()
                .zip(lower.iter())
                .all(|(u, l)| u.mirrored().delta == l.delta);
        Ok(Domain {
            kind,
            q,
            x_lo: upper[0].x_lo,
            x_hi: upper[upper.len() - 1].x_hi,
            upper,
            lower,
            symmetric,
        })
    }
}

/// The closed-form areas: `c_v = 2 log(8cos²(π/q))`, `c_r = 2 log cot(π/2q)`
/// and the printed intersection area `2 log(cos(π/q)(1 + cos(π/q)))`.
pub fn area_closed_form(ctx: &GroupContext, which: DomainKind) -> Result<f64> {
    let c = ctx.theta.cos();
    match which {
        DomainKind::OmegaVeech => Ok(2.0 * (8.0 * c * c).ln()),
        DomainKind::OmegaR => Ok(2.0 * (1.0 / (ctx.theta / 2.0).tan()).ln()),
        DomainKind::OmegaBar => {
            if ctx.q < 8 {
                return Err(Error::UnsupportedQ {
                    q: ctx.q,
                    what: "the intersection domain needs q >= 8",
                });
            }
            Ok(2.0 * (c * (1.0 + c)).ln())
        }
        DomainKind::OmegaAdd => Err(Error::InfiniteArea("omega_a".into())),
        DomainKind::E => Err(Error::NoClosedForm("E".into())),
    }
}
