//! Forward and backward invariance of a domain under a planar extension.
//!
//! Backward images are found branch family by branch family. Within a family
//! the inverse branch `M_m⁻¹` has bottom row `(c'(m), d'(m))` affine in the
//! integer `m`, so the preimage height `y' = w²y - c'w` with `w = c'x + d'`
//! is quadratic in `m`. Solving `y_min <= y'(m) <= y_max` leaves a handful of
//! integers, each confirmed by running the forward map.

use std::collections::HashMap;

use super::sampler::DomainSampler;
use crate::domains::{Domain, DomainKind, Membership};
use crate::error::{Error, Result};
use crate::exec::{batch_rng, batch_sizes, map_batches, Execution};
use crate::maps::{self, Digit, MapKind};
use crate::moebius::{GroupContext, MoebiusMap};
use crate::planar::{planar_apply, planar_step, PlanarPoint};

/// Sampler bins used by [`verify_invariance`].
const SAMPLER_BINS: usize = 1024;
/// `|y|` cut applied to infinite-area domains before sampling.
pub const INFINITE_DOMAIN_Y_CAP: f64 = 50.0;
/// Integer candidates allowed per family before giving up on a point.
const MAX_CANDIDATES: usize = 20_000;
/// Grid cell of the collision scan.
const HASH_CELL: f64 = 1e-9;

/// Preimage y-windows of one family, each with an optional explicit list of `m`.
type YWindows = Vec<((f64, f64), Option<Vec<i64>>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub domain: DomainKind,
    pub map: MapKind,
    pub q: u32,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    /// Samples within `tol` of the boundary, or whose image or a preimage is.
    pub shell: usize,
    /// Samples where the forward step itself aborted (pole or discontinuity).
    pub step_errors: usize,
    pub forward_escapes: usize,
    pub backward_escapes: usize,
    /// Samples with two or more distinct preimages inside the domain.
    pub multiple_preimages: usize,
    /// Grid cells hit by forward images from distinct branches.
    pub collisions: usize,
    /// Samples whose preimage search exceeded its candidate budget.
    pub unresolved: usize,
}

impl InvarianceReport {
    pub fn forward_escape_fraction(&self) -> f64 {
        self.forward_escapes as f64 / self.samples.max(1) as f64
    }

    pub fn backward_escape_fraction(&self) -> f64 {
        self.backward_escapes as f64 / self.samples.max(1) as f64
    }

    pub fn injectivity_violations(&self) -> usize {
        self.multiple_preimages + self.collisions
    }

    fn merge(&mut self, o: &InvarianceReport) {
        self.samples += o.samples;
        self.shell += o.shell;
        self.step_errors += o.step_errors;
        self.forward_escapes += o.forward_escapes;
        self.backward_escapes += o.backward_escapes;
        self.multiple_preimages += o.multiple_preimages;
        self.unresolved += o.unresolved;
    }
}

/// One family of inverse branches indexed by an integer.
#[derive(Debug, Clone, Copy)]
enum Family {
    /// `(S^{-a}T)⁻¹`, `a ≠ 0`.
    RosenSym,
    /// `(P^k R^j)⁻¹`, `k ≠ 0`.
    VeechAdd { j: u32 },
    /// `(PR⁻¹)^{-ℓ}`, `ℓ ≥ 1`.
    ParabolicRight,
    /// `(P⁻¹R)^{-ℓ}`, `ℓ ≥ 1`.
    ParabolicLeft,
    /// `(P^p U^{-1})⁻¹ = U P^{-p}`.
    ConjPositive,
    /// `(P^p U)⁻¹ = U⁻¹ P^{-p}`.
    ConjNegative,
}

impl Family {
    fn allows(self, m: i64) -> bool {
        match self {
            Family::RosenSym | Family::VeechAdd { .. } => m != 0,
            Family::ParabolicRight | Family::ParabolicLeft => m >= 1,
            Family::ConjPositive | Family::ConjNegative => true,
        }
    }

    fn inverse(self, ctx: &GroupContext, m: i64) -> MoebiusMap {
        match self {
            Family::RosenSym => (ctx.s_power(-m) * ctx.t).inverse(),
            Family::VeechAdd { j } => ctx.r_power(-i64::from(j)) * ctx.p_power(-m),
            Family::ParabolicRight => ctx.parabolic_right(-m),
            Family::ParabolicLeft => ctx.parabolic_left(-m),
            Family::ConjPositive => ctx.u * ctx.p_power(-m),
            Family::ConjNegative => ctx.u.inverse() * ctx.p_power(-m),
        }
    }

    /// `(c0, c1, w0, w1)` with `c'(m) = c0 + c1·m` and `w(m) = w0 + w1·m` at `x`.
    fn affine(self, ctx: &GroupContext, x: f64) -> (f64, f64, f64, f64) {
        let (s, c) = ctx.theta.sin_cos();
        match self {
            Family::RosenSym => (-1.0, 0.0, -x, -ctx.lambda),
            Family::VeechAdd { j } => {
                let (sj, cj) = (2.0 * f64::from(j) * ctx.theta).sin_cos();
                (-sj, 0.0, -sj * x + cj, ctx.mu * sj)
            }
            Family::ParabolicRight => {
                let sig = ctx.parabolic_sigma();
                (0.0, -sig, 1.0, sig * (ctx.mu / 2.0 - x))
            }
            Family::ParabolicLeft => {
                let sig = ctx.parabolic_sigma();
                (0.0, sig, 1.0, sig * (ctx.mu / 2.0 + x))
            }
            Family::ConjPositive => (s, 0.0, s * x + c, -s * ctx.mu),
            Family::ConjNegative => (-s, 0.0, -s * x + c, s * ctx.mu),
        }
    }
}

fn families(ctx: &GroupContext, map: MapKind) -> Result<Vec<Family>> {
    let adds = (1..ctx.n).map(|j| Family::VeechAdd { j });
    Ok(match map {
        MapKind::RosenSym => vec![Family::RosenSym],
        MapKind::VeechAdditive => adds.collect(),
        MapKind::VeechMultiplicative => [Family::ParabolicRight, Family::ParabolicLeft]
            .into_iter()
            .chain(adds)
            .collect(),
        MapKind::ConjRosen | MapKind::DoubledRosen => {
            vec![Family::ConjPositive, Family::ConjNegative]
        }
        MapKind::RosenOriginal => return Err(Error::OrientationReversing),
    })
}

/// Real intervals where `a·m² + b·m + c <= 0`.
fn quadratic_nonpositive(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    const INF: f64 = f64::INFINITY;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return if c <= 0.0 { vec![(-INF, INF)] } else { vec![] };
        }
        let r = -c / b;
        return if b > 0.0 { vec![(-INF, r)] } else { vec![(r, INF)] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return if a < 0.0 { vec![(-INF, INF)] } else { vec![] };
    }
    let sq = disc.sqrt();
    // Stable root pair.
    let t = -0.5 * (b + sq.copysign(b));
    let (mut r1, mut r2) = if t != 0.0 { (t / a, c / t) } else { (0.0, 0.0) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if a > 0.0 {
        vec![(r1, r2)]
    } else {
        vec![(-INF, r1), (r2, INF)]
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// Integers `m` (with a one-step margin) where `y_lo <= y'(m) <= y_hi`;
/// `None` when the window is unbounded or too wide.
fn candidates(
    ctx: &GroupContext,
    fam: Family,
    p: PlanarPoint,
    (y_lo, y_hi): (f64, f64),
) -> Option<Vec<i64>> {
    let (c0, c1, w0, w1) = fam.affine(ctx, p.x);
    let y = p.y;
    let a = y * w1 * w1 - c1 * w1;
    let b = 2.0 * y * w0 * w1 - (c0 * w1 + c1 * w0);
    let c = y * w0 * w0 - c0 * w0;
    let below_hi = quadratic_nonpositive(a, b, c - y_hi);
    let above_lo = quadratic_nonpositive(-a, -b, y_lo - c);
    let mut ms = Vec::new();
    for (lo, hi) in intersect(&below_hi, &above_lo) {
        let (lo, hi) = (lo.floor() - 1.0, hi.ceil() + 1.0);
        if !(lo.is_finite() && hi.is_finite()) || hi - lo > MAX_CANDIDATES as f64 {
            return None;
        }
        if lo.abs() > 1e15 || hi.abs() > 1e15 {
            continue;
        }
        ms.extend((lo as i64..=hi as i64).filter(|&m| fam.allows(m)));
    }
    Some(ms)
}

fn same_point(a: PlanarPoint, b: PlanarPoint, rel: f64) -> bool {
    (a.x - b.x).abs() <= rel * (1.0 + a.x.abs()) && (a.y - b.y).abs() <= rel * (1.0 + a.y.abs())
}

/// Outcome of the preimage search for one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Preimages {
    pub inside: Vec<PlanarPoint>,
    pub boundary: Vec<PlanarPoint>,
    /// The search ran out of budget; the lists may be incomplete.
    pub unresolved: bool,
}

/// Whether `(PR⁻¹)^ℓ` (or its mirror) is the branch taken at `pre`, read off
/// the image side: the last point before `x` is still in the run and `x` is not.
/// Near the parabolic fixed point this is far better conditioned than
/// recomputing `ℓ` at `pre`.
fn parabolic_run_ok(ctx: &GroupContext, fam: Family, x: f64, pre: f64) -> bool {
    let sign = if matches!(fam, Family::ParabolicRight) { 1.0 } else { -1.0 };
    let (a, h) = (ctx.alpha, ctx.mu / 2.0);
    let in_run = |t: f64| sign * t > a && sign * t <= h;
    let prev = fam.inverse(ctx, 1).apply(x).finite();
    in_run(pre) && prev.is_some_and(in_run) && !in_run(x)
}

/// Preimages under one level of `fams`. A candidate counts when `branch`, the
/// forward branch matrix at its `x`, is the inverse of the one that produced it.
/// Comparing matrices rather than images avoids the `w²` error amplification of
/// deep branches.
fn one_level<F>(
    ctx: &GroupContext,
    fams: &[Family],
    p: PlanarPoint,
    x_range: (f64, f64),
    y_bounds: &dyn Fn(Family) -> YWindows,
    branch: F,
    out: &mut Vec<PlanarPoint>,
) -> bool
where
    F: Fn(f64) -> Option<MoebiusMap>,
{
    let mut complete = true;
    for &fam in fams {
        for (bounds, explicit) in y_bounds(fam) {
            let ms = match explicit {
                Some(ms) => ms,
                None => match candidates(ctx, fam, p, bounds) {
                    Some(ms) => ms,
                    None => {
                        complete = false;
                        continue;
                    }
                },
            };
            for m in ms {
                let inv = fam.inverse(ctx, m);
                let Ok(pre) = planar_apply(&inv, p) else {
                    continue;
                };
                if !(pre.x >= x_range.0 - 1e-9 && pre.x <= x_range.1 + 1e-9) {
                    continue;
                }
                if pre.y < bounds.0 - 1e-6 * (1.0 + bounds.0.abs())
                    || pre.y > bounds.1 + 1e-6 * (1.0 + bounds.1.abs())
                {
                    continue;
                }
                let valid = match fam {
                    Family::ParabolicRight | Family::ParabolicLeft => parabolic_run_ok(ctx, fam, p.x, pre.x),
                    _ => branch(pre.x).is_some_and(|f| f.projective_eq(&inv.inverse(), 1e-9)),
                };
                if valid && !out.iter().any(|&o| same_point(o, pre, 1e-12)) {
                    out.push(pre);
                }
            }
        }
    }
    complete
}

/// All preimages of `p` under the planar extension of `map` lying in `d`.
pub fn preimages(ctx: &GroupContext, d: &Domain, map: MapKind, p: PlanarPoint, tol: f64) -> Result<Preimages> {
    let fams = families(ctx, map)?;
    let (y_lo, y_hi) = d.y_range(d.x_lo, d.x_hi);
    let bounded = y_lo.is_finite() && y_hi.is_finite();
    let h = ctx.mu / 2.0;
    let x_range = (d.x_lo, d.x_hi);

    // Finite domains use their global height; on an unbounded domain only the
    // additive families are handled, with k = ±1 listed explicitly and
    // |k| >= 2 confined to x' between R^{-j}(3μ/2) and R^{-j}(-3μ/2).
    let bounds_for = |fam: Family| -> YWindows {
        if bounded {
            return vec![((y_lo, y_hi), None)];
        }
        match fam {
            Family::VeechAdd { j } => {
                let rj = ctx.r_power(-i64::from(j));
                let a = rj.apply(3.0 * h).finite().unwrap_or(d.x_lo);
                let b = rj.apply(-3.0 * h).finite().unwrap_or(d.x_hi);
                let (lo, hi) = d.y_range(a.min(b).max(d.x_lo), a.max(b).min(d.x_hi));
                vec![
                    ((f64::NEG_INFINITY, f64::INFINITY), Some(vec![-1, 1])),
                    ((lo, hi), None),
                ]
            }
            _ => vec![],
        }
    };

    let mut found = Vec::new();
    let complete = if map == MapKind::DoubledRosen {
        let (s, _) = ctx.theta.sin_cos();
        let (i_lo, i_hi) = ctx.interval_i();
        let mid_bounds = |_: Family| vec![((y_lo - s, y_hi + s), None)];
        let mut mids = Vec::new();
        let k_branch = |x: f64| maps::step(ctx, MapKind::ConjRosen, x).ok().map(|s| s.matrix);
        let mut complete = bounded
            && one_level(ctx, &fams, p, (i_lo, i_hi), &mid_bounds, k_branch, &mut mids);
        for mid in mids {
            complete &= one_level(ctx, &fams, mid, x_range, &bounds_for, k_branch, &mut found);
        }
        complete
    } else {
        let branch = |x: f64| maps::step(ctx, map, x).ok().map(|s| s.matrix);
        one_level(ctx, &fams, p, x_range, &bounds_for, branch, &mut found)
    };

    let mut out = Preimages {
        unresolved: !complete,
        ..Preimages::default()
    };
    for pre in found {
        match d.contains(pre, tol) {
            Membership::Inside => out.inside.push(pre),
            Membership::Boundary => out.boundary.push(pre),
            Membership::Outside => {}
        }
    }
    Ok(out)
}

fn digit_key(map: MapKind, ctx: &GroupContext, p: PlanarPoint) -> Option<Digit> {
    maps::step(ctx, map, p.x).ok().map(|s| s.digit)
}

/// Samples `samples` uniform points of `d` and checks that the planar
/// extension of `map` sends `d` into itself, that every point has a preimage
/// in `d`, and that no point has two.
///
/// Infinite-area domains are cut to `|y| <= INFINITE_DOMAIN_Y_CAP` for sampling.
pub fn verify_invariance(
    ctx: &GroupContext,
    d: &Domain,
    map: MapKind,
    samples: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<InvarianceReport> {
    families(ctx, map)?;
    let cap = match d.area_analytic() {
        Ok(_) => None,
        Err(Error::InfiniteArea(_)) => Some(INFINITE_DOMAIN_Y_CAP),
        Err(e) => return Err(e),
    };
    let sampler = DomainSampler::new(d, SAMPLER_BINS, cap)?;
    let empty = InvarianceReport {
        domain: d.kind,
        map,
        q: ctx.q,
        seed,
        tol,
        samples: 0,
        shell: 0,
        step_errors: 0,
        forward_escapes: 0,
        backward_escapes: 0,
        multiple_preimages: 0,
        collisions: 0,
        unresolved: 0,
    };
    let sizes = batch_sizes(samples);
    let parts = map_batches(exec, sizes.len(), |b| {
        let mut rng = batch_rng(seed, b);
        let mut rep = empty.clone();
        let mut cells: Vec<((i64, i64), Digit)> = Vec::new();
        for _ in 0..sizes[b] {
            let p = sampler.sample(&mut rng);
            rep.samples += 1;
            if d.contains(p, tol) != Membership::Inside {
                rep.shell += 1;
                continue;
            }
            let mut in_shell = false;
            match planar_step(ctx, map, p) {
                Err(_) => rep.step_errors += 1,
                Ok(img) => {
                    match d.contains(img, tol) {
                        Membership::Outside => rep.forward_escapes += 1,
                        Membership::Boundary => in_shell = true,
                        Membership::Inside => {}
                    }
                    if let Some(dg) = digit_key(map, ctx, p) {
                        let cell = ((img.x / HASH_CELL).floor() as i64, (img.y / HASH_CELL).floor() as i64);
                        cells.push((cell, dg));
                    }
                }
            }
            let pre = preimages(ctx, d, map, p, tol).expect("families checked above");
            if pre.unresolved {
                rep.unresolved += 1;
            }
            if pre.inside.len() >= 2 {
                rep.multiple_preimages += 1;
            } else if pre.inside.is_empty() {
                if pre.boundary.is_empty() && !pre.unresolved && !in_shell {
                    rep.backward_escapes += 1;
                } else {
                    in_shell = true;
                }
            }
            if in_shell {
                rep.shell += 1;
            }
        }
        (rep, cells)
    });
    let mut report = empty;
    let mut seen: HashMap<(i64, i64), Digit> = HashMap::new();
    for (rep, cells) in parts {
        report.merge(&rep);
        for (cell, dg) in cells {
            match seen.get(&cell) {
                Some(&other) if other != dg => report.collisions += 1,
                Some(_) => {}
                None => {
                    seen.insert(cell, dg);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::build_domain;

    #[test]
    fn quadratic_windows() {
        // m² - 1 <= 0 on [-1, 1].
        let w = quadratic_nonpositive(1.0, 0.0, -1.0);
        assert_eq!(w.len(), 1);
        assert!((w[0].0 + 1.0).abs() < 1e-15 && (w[0].1 - 1.0).abs() < 1e-15);
        // -(m² - 1) <= 0 outside (-1, 1).
        let w = quadratic_nonpositive(-1.0, 0.0, 1.0);
        assert_eq!(w.len(), 2);
        assert!(quadratic_nonpositive(1.0, 0.0, 1.0).is_empty());
        // Linear: 2m - 4 <= 0.
        assert_eq!(quadratic_nonpositive(0.0, 2.0, -4.0), vec![(f64::NEG_INFINITY, 2.0)]);
        // Roots 3 and 4 with a large linear term.
        let w = quadratic_nonpositive(1.0, -7.0, 12.0);
        assert!((w[0].0 - 3.0).abs() < 1e-12 && (w[0].1 - 4.0).abs() < 1e-12);
        let w = quadratic_nonpositive(1.0, 7.0, 12.0);
        assert!((w[0].0 + 4.0).abs() < 1e-12 && (w[0].1 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn family_rows_match_matrices() {
        let ctx = GroupContext::new(10).unwrap();
        let x = 0.37;
        for fam in [
            Family::RosenSym,
            Family::VeechAdd { j: 2 },
            Family::ParabolicRight,
            Family::ParabolicLeft,
            Family::ConjPositive,
            Family::ConjNegative,
        ] {
            let (c0, c1, w0, w1) = fam.affine(&ctx, x);
            for m in [1i64, 2, 5, -3] {
                if !fam.allows(m) {
                    continue;
                }
                let inv = fam.inverse(&ctx, m);
                let (c, w) = (c0 + c1 * m as f64, w0 + w1 * m as f64);
                let same = (inv.c() - c).abs() < 1e-9 && (inv.denominator(x) - w).abs() < 1e-9;
                let flipped = (inv.c() + c).abs() < 1e-9 && (inv.denominator(x) + w).abs() < 1e-9;
                assert!(same || flipped, "{fam:?} m={m}");
            }
        }
    }

    #[test]
    fn forward_images_have_their_source_as_preimage() {
        let ctx = GroupContext::new(8).unwrap();
        for (kind, map) in [
            (DomainKind::E, MapKind::RosenSym),
            (DomainKind::OmegaVeech, MapKind::VeechMultiplicative),
            (DomainKind::OmegaR, MapKind::DoubledRosen),
            (DomainKind::OmegaAdd, MapKind::VeechAdditive),
        ] {
            let d = build_domain(&ctx, kind).unwrap();
            let s = DomainSampler::new(&d, 128, Some(INFINITE_DOMAIN_Y_CAP)).unwrap();
            let mut rng = batch_rng(11, 0);
            let mut checked = 0;
            while checked < 300 {
                let p = s.sample(&mut rng);
                let Ok(img) = planar_step(&ctx, map, p) else { continue };
                if d.contains(img, 1e-9) != Membership::Inside {
                    continue;
                }
                let pre = preimages(&ctx, &d, map, img, 1e-9).unwrap();
                // Deep parabolic branches lose a few digits in y.
                let found = pre.inside.iter().any(|&q| {
                    (q.x - p.x).abs() < 1e-9 * (1.0 + p.x.abs()) && (q.y - p.y).abs() < 1e-4 * (1.0 + p.y.abs())
                });
                assert!(
                    found && pre.inside.len() == 1,
                    "{kind} {p:?} -> {img:?}: {pre:?}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn small_runs_are_clean() {
        let ctx = GroupContext::new(8).unwrap();
        for (kind, map) in [
            (DomainKind::E, MapKind::RosenSym),
            (DomainKind::OmegaVeech, MapKind::VeechMultiplicative),
        ] {
            let d = build_domain(&ctx, kind).unwrap();
            let r = verify_invariance(&ctx, &d, map, 5000, 1e-9, 5, Execution::default()).unwrap();
            assert_eq!(r.forward_escapes, 0, "{r:?}");
            assert_eq!(r.backward_escapes, 0, "{r:?}");
            assert_eq!(r.injectivity_violations(), 0, "{r:?}");
        }
    }

    #[test]
    fn wrong_map_escapes() {
        let ctx = GroupContext::new(8).unwrap();
        let d = build_domain(&ctx, DomainKind::OmegaVeech).unwrap();
        let r = verify_invariance(&ctx, &d, MapKind::DoubledRosen, 5000, 1e-9, 5, Execution::default())
            .unwrap();
        assert!(r.forward_escape_fraction() > 0.05, "{r:?}");
    }

    #[test]
    fn worker_count_does_not_matter() {
        let ctx = GroupContext::new(8).unwrap();
        let d = build_domain(&ctx, DomainKind::E).unwrap();
        let a = verify_invariance(&ctx, &d, MapKind::RosenSym, 9000, 1e-9, 2, Execution::Sequential).unwrap();
        let b = verify_invariance(&ctx, &d, MapKind::RosenSym, 9000, 1e-9, 2, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
