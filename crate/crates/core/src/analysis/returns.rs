use rand::Rng;

use crate::discovery::DomainSampler;
use crate::domains::{build_domain, Domain, DomainKind, Membership};
use crate::error::{Error, Result};
use crate::exec::{batch_rng, map_batches, Execution, BATCH};
use crate::maps::{self, MapKind};
use crate::moebius::{GroupContext, HeckeWord, DEFAULT_TOL};
use crate::planar::{planar_step, PlanarPoint};

/// Default iteration bound of return-time searches.
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Points agree when they differ by less than this in both coordinates.
pub const AGREEMENT_TOL: f64 = 1e-7;

/// Right end of the region `[R·μ/2, β)` where `r` and `v` use the same branch.
///
/// The value is not given explicitly; `β = α` is used, the point where the
/// `PR⁻¹` cylinder of `v` begins.
pub fn beta(ctx: &GroupContext) -> f64 {
    ctx.alpha
}

/// The positive halves of the one-step agreement region: `[R·μ/2, β)`
/// followed by `(RP⁻¹)^m([-μ/2, R·0))` for `m = 1..=depth`.
pub fn agreement_intervals(ctx: &GroupContext, depth: usize) -> Vec<(f64, f64)> {
    let h = ctx.mu / 2.0;
    let r = ctx.r_power(1);
    let r_mu = r.apply(h).finite().expect("R·μ/2 is finite");
    let r_zero = r.apply(0.0).finite().expect("R·0 is finite");
    let rp = r * ctx.p_power(-1);
    let mut out = vec![(r_mu, beta(ctx))];
    let mut m = rp;
    for _ in 0..depth {
        let a = m.apply(-h).finite().expect("finite endpoint");
        let b = m.apply(r_zero).finite().expect("finite endpoint");
        out.push((a.min(b), a.max(b)));
        m = m * rp;
    }
    out
}

/// The intersection domain and its membership tolerance.
fn omega_bar(ctx: &GroupContext) -> Result<Domain> {
    build_domain(ctx, DomainKind::OmegaBar)
}

#[derive(Debug, Clone)]
struct Return {
    point: PlanarPoint,
    steps: usize,
    /// Inverse of the product of the branch matrices used on the way.
    word: HeckeWord,
    /// Some iterate on the way landed in the boundary tolerance band.
    shell: bool,
}

/// First `n >= 1` with `Fⁿ(p)` inside `target`.
fn first_return(
    ctx: &GroupContext,
    target: &Domain,
    map: MapKind,
    p: PlanarPoint,
    max_iters: usize,
) -> Result<Return> {
    let mut q = p;
    let mut word = HeckeWord::identity(ctx.q);
    let mut shell = false;
    for n in 1..=max_iters {
        let digit = maps::step(ctx, map, q.x)?.digit;
        digit.mul_inverse_into(&mut word).ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no branch word", map.symbol()))
        })?;
        q = planar_step(ctx, map, q)?;
        match target.contains(q, DEFAULT_TOL) {
            Membership::Inside => {
                return Ok(Return {
                    point: q,
                    steps: n,
                    word,
                    shell,
                })
            }
            Membership::Boundary => shell = true,
            Membership::Outside => {}
        }
    }
    Err(Error::NoReturn { max_iters })
}

/// The induction index of `map` at `p` with respect to `Ω̄`.
pub fn induction_index(ctx: &GroupContext, map: MapKind, p: PlanarPoint, max_iters: usize) -> Result<usize> {
    let d = omega_bar(ctx)?;
    if d.contains(p, DEFAULT_TOL) != Membership::Inside {
        return Err(Error::InvalidParameter(format!(
            "({}, {}) is not inside omega_bar",
            p.x, p.y
        )));
    }
    first_return(ctx, &d, map, p, max_iters).map(|r| r.steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnRecord {
    pub start: PlanarPoint,
    /// First `𝒯_r`-return and its iterate count.
    pub r_return: std::result::Result<(PlanarPoint, usize), Error>,
    pub v_return: std::result::Result<(PlanarPoint, usize), Error>,
    /// The return points are within `AGREEMENT_TOL`, or the two returns use
    /// the same group element.
    pub agree: bool,
    /// Both returns apply the same element of the Hecke group, compared
    /// exactly as reduced words. Near the poles of deep branches the map
    /// expands by `10⁸` or more, and the points themselves cannot be computed
    /// to `AGREEMENT_TOL` in double precision.
    pub same_element: bool,
    /// The start or an intermediate iterate lies in the boundary tolerance band.
    pub shell: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub q: u32,
    pub beta: f64,
    pub tol: f64,
    pub records: Vec<ReturnRecord>,
}

impl ComparisonReport {
    pub fn agreement_rate(&self) -> f64 {
        let ok = self.records.iter().filter(|r| r.agree).count();
        ok as f64 / self.records.len().max(1) as f64
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &ReturnRecord> {
        self.records.iter().filter(|r| !r.agree)
    }
}

/// `n` uniform points of `Ω̄`.
pub fn random_starts(ctx: &GroupContext, n: usize, seed: u64) -> Result<Vec<PlanarPoint>> {
    let d = omega_bar(ctx)?;
    let s = DomainSampler::new(&d, 256, None)?;
    let mut rng = batch_rng(seed, 0);
    Ok((0..n).map(|_| s.sample(&mut rng)).collect())
}

/// Iterates `𝒯_r` and `𝒯_v` from every start until each re-enters `Ω̄` and
/// compares the two first returns.
pub fn compare_first_returns(
    ctx: &GroupContext,
    starts: &[PlanarPoint],
    max_iters: usize,
    exec: Execution,
) -> Result<ComparisonReport> {
    let d = omega_bar(ctx)?;
    if let Some(p) = starts.iter().find(|&&p| d.contains(p, DEFAULT_TOL) == Membership::Outside) {
        return Err(Error::InvalidParameter(format!(
            "start ({}, {}) is outside omega_bar",
            p.x, p.y
        )));
    }
    let chunks: Vec<&[PlanarPoint]> = starts.chunks(BATCH).collect();
    let records = map_batches(exec, chunks.len(), |b| {
        chunks[b]
            .iter()
            .map(|&p| {
                let start_shell = d.contains(p, DEFAULT_TOL) == Membership::Boundary;
                let r = first_return(ctx, &d, MapKind::DoubledRosen, p, max_iters);
                let v = first_return(ctx, &d, MapKind::VeechMultiplicative, p, max_iters);
                let shell = start_shell
                    || r.as_ref().is_ok_and(|r| r.shell)
                    || v.as_ref().is_ok_and(|v| v.shell);
                let (near, same_element) = match (&r, &v) {
                    (Ok(a), Ok(b)) => (close(a.point, b.point), a.word == b.word),
                    _ => (false, false),
                };
                ReturnRecord {
                    start: p,
                    r_return: r.map(|r| (r.point, r.steps)),
                    v_return: v.map(|v| (v.point, v.steps)),
                    agree: near || same_element,
                    same_element,
                    shell,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(ComparisonReport {
        q: ctx.q,
        beta: beta(ctx),
        tol: AGREEMENT_TOL,
        records: records.into_iter().flatten().collect(),
    })
}

fn close(a: PlanarPoint, b: PlanarPoint) -> bool {
    (a.x - b.x).abs() <= AGREEMENT_TOL * (1.0 + a.x.abs())
        && (a.y - b.y).abs() <= AGREEMENT_TOL * (1.0 + a.y.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowReturnRow {
    pub k: u32,
    /// `(R^{q/4}P⁻¹)^k(I)`, sorted.
    pub interval: (f64, f64),
    pub sampled: usize,
    /// Smallest induction index of `𝒯_v` seen; `None` if nothing returned.
    pub min_index: Option<usize>,
    /// Samples still outside `Ω̄` after `max_iters` steps.
    pub no_return: usize,
}

impl SlowReturnRow {
    /// Whether the index bound `>= k` held on every sample.
    pub fn holds(&self) -> bool {
        self.min_index.is_none_or(|m| m >= self.k as usize)
    }
}

/// For `k = 2..=k_max`, samples `samples` points of `Ω̄` over
/// `(R^{q/4}P⁻¹)^k([-μ/2, μ/2))` and records the smallest `𝒯_v` induction index.
pub fn slow_return_experiment(
    ctx: &GroupContext,
    k_max: u32,
    samples: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<SlowReturnRow>> {
    if !ctx.q.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!(
            "the slow-return construction needs q divisible by 4, got {}",
            ctx.q
        )));
    }
    if k_max < 2 {
        return Err(Error::InvalidParameter("k_max must be at least 2".into()));
    }
    let d = omega_bar(ctx)?;
    let (i_lo, i_hi) = ctx.interval_i();
    let step = ctx.r_power(i64::from(ctx.q / 4)) * ctx.p_power(-1);
    let mut rows = Vec::new();
    for k in 2..=k_max {
        let m = step.pow(i64::from(k));
        let a = m.apply(i_lo).finite().ok_or(Error::EmptyFiber { lo: i_lo, hi: i_hi })?;
        let b = m.apply(i_hi).finite().ok_or(Error::EmptyFiber { lo: i_lo, hi: i_hi })?;
        let (lo, hi) = (a.min(b), a.max(b));
        if !(lo > i_lo && hi < i_hi && lo < hi) {
            return Err(Error::EmptyFiber { lo, hi });
        }
        let mut rng = batch_rng(seed, k as usize);
        let mut min_index: Option<usize> = None;
        let mut no_return = 0;
        for _ in 0..samples {
            let x = rng.random_range(lo..hi);
            let (y0, y1) = (d.lower_at(x), d.upper_at(x));
            // Keep clear of the boundary band so membership is decidable.
            let pad = 4.0 * DEFAULT_TOL;
            let y = rng.random_range(y0 + pad..y1 - pad);
            let p = PlanarPoint::new(x, y);
            match first_return(ctx, &d, MapKind::VeechMultiplicative, p, max_iters) {
                Ok(Return { steps: n, .. }) => min_index = Some(min_index.map_or(n, |m| m.min(n))),
                Err(Error::NoReturn { .. }) => no_return += 1,
                Err(e) => return Err(e),
            }
        }
        rows.push(SlowReturnRow {
            k,
            interval: (lo, hi),
            sampled: samples,
            min_index,
            no_return,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_region_is_one_step() {
        let ctx = GroupContext::new(8).unwrap();
        let d = omega_bar(&ctx).unwrap();
        let mut rng = batch_rng(9, 0);
        for (lo, hi) in agreement_intervals(&ctx, 3) {
            for sign in [1.0, -1.0] {
                for _ in 0..200 {
                    let x = sign * rng.random_range(lo..hi);
                    let y = rng.random_range(d.lower_at(x) + 1e-6..d.upper_at(x) - 1e-6);
                    let p = PlanarPoint::new(x, y);
                    let r = planar_step(&ctx, MapKind::DoubledRosen, p).unwrap();
                    let v = planar_step(&ctx, MapKind::VeechMultiplicative, p).unwrap();
                    assert!(close(r, v), "{p:?}: {r:?} vs {v:?}");
                }
            }
        }
    }

    #[test]
    fn index_one_on_the_central_agreement_interval() {
        let ctx = GroupContext::new(8).unwrap();
        let d = omega_bar(&ctx).unwrap();
        let (lo, hi) = agreement_intervals(&ctx, 0)[0];
        for i in 1..20 {
            let x = lo + (hi - lo) * f64::from(i) / 20.0;
            let y = 0.5 * (d.lower_at(x) + d.upper_at(x));
            for map in [MapKind::DoubledRosen, MapKind::VeechMultiplicative] {
                assert_eq!(induction_index(&ctx, map, PlanarPoint::new(x, y), 100).unwrap(), 1);
            }
        }
    }

    #[test]
    fn starts_must_lie_in_the_intersection() {
        let ctx = GroupContext::new(8).unwrap();
        let bad = [PlanarPoint::new(0.0, 5.0)];
        assert!(compare_first_returns(&ctx, &bad, 10, Execution::Sequential).is_err());
        assert!(induction_index(&ctx, MapKind::DoubledRosen, bad[0], 10).is_err());
    }

    #[test]
    fn small_comparison_agrees() {
        let ctx = GroupContext::new(8).unwrap();
        let starts = random_starts(&ctx, 200, 4).unwrap();
        let rep = compare_first_returns(&ctx, &starts, DEFAULT_MAX_ITERS, Execution::default()).unwrap();
        assert_eq!(rep.records.len(), 200);
        assert!(rep.agreement_rate() >= 0.99, "{:?}", rep.disagreements().next());
        for r in &rep.records {
            if let Ok((_, n)) = r.r_return {
                assert!(n >= 1);
            }
        }
    }

    #[test]
    fn slow_return_needs_q_divisible_by_four() {
        let ctx = GroupContext::new(10).unwrap();
        assert!(matches!(
            slow_return_experiment(&ctx, 3, 10, 1, 1000),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn slow_return_bound_holds_at_q8() {
        let ctx = GroupContext::new(8).unwrap();
        let rows = slow_return_experiment(&ctx, 4, 50, 1, DEFAULT_MAX_ITERS).unwrap();
        for row in &rows {
            assert!(row.holds(), "{row:?}");
            assert!(row.min_index.is_some());
        }
        assert!(rows.windows(2).all(|w| w[1].interval.1 - w[1].interval.0 < w[0].interval.1 - w[0].interval.0));
    }
}
