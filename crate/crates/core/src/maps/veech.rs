use super::{check_interval, result, settle, Digit, StepResult, VeechRegime};
use crate::error::{Error, Result};
use crate::moebius::{GroupContext, DEFAULT_TOL};

/// The additive map `x ↦ P^k R^j·x`: rotate out of `I`, translate back in.
pub fn veech_additive_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let (lo, hi) = ctx.interval_i();
    check_interval(x, lo, hi)?;
    if ctx
        .ds()
        .iter()
        .chain(ctx.cs().iter())
        .any(|&p| (x - p).abs() <= DEFAULT_TOL)
    {
        return Err(Error::DiscontinuityPoint { x });
    }
    // Exactly one j in 1..n-1 leaves I; take the largest excursion.
    let mut best: Option<(u32, f64)> = None;
    for j in 1..ctx.n {
        let y = ctx
            .r_power(i64::from(j))
            .apply(x)
            .finite()
            .ok_or(Error::Unbounded { x })?;
        if y.abs() > hi && best.is_none_or(|(_, b)| y.abs() > b.abs()) {
            best = Some((j, y));
        }
    }
    let (j, y) = best.ok_or(Error::DiscontinuityPoint { x })?;
    let mu = ctx.mu;
    let guess = -((y + mu / 2.0) / mu).floor() as i64;
    let (k, image) = settle(guess, lo, hi, |k| y + k as f64 * mu)?;
    if k == 0 {
        return Err(Error::DiscontinuityPoint { x });
    }
    let matrix = ctx.p_power(k) * ctx.r_power(i64::from(j));
    result(x, image, matrix, Digit::VeechAdd { k, j })
}

/// Number of `PR⁻¹` steps needed to leave `(α, μ/2]` from `x > α`.
pub(crate) fn parabolic_exponent(ctx: &GroupContext, x: f64) -> f64 {
    let (mu, a) = (ctx.mu, ctx.alpha);
    ((mu * mu + 4.0) / mu / (mu - 2.0 * a) * (x - a) / (mu - 2.0 * x)).ceil()
}

/// `(PR⁻¹)^ℓ·x` (or the mirror `(P⁻¹R)^ℓ·x`) in the coordinate where the
/// parabolic power is a translation, `1/(y - μ/2) = ℓσ + 1/(x - μ/2)`.
///
/// Returns the image and the denominator `cx + d` of the closed-form matrix.
/// Both lose only `O(ε/|x ∓ μ/2|)` near the fixed point, against `O(ℓ²ε)` for
/// the matrix product.
pub(crate) fn parabolic_apply(ctx: &GroupContext, right: bool, l: i64, x: f64) -> (f64, f64) {
    let h = ctx.mu / 2.0;
    let s = l as f64 * ctx.parabolic_sigma();
    if right {
        let e = x - h;
        let w = s.mul_add(e, 1.0);
        (h + e / w, w)
    } else {
        let e = x + h;
        let w = (-s).mul_add(e, 1.0);
        (e / w - h, w)
    }
}

/// The multiplicative map: parabolic runs near `±μ/2` collapsed into one step.
pub fn veech_mult_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let (lo, hi) = ctx.interval_i();
    check_interval(x, lo, hi)?;
    if (x.abs() - hi).abs() <= DEFAULT_TOL {
        return Err(Error::FixedPoint { x });
    }
    let a = ctx.alpha;
    if (x.abs() - a).abs() <= DEFAULT_TOL {
        return Err(Error::DiscontinuityPoint { x });
    }
    if x >= -a && x < a {
        let s = veech_additive_step(ctx, x)?;
        let Digit::VeechAdd { k, j } = s.digit else {
            unreachable!("additive steps carry VeechAdd digits")
        };
        return Ok(StepResult {
            digit: Digit::VeechMult(VeechRegime::Central { k, j }),
            ..s
        });
    }
    let right = x > 0.0;
    let xr = x.abs();
    // In mirrored coordinates the run must leave (α, μ/2] after exactly ℓ steps.
    let exits = |l: i64| {
        let (y, w) = parabolic_apply(ctx, right, l, x);
        let y = if w == 0.0 { f64::INFINITY } else { y };
        let yr = if right { y } else { -y };
        !(yr > a && yr <= hi)
    };
    let guess = parabolic_exponent(ctx, xr).max(1.0);
    if !guess.is_finite() || guess > 9.0e15 {
        return Err(Error::FixedPoint { x });
    }
    let guess = guess as i64;
    let l = [guess, guess - 1, guess + 1]
        .into_iter()
        .find(|&l| l >= 1 && exits(l) && (l == 1 || !exits(l - 1)))
        .ok_or(Error::DiscontinuityPoint { x })?;
    let (matrix, regime) = if right {
        (ctx.parabolic_right(l), VeechRegime::Right(l as u64))
    } else {
        (ctx.parabolic_left(l), VeechRegime::Left(l as u64))
    };
    let (image, w) = parabolic_apply(ctx, right, l, x);
    if !image.is_finite() || w == 0.0 {
        return Err(Error::Unbounded { x });
    }
    if !(image >= lo && image < hi) {
        return Err(Error::OutOfInterval { x: image, lo, hi });
    }
    Ok(StepResult {
        input: x,
        image,
        matrix,
        digit: Digit::VeechMult(regime),
        tau: -2.0 * w.abs().ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx8() -> GroupContext {
        GroupContext::new(8).unwrap()
    }

    /// Iterate `PR⁻¹` until the orbit leaves `(α, μ/2]`.
    fn exit_count(ctx: &GroupContext, x: f64) -> u64 {
        let m = ctx.p * ctx.r.inverse();
        let mut y = x;
        let mut l = 0;
        while y > ctx.alpha && y <= ctx.mu / 2.0 {
            y = m.apply(y).finite().unwrap();
            l += 1;
        }
        l
    }

    #[test]
    fn right_regime_near_alpha_is_pr_inverse() {
        for q in [6, 8, 12] {
            let ctx = GroupContext::new(q).unwrap();
            let x = 0.5 * (ctx.alpha + ctx.mu / 2.0);
            let s = veech_additive_step(&ctx, x.min(ctx.alpha + 1e-3)).unwrap();
            assert_eq!(s.digit, Digit::VeechAdd { k: 1, j: ctx.n - 1 });
            assert!(s.matrix.projective_eq(&(ctx.p * ctx.r.inverse()), 1e-12));
            let s = veech_mult_step(&ctx, ctx.alpha + 1e-6).unwrap();
            assert_eq!(s.digit, Digit::VeechMult(VeechRegime::Right(1)));
        }
    }

    #[test]
    fn additive_digit_at_half_by_scan() {
        let ctx = ctx8();
        let s = veech_additive_step(&ctx, 0.5).unwrap();
        let Digit::VeechAdd { k, j } = s.digit else { panic!() };
        let h = ctx.mu / 2.0;
        let inside = |k: i64| {
            let y = (ctx.p_power(k) * ctx.r_power(j.into())).apply(0.5).finite().unwrap();
            (-h..h).contains(&y)
        };
        assert!(inside(k) && !inside(k - 1) && !inside(k + 1));
        // Only the selected rotation leaves I.
        for jj in 1..ctx.n {
            let y = ctx.r_power(jj.into()).apply(0.5).finite().unwrap();
            assert_eq!(y.abs() > h, jj == j);
        }
    }

    #[test]
    fn mult_at_two_takes_three_parabolic_steps() {
        let ctx = ctx8();
        let s = veech_mult_step(&ctx, 2.0).unwrap();
        assert_eq!(s.digit, Digit::VeechMult(VeechRegime::Right(3)));
        assert_eq!(exit_count(&ctx, 2.0), 3);
    }

    #[test]
    fn deep_runs_next_to_the_fixed_point() {
        let ctx = ctx8();
        let h = ctx.mu / 2.0;
        for eps in [1e-8, 3e-9, 1.5e-9] {
            for x in [h - eps, -h + eps] {
                let s = veech_mult_step(&ctx, x).unwrap();
                assert!(s.image.abs() < h && s.tau > 0.0, "{x} {s:?}");
            }
        }
    }

    #[test]
    fn fixed_points_and_discontinuities() {
        let ctx = ctx8();
        let h = ctx.mu / 2.0;
        assert!(matches!(veech_mult_step(&ctx, h), Err(Error::FixedPoint { .. })));
        assert!(matches!(veech_mult_step(&ctx, -h), Err(Error::FixedPoint { .. })));
        assert!(matches!(
            veech_additive_step(&ctx, ctx.c(1)),
            Err(Error::DiscontinuityPoint { .. })
        ));
        assert!(matches!(
            veech_mult_step(&ctx, ctx.alpha),
            Err(Error::DiscontinuityPoint { .. })
        ));
    }

    #[test]
    fn additive_sign_of_k_on_cylinders() {
        let ctx = GroupContext::new(10).unwrap();
        for j in 1..ctx.n as usize {
            let left = 0.5 * (ctx.d(j) + ctx.c(j));
            let right = 0.5 * (ctx.c(j) + ctx.d(j + 1));
            let Digit::VeechAdd { k, j: jj } = veech_additive_step(&ctx, left).unwrap().digit else {
                panic!()
            };
            assert!(k < 0 && jj as usize == j);
            let Digit::VeechAdd { k, j: jj } = veech_additive_step(&ctx, right).unwrap().digit else {
                panic!()
            };
            assert!(k > 0 && jj as usize == j);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn exponent_formula_matches_iteration(u in 0.0..1.0f64, q in prop::sample::select(vec![6u32, 8, 12, 16])) {
            let ctx = GroupContext::new(q).unwrap();
            let x = ctx.alpha + (ctx.mu / 2.0 - ctx.alpha) * u;
            prop_assume!(x > ctx.alpha + 1e-6 && x < ctx.mu / 2.0 - 1e-4);
            let s = veech_mult_step(&ctx, x).unwrap();
            prop_assert_eq!(s.digit, Digit::VeechMult(VeechRegime::Right(exit_count(&ctx, x))));
        }

        #[test]
        fn both_veech_maps_are_odd(u in -0.999..0.999f64) {
            let ctx = ctx8();
            let x = u * ctx.mu / 2.0;
            for f in [veech_additive_step, veech_mult_step] {
                if let (Ok(a), Ok(b)) = (f(&ctx, x), f(&ctx, -x)) {
                    if a.image.abs() < ctx.mu / 2.0 - 1e-9 {
                        // Near x = 0 the rounding in cos(jφ) is amplified by the entry size squared.
                        let m = a.matrix.entries().iter().fold(1.0f64, |m, e| m.max(e.abs()));
                        prop_assert!((a.image + b.image).abs() < 1e-8 + 1e-14 * m * m);
                    }
                }
            }
        }
    }
}
