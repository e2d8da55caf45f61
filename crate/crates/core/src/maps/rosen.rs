use super::{check_interval, result, settle, Digit, StepResult};
use crate::error::{Error, Result};
use crate::moebius::{GroupContext, MoebiusMap, DEFAULT_TOL};

/// `x ↦ 1/|x| - bλ` with `b = ⌊1/(|x|λ) + 1/2⌋`.
///
/// For `x > 0` the branch `(-bλ 1; 1 0)` has determinant `-1`; it is kept
/// for digit bookkeeping only.
pub fn rosen_original_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let (lo, hi) = ctx.interval_j();
    check_interval(x, lo, hi)?;
    if x.abs() <= DEFAULT_TOL {
        return Err(Error::ZeroOrbit { x });
    }
    let l = ctx.lambda;
    let inv = 1.0 / x.abs();
    let guess = (inv / l + 0.5).floor() as i64;
    let (b, image) = settle(guess, lo, hi, |b| inv - b as f64 * l)?;
    let eps: i8 = if x < 0.0 { -1 } else { 1 };
    let matrix = if x < 0.0 {
        MoebiusMap::new(-(b as f64) * l, -1.0, 1.0, 0.0)?
    } else {
        MoebiusMap::new(-(b as f64) * l, 1.0, 1.0, 0.0)?
    };
    result(x, image, matrix, Digit::RosenOriginal { eps, b })
}

/// `h(x) = -1/x - aλ` with `a = ⌊-1/(xλ) + 1/2⌋`, branch `S^{-a}T`.
pub fn rosen_sym_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let (lo, hi) = ctx.interval_j();
    check_interval(x, lo, hi)?;
    if x.abs() <= DEFAULT_TOL {
        return Err(Error::ZeroOrbit { x });
    }
    let l = ctx.lambda;
    let w = -1.0 / x;
    let guess = (w / l + 0.5).floor() as i64;
    let (a, image) = settle(guess, lo, hi, |a| w - a as f64 * l)?;
    let matrix = MoebiusMap::new(-(a as f64) * l, -1.0, 1.0, 0.0)?;
    result(x, image, matrix, Digit::RosenSym(a))
}

/// The geometric map `k` on `I`: rotate by `U⁻¹` (x ≥ 0) or `U` (x < 0),
/// then translate back into `[-μ/2, μ/2)` by a power of `P`.
///
/// The branches blow up at `±μ/2`, the images of the Rosen termination
/// point `0` under `Q`; there the orbit is no longer defined.
pub fn conj_rosen_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let (lo, hi) = ctx.interval_i();
    check_interval(x, lo, hi)?;
    if (x.abs() - hi).abs() <= DEFAULT_TOL {
        return Err(Error::ZeroOrbit { x });
    }
    if x.abs() <= DEFAULT_TOL {
        return Err(Error::DiscontinuityPoint { x });
    }
    let side: i8 = if x > 0.0 { 1 } else { -1 };
    let rot = ctx.rotation_power(-i64::from(side));
    let y = rot.apply(x).finite().ok_or(Error::ZeroOrbit { x })?;
    let mu = ctx.mu;
    let guess = -((y + mu / 2.0) / mu).floor() as i64;
    let (p, image) = settle(guess, lo, hi, |p| y + p as f64 * mu)?;
    let matrix = ctx.p_power(p) * rot;
    result(x, image, matrix, Digit::Conj { side, p })
}

/// `r = k∘k`.
pub fn doubled_rosen_step(ctx: &GroupContext, x: f64) -> Result<StepResult> {
    let s1 = conj_rosen_step(ctx, x)?;
    let s2 = conj_rosen_step(ctx, s1.image)?;
    let (Digit::Conj { side: a, p: pa }, Digit::Conj { side: b, p: pb }) = (s1.digit, s2.digit)
    else {
        unreachable!("conjugated steps always carry Conj digits")
    };
    Ok(StepResult {
        input: x,
        image: s2.image,
        matrix: s2.matrix * s1.matrix,
        digit: Digit::Doubled {
            first: (a, pa),
            second: (b, pb),
        },
        tau: s1.tau + s2.tau,
    })
}
