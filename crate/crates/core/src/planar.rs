//! Planar natural extensions: `𝒯_M(x, y) = (M·x, (cx+d)²y - c(cx+d))`.

use crate::error::{Error, Result};
use crate::maps::{self, parabolic_apply, Digit, MapKind, VeechRegime};
use crate::moebius::{ExtendedReal, GroupContext, MoebiusMap, POLE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }
}

/// Pole of a boundary curve `y = 1/(x - δ)`; `δ = ∞` is the line `y = 0`.
pub type BoundaryParam = ExtendedReal;

/// Applies `𝒯_M`. The formula is invariant under `M ↦ -M`.
pub fn planar_apply(m: &MoebiusMap, p: PlanarPoint) -> Result<PlanarPoint> {
    if !m.is_orientation_preserving() {
        return Err(Error::OrientationReversing);
    }
    let w = m.denominator(p.x);
    if w.abs() <= POLE_TOL {
        return Err(Error::Pole {
            x: p.x,
            denominator: w,
        });
    }
    let x = (m.a() * p.x + m.b()) / w;
    let y = w * w * p.y - m.c() * w;
    Ok(PlanarPoint { x, y })
}

/// Image pole: `𝒯_M` maps `y = 1/(x - δ)` onto `y = 1/(x - M·δ)`.
pub fn transport_delta(m: &MoebiusMap, delta: BoundaryParam) -> BoundaryParam {
    m.act(delta)
}

/// `(x, y) ↦ (x xy-1; 1 y)`, a point of the transversal.
pub fn to_transversal(p: PlanarPoint) -> MoebiusMap {
    MoebiusMap::new(p.x, p.x * p.y - 1.0, 1.0, p.y).expect("transversal matrices have det 1")
}

/// Reads `(x, y)` back off a transversal matrix normalized so `c = 1`.
pub fn from_transversal(a: &MoebiusMap) -> PlanarPoint {
    PlanarPoint {
        x: a.a() / a.c(),
        y: a.d() / a.c(),
    }
}

/// One step of the planar extension of `kind`.
pub fn planar_step(ctx: &GroupContext, kind: MapKind, p: PlanarPoint) -> Result<PlanarPoint> {
    if kind == MapKind::DoubledRosen {
        // Two half-steps are far better conditioned than the product matrix.
        let half = planar_step(ctx, MapKind::ConjRosen, p)?;
        return planar_step(ctx, MapKind::ConjRosen, half);
    }
    let s = maps::step(ctx, kind, p.x)?;
    let mut q = match s.digit {
        Digit::VeechMult(VeechRegime::Left(l) | VeechRegime::Right(l)) => {
            // Deep parabolic powers: take cx + d from the translation form.
            let right = matches!(s.digit, Digit::VeechMult(VeechRegime::Right(_)));
            let (_, w) = parabolic_apply(ctx, right, l as i64, p.x);
            let c = if right { 1.0 } else { -1.0 } * l as f64 * ctx.parabolic_sigma();
            PlanarPoint::new(s.image, w * w * p.y - c * w)
        }
        _ => planar_apply(&s.matrix, p)?,
    };
    // The interval map decides x; keep it rather than the recomputed action.
    q.x = s.image;
    if !q.y.is_finite() {
        return Err(Error::Unbounded { x: p.x });
    }
    Ok(q)
}

#[derive(Debug, Clone)]
pub struct PlanarOrbit {
    pub points: Vec<PlanarPoint>,
    pub termination: Option<Error>,
}

/// `p0` followed by up to `n` planar steps.
pub fn planar_orbit(ctx: &GroupContext, kind: MapKind, p0: PlanarPoint, n: usize) -> PlanarOrbit {
    let mut points = Vec::with_capacity(n.saturating_add(1).min(1 << 24));
    points.push(p0);
    let mut p = p0;
    let mut termination = None;
    for _ in 0..n {
        match planar_step(ctx, kind, p) {
            Ok(q) => {
                points.push(q);
                p = q;
            }
            Err(e) => {
                termination = Some(e);
                break;
            }
        }
    }
    PlanarOrbit {
        points,
        termination,
    }
}

/// Jacobian determinant of `𝒯_M` at `p` by central differences.
pub fn jacobian_determinant(m: &MoebiusMap, p: PlanarPoint, h: f64) -> Result<f64> {
    let f = |x: f64, y: f64| planar_apply(m, PlanarPoint::new(x, y));
    let xp = f(p.x + h, p.y)?;
    let xm = f(p.x - h, p.y)?;
    let yp = f(p.x, p.y + h)?;
    let ym = f(p.x, p.y - h)?;
    let dxdx = (xp.x - xm.x) / (2.0 * h);
    let dydx = (xp.y - xm.y) / (2.0 * h);
    let dxdy = (yp.x - ym.x) / (2.0 * h);
    let dydy = (yp.y - ym.y) / (2.0 * h);
    Ok(dxdx * dydy - dxdy * dydx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::GroupContext;
    use proptest::prelude::*;

    fn t() -> MoebiusMap {
        MoebiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn t_on_the_axis() {
        let q = planar_apply(&t(), PlanarPoint::new(2.0, 0.0)).unwrap();
        assert_eq!(q, PlanarPoint::new(-0.5, -2.0));
    }

    #[test]
    fn translation_keeps_y() {
        let ctx = GroupContext::new(8).unwrap();
        let q = planar_apply(&ctx.s, PlanarPoint::new(0.25, 3.5)).unwrap();
        assert!((q.x - 0.25 - ctx.lambda).abs() < 1e-15);
        assert_eq!(q.y, 3.5);
    }

    #[test]
    fn sign_of_representative_is_irrelevant() {
        let m = MoebiusMap::new(2.0, 1.0, 3.0, 2.0).unwrap();
        let n = MoebiusMap::new(-2.0, -1.0, -3.0, -2.0).unwrap();
        let p = PlanarPoint::new(0.3, -0.7);
        assert_eq!(planar_apply(&m, p).unwrap(), planar_apply(&n, p).unwrap());
    }

    #[test]
    fn reversing_matrices_are_refused() {
        let m = MoebiusMap::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            planar_apply(&m, PlanarPoint::new(1.0, 0.0)),
            Err(Error::OrientationReversing)
        );
    }

    #[test]
    fn transport_t_of_horizontal_line() {
        assert_eq!(transport_delta(&t(), ExtendedReal::Infinity), ExtendedReal::Finite(0.0));
        let q = planar_apply(&t(), PlanarPoint::new(1.7, 0.0)).unwrap();
        assert!((q.y - 1.0 / q.x).abs() < 1e-12);
    }

    #[test]
    fn transversal_round_trip() {
        assert!(to_transversal(PlanarPoint::new(0.0, 0.0)).projective_eq(&t(), 0.0));
        let p = PlanarPoint::new(0.4, -1.3);
        let back = from_transversal(&to_transversal(p));
        assert!((back.x - p.x).abs() < 1e-15 && (back.y - p.y).abs() < 1e-15);
    }

    #[test]
    fn transversal_equivariance() {
        let ctx = GroupContext::new(8).unwrap();
        let m = ctx.s_power(-2) * ctx.t;
        for i in 1..100 {
            let x = -0.9 + 0.018 * f64::from(i);
            if x.abs() < 1e-3 {
                continue;
            }
            let p = PlanarPoint::new(x, 0.37);
            // Sign of the representative chosen so that cx + d > 0.
            let w = m.denominator(x);
            let ms = if w > 0.0 { m } else { m * MoebiusMap::rotation(std::f64::consts::PI) };
            let t0 = ms.tau(x).unwrap();
            let a = ms * to_transversal(p) * MoebiusMap::geodesic_flow(t0);
            let q = planar_apply(&m, p).unwrap();
            assert!((a.c() - 1.0).abs() < 1e-9);
            let got = from_transversal(&a);
            assert!((got.x - q.x).abs() < 1e-9 && (got.y - q.y).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn planar_orbit_projects_to_interval_orbit() {
        let ctx = GroupContext::new(8).unwrap();
        let o = planar_orbit(&ctx, MapKind::RosenSym, PlanarPoint::new(0.314_159, 0.0), 300);
        let i = maps::orbit(&ctx, MapKind::RosenSym, 0.314_159, 300);
        for (p, x) in o.points.iter().zip(i.points()) {
            assert_eq!(p.x, x);
        }
    }

    fn word(ctx: &GroupContext, letters: &[u8]) -> MoebiusMap {
        letters.iter().fold(MoebiusMap::IDENTITY, |m, l| {
            m * match l % 6 {
                0 => ctx.s,
                1 => ctx.t,
                2 => ctx.u,
                3 => ctx.r,
                4 => ctx.p.inverse(),
                _ => ctx.q_mat,
            }
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_unit_jacobian(
            letters in prop::collection::vec(any::<u8>(), 1..6),
            x in -2.0..2.0f64,
            y in -2.0..2.0f64,
        ) {
            let ctx = GroupContext::new(8).unwrap();
            let m = word(&ctx, &letters);
            prop_assume!(m.denominator(x).abs() > 0.05);
            let p = PlanarPoint::new(x, y);
            let q = planar_apply(&m, p).unwrap();
            let back = planar_apply(&m.inverse(), q).unwrap();
            prop_assert!((back.x - x).abs() < 1e-8 && (back.y - y).abs() < 1e-8);
            let j = jacobian_determinant(&m, p, 1e-6).unwrap();
            prop_assert!((j - 1.0).abs() < 1e-5);
        }

        #[test]
        fn transport_matches_pointwise_image(
            letters in prop::collection::vec(any::<u8>(), 1..6),
            x in -2.0..2.0f64,
            delta in -5.0..5.0f64,
        ) {
            let ctx = GroupContext::new(10).unwrap();
            let m = word(&ctx, &letters);
            prop_assume!((x - delta).abs() > 0.05 && m.denominator(x).abs() > 0.05);
            let q = planar_apply(&m, PlanarPoint::new(x, 1.0 / (x - delta))).unwrap();
            let md = transport_delta(&m, ExtendedReal::Finite(delta));
            let want = match md {
                ExtendedReal::Finite(d) => 1.0 / (q.x - d),
                ExtendedReal::Infinity => 0.0,
            };
            prop_assert!((q.y - want).abs() < 1e-7 * (1.0 + want.abs()));
        }

        #[test]
        fn composition_is_compatible(
            a in prop::collection::vec(any::<u8>(), 1..4),
            b in prop::collection::vec(any::<u8>(), 1..4),
            x in -2.0..2.0f64,
            y in -2.0..2.0f64,
        ) {
            let ctx = GroupContext::new(12).unwrap();
            let (m, n) = (word(&ctx, &a), word(&ctx, &b));
            prop_assume!(n.denominator(x).abs() > 0.05);
            let p = PlanarPoint::new(x, y);
            let np = planar_apply(&n, p).unwrap();
            prop_assume!(m.denominator(np.x).abs() > 0.05);
            let lhs = planar_apply(&(m * n), p).unwrap();
            let rhs = planar_apply(&m, np).unwrap();
            prop_assert!((lhs.x - rhs.x).abs() < 1e-8 * (1.0 + lhs.x.abs()));
            prop_assert!((lhs.y - rhs.y).abs() < 1e-8 * (1.0 + lhs.y.abs()));
        }
    }
}
