//! The six interval maps and their per-step bookkeeping.

mod rosen;
mod veech;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moebius::{GroupContext, HeckeWord, MoebiusMap, DEFAULT_TOL};

pub use rosen::{conj_rosen_step, doubled_rosen_step, rosen_original_step, rosen_sym_step};
pub use veech::{veech_additive_step, veech_mult_step};
pub(crate) use veech::parabolic_apply;

/// Which interval map to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// `f`, the original Rosen map (orientation-reversing branches for x > 0).
    RosenOriginal,
    /// `h`, the symmetric Rosen map on `J`.
    RosenSym,
    /// `k`, the Rosen map conjugated onto `I`.
    ConjRosen,
    /// `r = k²`.
    DoubledRosen,
    /// `a`, the additive Veech map.
    VeechAdditive,
    /// `v`, the multiplicative Veech map.
    VeechMultiplicative,
}

impl MapKind {
    pub const ALL: [MapKind; 6] = [
        MapKind::RosenOriginal,
        MapKind::RosenSym,
        MapKind::ConjRosen,
        MapKind::DoubledRosen,
        MapKind::VeechAdditive,
        MapKind::VeechMultiplicative,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            MapKind::RosenOriginal => "f",
            MapKind::RosenSym => "h",
            MapKind::ConjRosen => "k",
            MapKind::DoubledRosen => "r",
            MapKind::VeechAdditive => "a",
            MapKind::VeechMultiplicative => "v",
        }
    }

    /// The closed interval the map acts on: `J` for the Rosen maps, `I` otherwise.
    pub fn interval(self, ctx: &GroupContext) -> (f64, f64) {
        match self {
            MapKind::RosenOriginal | MapKind::RosenSym => ctx.interval_j(),
            _ => ctx.interval_i(),
        }
    }

    /// Whether every branch has determinant `+1`.
    pub fn is_orientation_preserving(self) -> bool {
        self != MapKind::RosenOriginal
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MapKind::ALL
            .into_iter()
            .find(|m| m.symbol() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown map '{s}'")))
    }
}

/// Regime of one multiplicative Veech step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeechRegime {
    /// `(P⁻¹R)^ℓ` on `[-μ/2, -α)`.
    Left(u64),
    /// Additive step on `[-α, α)`.
    Central { k: i64, j: u32 },
    /// `(PR⁻¹)^ℓ` on `(α, μ/2)`.
    Right(u64),
}

/// Branch label of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Digit {
    RosenOriginal { eps: i8, b: i64 },
    RosenSym(i64),
    /// `side = +1` for the `U⁻¹` branch (x ≥ 0), `-1` for the `U` branch.
    Conj { side: i8, p: i64 },
    Doubled { first: (i8, i64), second: (i8, i64) },
    VeechAdd { k: i64, j: u32 },
    VeechMult(VeechRegime),
}

/// Written without commas so it can sit in a CSV cell.
impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |s: i8| if s < 0 { '-' } else { '+' };
        match self {
            Digit::RosenOriginal { eps, b } => write!(f, "{}1/{b}", sign(*eps)),
            Digit::RosenSym(a) => write!(f, "{a}"),
            Digit::Conj { side, p } => write!(f, "{}/{p}", sign(*side)),
            Digit::Doubled { first, second } => write!(
                f,
                "{}/{}|{}/{}",
                sign(first.0),
                first.1,
                sign(second.0),
                second.1
            ),
            Digit::VeechAdd { k, j } => write!(f, "{k}:{j}"),
            Digit::VeechMult(VeechRegime::Left(l)) => write!(f, "L{l}"),
            Digit::VeechMult(VeechRegime::Right(l)) => write!(f, "R{l}"),
            Digit::VeechMult(VeechRegime::Central { k, j }) => write!(f, "C{k}:{j}"),
        }
    }
}

impl Digit {
    /// Right-multiplies `w` by the inverse of this branch's matrix.
    ///
    /// `None` for the Rosen digits, whose matrices are not in the conjugated group.
    pub fn mul_inverse_into(&self, w: &mut HeckeWord) -> Option<()> {
        match *self {
            Digit::RosenOriginal { .. } | Digit::RosenSym(_) => return None,
            Digit::Conj { side, p } => {
                w.mul_u(i64::from(side)).mul_p(-p);
            }
            Digit::Doubled { first, second } => {
                w.mul_u(i64::from(first.0)).mul_p(-first.1);
                w.mul_u(i64::from(second.0)).mul_p(-second.1);
            }
            Digit::VeechAdd { k, j } | Digit::VeechMult(VeechRegime::Central { k, j }) => {
                w.mul_u(-2 * i64::from(j)).mul_p(-k);
            }
            Digit::VeechMult(VeechRegime::Right(l)) => {
                for _ in 0..l {
                    w.mul_u(2).mul_p(-1);
                }
            }
            Digit::VeechMult(VeechRegime::Left(l)) => {
                for _ in 0..l {
                    w.mul_u(-2).mul_p(1);
                }
            }
        }
        Some(())
    }
}

/// One application of an interval map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub input: f64,
    pub image: f64,
    pub matrix: MoebiusMap,
    pub digit: Digit,
    pub tau: f64,
}

/// Applies one step of `kind` at `x`.
pub fn step(ctx: &GroupContext, kind: MapKind, x: f64) -> Result<StepResult> {
    match kind {
        MapKind::RosenOriginal => rosen_original_step(ctx, x),
        MapKind::RosenSym => rosen_sym_step(ctx, x),
        MapKind::ConjRosen => conj_rosen_step(ctx, x),
        MapKind::DoubledRosen => doubled_rosen_step(ctx, x),
        MapKind::VeechAdditive => veech_additive_step(ctx, x),
        MapKind::VeechMultiplicative => veech_mult_step(ctx, x),
    }
}

/// An orbit segment; `termination` holds the error that stopped it early.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub start: f64,
    pub steps: Vec<StepResult>,
    pub termination: Option<Error>,
}

impl Orbit {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.image))
    }
}

/// Up to `n` steps from `x0`; step errors end the orbit and are recorded.
pub fn orbit(ctx: &GroupContext, kind: MapKind, x0: f64, n: usize) -> Orbit {
    let mut steps = Vec::with_capacity(n.min(1 << 20));
    let mut x = x0;
    let mut termination = None;
    for _ in 0..n {
        match step(ctx, kind, x) {
            Ok(s) => {
                x = s.image;
                steps.push(s);
            }
            Err(e) => {
                termination = Some(e);
                break;
            }
        }
    }
    Orbit {
        start: x0,
        steps,
        termination,
    }
}

/// Shared interval guard: `x` must lie in `[lo - tol, hi + tol]`.
fn check_interval(x: f64, lo: f64, hi: f64) -> Result<()> {
    if !x.is_finite() || x < lo - DEFAULT_TOL || x > hi + DEFAULT_TOL {
        return Err(Error::OutOfInterval { x, lo, hi });
    }
    Ok(())
}

/// Adjusts an integer digit so that `image(digit)` lands in `[lo, hi)`,
/// trying the digit itself and then its two neighbours once.
fn settle<F>(digit: i64, lo: f64, hi: f64, image: F) -> Result<(i64, f64)>
where
    F: Fn(i64) -> f64,
{
    let y = image(digit);
    if y >= lo && y < hi {
        return Ok((digit, y));
    }
    let nudged = if y >= hi { digit + 1 } else { digit - 1 };
    let y2 = image(nudged);
    if y2 >= lo && y2 < hi {
        return Ok((nudged, y2));
    }
    Err(Error::OutOfInterval { x: y, lo, hi })
}

fn result(x: f64, image: f64, matrix: MoebiusMap, digit: Digit) -> Result<StepResult> {
    let tau = matrix.tau(x)?;
    Ok(StepResult {
        input: x,
        image,
        matrix,
        digit,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx8() -> GroupContext {
        GroupContext::new(8).unwrap()
    }

    #[test]
    fn parse_map_symbols() {
        for m in MapKind::ALL {
            assert_eq!(m.symbol().parse::<MapKind>().unwrap(), m);
        }
        assert!("x".parse::<MapKind>().is_err());
    }

    #[test]
    fn digit_text_has_no_commas() {
        let ds = [
            Digit::RosenOriginal { eps: -1, b: 5 },
            Digit::Doubled {
                first: (1, -2),
                second: (-1, 0),
            },
            Digit::VeechMult(VeechRegime::Central { k: -2, j: 1 }),
        ];
        for d in ds {
            assert!(!d.to_string().contains(','));
        }
        assert_eq!(Digit::VeechMult(VeechRegime::Right(3)).to_string(), "R3");
    }

    #[test]
    fn sym_orbit_of_left_endpoint_terminates_at_zero() {
        for q in [6, 8, 10, 12, 16] {
            let ctx = GroupContext::new(q).unwrap();
            let o = orbit(&ctx, MapKind::RosenSym, -ctx.lambda / 2.0, 100);
            let n = ctx.n as usize;
            assert_eq!(o.steps.len(), n - 1, "q={q}");
            for (j, s) in o.steps.iter().enumerate() {
                assert!((s.image - ctx.phi(j + 1)).abs() < 1e-9, "q={q} j={j}");
            }
            assert!(matches!(o.termination, Some(Error::ZeroOrbit { .. })));
        }
    }

    #[test]
    fn digit_relation_on_long_orbits() {
        let ctx = ctx8();
        for &x in &[0.3141592653589793, -0.77, 0.05, -0.4321] {
            let a = orbit(&ctx, MapKind::RosenSym, x, 50);
            let b = orbit(&ctx, MapKind::RosenOriginal, x, 50);
            let mut prod = 1i64;
            for (i, (sa, sb)) in a.steps.iter().zip(b.steps.iter()).enumerate() {
                let Digit::RosenSym(an) = sa.digit else { panic!() };
                let Digit::RosenOriginal { eps, b } = sb.digit else { panic!() };
                prod *= i64::from(eps);
                let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
                assert_eq!(an, sign * prod * b, "x={x} i={i}");
            }
        }
    }

    proptest! {
        #[test]
        fn step_results_are_consistent(
            m in 0usize..6,
            u in 0.0..1.0f64,
            q in prop::sample::select(vec![6u32, 8, 10, 12, 16]),
        ) {
            let ctx = GroupContext::new(q).unwrap();
            let kind = MapKind::ALL[m];
            let (lo, hi) = kind.interval(&ctx);
            let x = lo + u * (hi - lo);
            if let Ok(s) = step(&ctx, kind, x) {
                let y = s.matrix.apply(x).finite().unwrap();
                // Rounding in `M·x` grows with the square of the entries.
                let cond = s.matrix.entries().iter().fold(1.0f64, |m, v| m.max(v.abs())).powi(2);
                prop_assert!((y - s.image).abs() <= 1e-9 * (1.0 + y.abs()) * cond);
                prop_assert!((s.tau - s.matrix.tau(x).unwrap()).abs() < 1e-9 * (1.0 + s.tau.abs()));
                prop_assert!(s.image >= lo && s.image < hi);
            }
        }

        #[test]
        fn inverse_words_undo_the_branch(
            m in 2usize..6,
            u in 0.0..1.0f64,
            q in prop::sample::select(vec![6u32, 8, 12]),
        ) {
            let ctx = GroupContext::new(q).unwrap();
            let kind = MapKind::ALL[m];
            let (lo, hi) = kind.interval(&ctx);
            if let Ok(s) = step(&ctx, kind, lo + u * (hi - lo)) {
                let mut w = HeckeWord::identity(q);
                s.digit.mul_inverse_into(&mut w).unwrap();
                let back = s.matrix * w.to_matrix(&ctx);
                let cond = s.matrix.entries().iter().fold(1.0f64, |m, v| m.max(v.abs())).powi(2);
                prop_assert!(back.projective_eq(&MoebiusMap::IDENTITY, 1e-9 * cond), "{:?}", s.digit);
            }
        }
    }
}
