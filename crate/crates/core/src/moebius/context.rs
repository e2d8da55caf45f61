use std::f64::consts::PI;

use super::{ExtendedReal, MoebiusMap, IDENTITY_TOL};
use crate::error::{Error, Result};

/// Every constant, generator and auxiliary sequence determined by `q`.
///
/// Built once; downstream code reads the fields instead of recomputing
/// trigonometric expressions.
#[derive(Debug, Clone)]
pub struct GroupContext {
    pub q: u32,
    pub n: u32,
    /// `π/q`.
    pub theta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `Q·1 = cot(π/2q)`.
    pub q1: f64,
    /// `1/(sin(π/q)(λ+1))`.
    pub rho: f64,
    pub s: MoebiusMap,
    pub t: MoebiusMap,
    pub u: MoebiusMap,
    pub r: MoebiusMap,
    pub p: MoebiusMap,
    pub q_mat: MoebiusMap,
    phi: Vec<f64>,
    delta: Vec<f64>,
    d: Vec<f64>,
    c: Vec<f64>,
}

/// One named relation of the identity suite and its residual.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub error: f64,
}

impl GroupContext {
    pub fn new(q: u32) -> Result<Self> {
        if q < 6 || !q.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "q must be an even integer >= 6, got {q}"
            )));
        }
        let n = q / 2;
        let theta = PI / f64::from(q);
        let (sin, cos) = theta.sin_cos();
        let lambda = 2.0 * cos;
        let mu = 2.0 * cos / sin;
        let mu2 = mu * mu;
        let alpha = (mu / 2.0) * (3.0 * mu2 - 4.0) / (5.0 * mu2 + 4.0);
        let gamma = (mu / 2.0) * (5.0 * mu2 + 4.0) / (3.0 * mu2 - 4.0);
        let q1 = (1.0 + cos) / sin;
        let rho = 1.0 / (sin * (lambda + 1.0));

        let s = MoebiusMap::translation(lambda);
        let t = MoebiusMap::new(0.0, -1.0, 1.0, 0.0)?;
        let u = MoebiusMap::rotation(theta);
        let r = MoebiusMap::rotation(2.0 * theta);
        let p = MoebiusMap::translation(mu);
        let q_mat = MoebiusMap::new(1.0, cos, 0.0, sin)?;

        let mut phi: Vec<f64> = (0..n)
            .map(|j| {
                let j = f64::from(j);
                -((j + 1.0) * theta).cos() / (j * theta).cos()
            })
            .collect();
        phi[(n - 1) as usize] = 0.0;

        let mut delta = Vec::with_capacity((n - 1) as usize);
        let mut dj = -lambda - 1.0;
        for _ in 0..n - 1 {
            delta.push(dj);
            dj = -lambda - 1.0 / dj;
        }

        // d_j = R^{-j}·μ/2 = -cot((2j-1)θ), c_j = R^{-j}·∞ = -cot(2jθ).
        let mut d: Vec<f64> = (1..=n)
            .map(|j| -1.0 / ((2.0 * f64::from(j) - 1.0) * theta).tan())
            .collect();
        d[0] = -mu / 2.0;
        d[(n - 1) as usize] = mu / 2.0;
        let c: Vec<f64> = (1..n)
            .map(|j| -1.0 / (2.0 * f64::from(j) * theta).tan())
            .collect();

        let ctx = GroupContext {
            q,
            n,
            theta,
            lambda,
            mu,
            alpha,
            gamma,
            q1,
            rho,
            s,
            t,
            u,
            r,
            p,
            q_mat,
            phi,
            delta,
            d,
            c,
        };
        // Roundoff in the long words grows roughly linearly in q.
        let tol = IDENTITY_TOL * f64::from(q).max(16.0);
        if let Some(bad) = ctx.identity_checks().into_iter().find(|c| !(c.error <= tol)) {
            return Err(Error::InvalidParameter(format!(
                "relation {} fails with residual {:e} at q = {q}",
                bad.name, bad.error
            )));
        }
        Ok(ctx)
    }

    /// `φ_j` for `j = 0..n-1`.
    pub fn phi(&self, j: usize) -> f64 {
        self.phi[j]
    }
    pub fn phis(&self) -> &[f64] {
        &self.phi
    }

    /// `δ_j` for `j = 0..n-2`.
    pub fn delta(&self, j: usize) -> f64 {
        self.delta[j]
    }
    pub fn deltas(&self) -> &[f64] {
        &self.delta
    }

    /// `d_j` for `j = 1..n` (one-based).
    pub fn d(&self, j: usize) -> f64 {
        self.d[j - 1]
    }
    pub fn ds(&self) -> &[f64] {
        &self.d
    }

    /// `c_j` for `j = 1..n-1` (one-based).
    pub fn c(&self, j: usize) -> f64 {
        self.c[j - 1]
    }
    pub fn cs(&self) -> &[f64] {
        &self.c
    }

    /// `J = [-λ/2, λ/2]`.
    pub fn interval_j(&self) -> (f64, f64) {
        (-self.lambda / 2.0, self.lambda / 2.0)
    }

    /// `I = [-μ/2, μ/2]`.
    pub fn interval_i(&self) -> (f64, f64) {
        (-self.mu / 2.0, self.mu / 2.0)
    }

    /// `U^m`, built directly from the rotation angle.
    pub fn rotation_power(&self, m: i64) -> MoebiusMap {
        MoebiusMap::rotation(m as f64 * self.theta)
    }

    /// `R^j`.
    pub fn r_power(&self, j: i64) -> MoebiusMap {
        MoebiusMap::rotation(2.0 * j as f64 * self.theta)
    }

    /// `P^k`.
    pub fn p_power(&self, k: i64) -> MoebiusMap {
        MoebiusMap::translation(k as f64 * self.mu)
    }

    /// `S^k`.
    pub fn s_power(&self, k: i64) -> MoebiusMap {
        MoebiusMap::translation(k as f64 * self.lambda)
    }

    /// `4μ/(μ²+4)`, the lower-left entry of `(PR⁻¹)` after conjugating its
    /// fixed point `μ/2` to `0`.
    pub fn parabolic_sigma(&self) -> f64 {
        4.0 * self.mu / (self.mu * self.mu + 4.0)
    }

    /// `(PR⁻¹)^ℓ` in closed form; its fixed point is `μ/2`.
    pub fn parabolic_right(&self, l: i64) -> MoebiusMap {
        let s = l as f64 * self.parabolic_sigma();
        let h = self.mu / 2.0;
        MoebiusMap::unimodular(1.0 + s * h, -s * h * h, s, 1.0 - s * h)
    }

    /// `(P⁻¹R)^ℓ`, the mirror image of [`Self::parabolic_right`].
    pub fn parabolic_left(&self, l: i64) -> MoebiusMap {
        let m = self.parabolic_right(l);
        MoebiusMap::unimodular(m.a(), -m.b(), -m.c(), m.d())
    }

    /// `U^j·(Q·1) = cot((2j+1)π/2q)`.
    pub fn u_power_q1(&self, j: i64) -> f64 {
        1.0 / ((2 * j + 1) as f64 * self.theta / 2.0).tan()
    }

    /// Residuals of every group relation and conjugation identity.
    pub fn identity_checks(&self) -> Vec<IdentityCheck> {
        let id = MoebiusMap::IDENTITY;
        let q = self.q as i64;
        let n = self.n as i64;
        let qi = self.q_mat.inverse();
        let st = self.s * self.t;
        let mut out = Vec::new();
        let mut push = |name: String, error: f64| out.push(IdentityCheck { name, error });
        let pt = |m: &MoebiusMap, x: f64| m.apply(x).finite().unwrap_or(f64::NAN);

        push("T^2 = Id".into(), (self.t * self.t).projective_distance(&id));
        push("(ST)^q = Id".into(), st.pow(q).projective_distance(&id));
        push("R^n = Id".into(), self.r.pow(n).projective_distance(&id));
        push("U^2 = R".into(), (self.u * self.u).projective_distance(&self.r));
        push(
            "QSQ^-1 = P".into(),
            (self.q_mat * self.s * qi).projective_distance(&self.p),
        );
        push(
            "QTSQ^-1 = U".into(),
            (self.q_mat * self.t * self.s * qi).projective_distance(&self.u),
        );
        push(
            "QTSTQ^-1 = RP^-1".into(),
            (self.q_mat * self.t * self.s * self.t * qi)
                .projective_distance(&(self.r * self.p.inverse())),
        );
        push("(ST)^n.1 = -1".into(), (pt(&st.pow(n), 1.0) + 1.0).abs());
        push(
            "R.(-mu/2) = mu/2".into(),
            (pt(&self.r, -self.mu / 2.0) - self.mu / 2.0).abs(),
        );
        push(
            "mu + 1/Q1 = Q1".into(),
            (self.mu + 1.0 / self.q1 - self.q1).abs(),
        );
        push(
            "Q.1 = Q1".into(),
            (pt(&self.q_mat, 1.0) - self.q1).abs(),
        );
        push(
            "alpha*gamma = (mu/2)^2".into(),
            (self.alpha * self.gamma - self.mu * self.mu / 4.0).abs(),
        );
        push(
            "delta_0 = -lambda-1".into(),
            (self.delta[0] + self.lambda + 1.0).abs(),
        );
        push(
            "delta_{n-2} = -1/(lambda-1)".into(),
            (self.delta[(n - 2) as usize] + 1.0 / (self.lambda - 1.0)).abs(),
        );
        push(
            "phi_0 = -lambda/2".into(),
            (self.phi[0] + self.lambda / 2.0).abs(),
        );
        for (j, &phi) in self.phi.iter().enumerate() {
            let want = (j as f64 * self.theta).tan();
            push(format!("Q.phi_{j} = tan(j pi/q)"), (pt(&self.q_mat, phi) - want).abs());
        }
        for (j, &dj) in self.delta.iter().enumerate() {
            let uq = self.u_power_q1(j as i64);
            push(format!("Q.delta_{j} = -U^j.Q1"), (pt(&self.q_mat, dj) + uq).abs());
            let pq = self.p.inverse() * self.q_mat;
            push(
                format!("P^-1 Q.(-delta_{j}) = U^j.Q1"),
                (pt(&pq, -dj) - uq).abs(),
            );
        }
        // Scale-aware comparisons for the unbounded sequence values.
        for j in 1..=self.n as usize {
            let x = self.r_power(-(j as i64)).apply(self.mu / 2.0);
            let err = match x {
                ExtendedReal::Finite(v) => (v - self.d(j)).abs() / (1.0 + v.abs()),
                ExtendedReal::Infinity => f64::INFINITY,
            };
            push(format!("d_{j} = R^-j.mu/2"), err);
        }
        for j in 1..self.n as usize {
            let x = self.r_power(-(j as i64)).act(ExtendedReal::Infinity);
            let err = match x {
                ExtendedReal::Finite(v) => (v - self.c(j)).abs() / (1.0 + v.abs()),
                ExtendedReal::Infinity => f64::INFINITY,
            };
            push(format!("c_{j} = R^-j.inf"), err);
        }
        let ordered = self
            .d
            .iter()
            .zip(self.c.iter())
            .all(|(d, c)| d < c)
            && self.c.iter().zip(self.d[1..].iter()).all(|(c, d)| c < d);
        push("d_1 < c_1 < ... < d_n".into(), if ordered { 0.0 } else { 1.0 });
        push(
            "(PR^-1)^1 closed form".into(),
            self.parabolic_right(1)
                .projective_distance(&(self.p * self.r.inverse())),
        );
        push(
            "(P^-1 R)^1 closed form".into(),
            self.parabolic_left(1)
                .projective_distance(&(self.p.inverse() * self.r)),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_q() {
        for q in [0, 2, 4, 5, 7, 9] {
            assert!(matches!(GroupContext::new(q), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn q8_constants() {
        // Values from a 30-digit evaluation of 2cos(π/8), 2cot(π/8), cot(π/16).
        let ctx = GroupContext::new(8).unwrap();
        assert_abs_diff_eq!(ctx.lambda, 1.847_759_065_022_573_5, epsilon = 1e-14);
        assert_abs_diff_eq!(ctx.mu, 4.828_427_124_746_19, epsilon = 1e-13);
        assert_abs_diff_eq!(ctx.q1, 5.027_339_492_125_848, epsilon = 1e-13);
        assert_abs_diff_eq!(ctx.alpha, 1.320_377_241_017_040_7, epsilon = 1e-12);
        assert_abs_diff_eq!(ctx.gamma, 4.414_213_562_373_095, epsilon = 1e-12);
    }

    #[test]
    fn identity_suite_small_q() {
        for q in [6, 8, 10, 12, 16] {
            let ctx = GroupContext::new(q).unwrap();
            for c in ctx.identity_checks() {
                assert!(c.error <= 1e-10, "q={q} {}: {:e}", c.name, c.error);
            }
        }
    }

    #[test]
    fn generator_actions() {
        let ctx = GroupContext::new(8).unwrap();
        assert_eq!(ctx.s.apply(0.0), ExtendedReal::Finite(ctx.lambda));
        assert!(ctx.c(1) > ctx.d(1));
        assert!(ctx.rho > 0.0);
    }

    #[test]
    fn parabolic_powers_match_products() {
        let ctx = GroupContext::new(10).unwrap();
        let pr = ctx.p * ctx.r.inverse();
        for l in [0, 1, 2, 5, 17, -3] {
            assert!(ctx.parabolic_right(l).projective_eq(&pr.pow(l), 1e-10));
            let pl = ctx.p.inverse() * ctx.r;
            assert!(ctx.parabolic_left(l).projective_eq(&pl.pow(l), 1e-10));
        }
    }

    proptest! {
        #[test]
        fn quarter_turn_is_negative_reciprocal(k in 2u32..8, x in -50.0..50.0f64) {
            prop_assume!(x.abs() > 1e-3);
            let q = 4 * k;
            let ctx = GroupContext::new(q).unwrap();
            let y = ctx.r_power(i64::from(q / 4)).apply(x).finite().unwrap();
            prop_assert!((y + 1.0 / x).abs() <= 1e-9 * (1.0 + 1.0 / x.abs()));
        }
    }
}
