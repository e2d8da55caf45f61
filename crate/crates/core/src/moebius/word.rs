//! Exact arithmetic in the conjugated Hecke group.
//!
//! `Q H_q Q⁻¹` is the free product of `⟨V⟩ ≅ C₂` and `⟨U⟩ ≅ C_q` with
//! `V = UP⁻¹`, so every element has a unique reduced form
//! `U^{e₀} V U^{e₁} V ⋯ V U^{e_m}` with `0 < e_i < q` for the inner exponents.
//! Equality of group elements is then a comparison of exponent lists.

use super::{GroupContext, MoebiusMap};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeckeWord {
    q: u32,
    /// `e₀, …, e_m`; one more entry than there are `V` letters.
    exps: Vec<u32>,
}

impl HeckeWord {
    pub fn identity(q: u32) -> Self {
        HeckeWord { q, exps: vec![0] }
    }

    /// Number of `V` letters in the reduced form.
    pub fn v_count(&self) -> usize {
        self.exps.len() - 1
    }

    /// Right multiplication by `U^a`.
    pub fn mul_u(&mut self, a: i64) -> &mut Self {
        let q = i64::from(self.q);
        let last = self.exps.last_mut().expect("never empty");
        *last = (i64::from(*last) + a).rem_euclid(q) as u32;
        self
    }

    /// Right multiplication by `V`.
    pub fn mul_v(&mut self) -> &mut Self {
        if self.exps.len() > 1 && *self.exps.last().expect("never empty") == 0 {
            self.exps.pop();
        } else {
            self.exps.push(0);
        }
        self
    }

    /// Right multiplication by `P^p`, using `P = VU`.
    pub fn mul_p(&mut self, p: i64) -> &mut Self {
        for _ in 0..p.unsigned_abs() {
            if p > 0 {
                self.mul_v().mul_u(1);
            } else {
                self.mul_u(-1).mul_v();
            }
        }
        self
    }

    /// The matrix of the word, up to sign.
    pub fn to_matrix(&self, ctx: &GroupContext) -> MoebiusMap {
        let v = ctx.u * ctx.p.inverse();
        let mut m = ctx.rotation_power(i64::from(self.exps[0]));
        for &e in &self.exps[1..] {
            m = m * v * ctx.rotation_power(i64::from(e));
        }
        m
    }
}
