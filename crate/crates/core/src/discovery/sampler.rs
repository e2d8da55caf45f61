use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::planar::PlanarPoint;

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

/// Uniform points of a domain by rejection from per-bin bounding boxes.
///
/// With `y_cap` set, the domain is first cut to `|y| <= y_cap`; this is how
/// infinite-area domains are sampled.
#[derive(Debug, Clone)]
pub struct DomainSampler {
    domain: Domain,
    cells: Vec<Cell>,
    pick: WeightedIndex<f64>,
    y_cap: Option<f64>,
}

impl DomainSampler {
    pub fn new(domain: &Domain, bins: usize, y_cap: Option<f64>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("sampler needs at least one bin".into()));
        }
        let cap = y_cap.unwrap_or(f64::INFINITY);
        let w = (domain.x_hi - domain.x_lo) / bins as f64;
        let mut cells = Vec::with_capacity(bins);
        for i in 0..bins {
            let x0 = domain.x_lo + w * i as f64;
            let x1 = if i + 1 == bins { domain.x_hi } else { x0 + w };
            let (lo, hi) = domain.y_range(x0, x1);
            let (y0, y1) = (lo.max(-cap), hi.min(cap));
            if !(y0.is_finite() && y1.is_finite()) {
                return Err(Error::InfiniteArea(format!(
                    "{} is unbounded over [{x0}, {x1}); set a y cap",
                    domain.kind
                )));
            }
            cells.push(Cell { x0, x1, y0, y1 });
        }
        let weights: Vec<f64> = cells.iter().map(|c| (c.x1 - c.x0) * (c.y1 - c.y0)).collect();
        let pick = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidParameter(format!("sampler weights: {e}")))?;
        Ok(DomainSampler {
            domain: domain.clone(),
            cells,
            pick,
            y_cap,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlanarPoint {
        let cap = self.y_cap.unwrap_or(f64::INFINITY);
        loop {
            let c = self.cells[self.pick.sample(rng)];
            let x = rng.random_range(c.x0..c.x1);
            let y = c.y0 + (c.y1 - c.y0) * rng.random::<f64>();
            if y.abs() <= cap && y > self.domain.lower_at(x) && y < self.domain.upper_at(x) {
                return PlanarPoint::new(x, y);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_domain, DomainKind};
    use crate::exec::batch_rng;
    use crate::moebius::GroupContext;

    #[test]
    fn hit_rate_estimates_area() {
        // Fraction of samples left of x = 0 equals the area share there.
        let ctx = GroupContext::new(8).unwrap();
        let d = build_domain(&ctx, DomainKind::OmegaVeech).unwrap();
        let s = DomainSampler::new(&d, 256, None).unwrap();
        let mut rng = batch_rng(3, 0);
        let n = 200_000;
        let mut in_strip = 0;
        for _ in 0..n {
            let p = s.sample(&mut rng);
            if p.y > 0.0 && p.x < 0.0 {
                in_strip += 1;
            }
        }
        // ∫_{-μ/2}^{0} upper(x) dx split at -α.
        let h = ctx.mu / 2.0;
        let exact = ((-ctx.alpha + ctx.gamma) / (-h + ctx.gamma)).ln() + (h / (h - ctx.alpha)).ln();
        let area = d.area_analytic().unwrap();
        let frac = f64::from(in_strip) / n as f64;
        assert!((frac - exact / area).abs() < 0.005, "{frac} vs {}", exact / area);
    }

    #[test]
    fn unbounded_domain_needs_cap() {
        let ctx = GroupContext::new(8).unwrap();
        let d = build_domain(&ctx, DomainKind::OmegaAdd).unwrap();
        assert!(DomainSampler::new(&d, 64, None).is_err());
        let s = DomainSampler::new(&d, 64, Some(30.0)).unwrap();
        let mut rng = batch_rng(1, 0);
        for _ in 0..1000 {
            let p = s.sample(&mut rng);
            assert!(p.y.abs() <= 30.0 && p.y < d.upper_at(p.x) && p.y > d.lower_at(p.x));
        }
    }
}
