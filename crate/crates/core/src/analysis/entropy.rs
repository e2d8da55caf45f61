use crate::error::{Error, Result};
use crate::maps::{self, MapKind};
use crate::moebius::GroupContext;

/// Shortest orbit accepted by [`entropy_estimate`].
pub const MIN_ENTROPY_STEPS: usize = 10_000;
/// Number of batches behind the standard error.
pub const ENTROPY_BATCHES: usize = 100;
/// Restarts tolerated before an orbit is declared dead.
const MAX_RESTARTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub h: f64,
    /// Batch-means standard error.
    pub stderr: f64,
    pub steps: usize,
    /// Times the orbit hit a discontinuity and was restarted nearby.
    pub restarts: usize,
}

/// Birkhoff average of the return time `τ` along the orbit of `x0`.
///
/// By Rohlin's formula this is the entropy of the ergodic invariant measure.
/// An orbit that hits a discontinuity is restarted from its last point moved
/// by a tiny amount; after `MAX_RESTARTS` restarts it is declared dead.
pub fn entropy_estimate(ctx: &GroupContext, map: MapKind, x0: f64, n: usize) -> Result<EntropyEstimate> {
    if n < MIN_ENTROPY_STEPS {
        return Err(Error::InvalidParameter(format!(
            "entropy estimate needs at least {MIN_ENTROPY_STEPS} steps, got {n}"
        )));
    }
    let (lo, hi) = map.interval(ctx);
    let per_batch = n / ENTROPY_BATCHES;
    let mut batch_sums = vec![0.0; ENTROPY_BATCHES];
    let mut x = x0;
    let mut restarts = 0;
    let mut i = 0;
    while i < per_batch * ENTROPY_BATCHES {
        match maps::step(ctx, map, x) {
            Ok(s) => {
                batch_sums[i / per_batch] += s.tau;
                x = s.image;
                i += 1;
            }
            Err(e) => {
                restarts += 1;
                if restarts > MAX_RESTARTS {
                    return Err(Error::OrbitTerminated {
                        steps: i,
                        cause: Box::new(e),
                    });
                }
                let nudge = 1e-9 * restarts as f64;
                x = if x + nudge < hi { x + nudge } else { x - nudge }.clamp(lo, hi);
            }
        }
    }
    let means: Vec<f64> = batch_sums.iter().map(|s| s / per_batch as f64).collect();
    let b = ENTROPY_BATCHES as f64;
    let h = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - h).powi(2)).sum::<f64>() / (b - 1.0);
    Ok(EntropyEstimate {
        h,
        stderr: (var / b).sqrt(),
        steps: i,
        restarts,
    })
}
