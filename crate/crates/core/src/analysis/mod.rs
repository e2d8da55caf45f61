//! Entropy estimates, return-time comparisons on the intersection domain and
//! the slow-return experiment.

mod entropy;
mod returns;

pub use entropy::{entropy_estimate, EntropyEstimate, ENTROPY_BATCHES, MIN_ENTROPY_STEPS};
pub use returns::{
    agreement_intervals, beta, compare_first_returns, induction_index, random_starts,
    slow_return_experiment, ComparisonReport, ReturnRecord, SlowReturnRow, AGREEMENT_TOL,
    DEFAULT_MAX_ITERS,
};
