//! Lyapunov exponents of the Zorich cocycle and deviations of ergodic sums.

mod deviation;
mod lyapunov;

pub use deviation::{
    deviation_scan, fit_loglog, log_grid, visit_counts, DeviationRow, DeviationScan, LoglogFit,
};
pub use lyapunov::{lyapunov_exponents, lyapunov_with, LyapunovConfig, LyapunovEstimate};
