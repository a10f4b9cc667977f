//! Robust estimation of central and standardized moments.
//!
//! Every central moment can be written as the expectation of a symmetric
//! kernel over `k` independent draws. Evaluating that kernel over all
//! `C(n, k)` combinations of a sample gives a pseudo-sample whose plain mean
//! is the minimum-variance unbiased estimator of the moment. Replacing the
//! mean with a trimmed (or otherwise weighted) L-estimator over the sorted
//! pseudo-sample gives the weighted Hodges-Lehmann `k`th central moment, a
//! moment estimator with a tunable breakdown point.
//!
//! Modules, bottom-up:
//!
//! - [`kernels`]: the central-moment kernel and its boundary identities.
//! - [`lstat`]: L-estimators over a sorted sequence and the breakdown mapping.
//! - [`pseudosample`]: exact or Monte Carlo materialization of the pseudo-sample.
//! - [`estimators`]: the moment estimators, the two trimmed standard deviations,
//!   and closed-form comparators.
//! - [`distributions`]: parametric families, quantile averages, congruence.
//! - [`verify`]: seeded Monte Carlo probes of the kernel distributions.
//! - [`report`]: the versioned record envelope used for machine-readable output.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod lstat;
pub mod pseudosample;
pub mod report;
pub mod verify;

mod numeric;

pub use distributions::{CongruenceVerdict, Family, MeanValue, Verdict};
pub use error::{MomentError, Result};
pub use estimators::{MomentEstimate, Sample};
pub use kernels::KernelOrder;
pub use lstat::{LEstimatorSpec, TrimSpec, WeightScheme};
pub use pseudosample::{PlanMode, PseudoPlan};
