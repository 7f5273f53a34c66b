//! Bootstrap replicates, percentile intervals and KS distances.

pub mod engine;
pub mod interval;
pub mod ks;
pub mod replicate;
pub mod truth;

pub use engine::{
    run_bootstrap, BootstrapMethod, BootstrapPlan, BootstrapResult, CenterMethod, MotifBootstrap, DEFAULT_REPLICATES,
};
pub use interval::{percentile_interval, Interval};
pub use ks::{ks_normal, ks_two_sample};
pub use replicate::{empirical_bootstrap_replicate, histogram_bootstrap_replicate};
pub use truth::{sampling_distribution_truth, sampling_distribution_truth_many, truth_center, TruthSample};
