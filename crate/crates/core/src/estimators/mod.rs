//! Link-function estimators fitted to an observed graph.

pub mod empirical;
pub mod histogram;

pub use empirical::{empirical_link, node_of, EmpiricalGraphon};
pub use histogram::{
    estimator_error, fit_histogram, refine_assignment, select_bin_count, EstimatorError, HistogramModel, SearchParams,
};
