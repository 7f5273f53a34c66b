//! Bootstrap resampling for exchangeable random graphs.
//!
//! The crate provides two resampling schemes for networks generated by a
//! graphon `h_n = rho_n * w`: the *empirical graphon* (resample vertices with
//! replacement and copy their adjacencies) and a *balanced histogram*
//! stochastic block model fitted by least squares. Around them sit induced
//! motif counting, exact expected motif densities under fitted link
//! functions, the merged-copy second-moment calculus behind the variance of
//! motif densities, and a small experiment harness.
//!
//! Module map:
//!
//! * [`graph`], [`motif`], [`census`]: graphs, small patterns, canonical
//!   labels and induced-subgraph counting.
//! * [`graphon`]: graphon catalog, sparsity schedules, sampling and true
//!   motif probabilities.
//! * [`estimators`]: empirical graphon and the balanced histogram fit.
//! * [`combinatorics`]: merged copy sets, merge collisions, link providers,
//!   the variance formula and its brute-force oracle.
//! * [`bootstrap`]: replicate generation, intervals and KS distances.
//! * [`experiment`]: config-driven experiments writing CSV/JSON reports.

pub mod bootstrap;
pub mod census;
pub mod combinatorics;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod graph;
pub mod graphon;
pub mod motif;
pub mod rng;
pub(crate) mod util;

pub use error::{Error, Result};
pub use graph::Graph;
pub use motif::{CanonicalKey, Motif};
