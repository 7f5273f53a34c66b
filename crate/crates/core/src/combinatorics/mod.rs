//! Merged copy sets, merge collisions, exact expected densities under link
//! functions, the variance of motif densities and a brute-force oracle.

pub mod collision;
pub mod merged;
pub mod oracle;
pub mod provider;
pub mod variance;

pub use collision::{merge_collision_catalog, CollisionEntry, MergeCollisionCatalog};
pub use merged::{cached_merged_copy_catalog, merge_coefficient, merged_copy_catalog, MergedCopyCatalog, MergedEntry};
pub use oracle::{brute_force_moments, Moments};
pub use provider::{empirical_pattern_probability, expected_motif_density, DensityMethod, LinkProvider};
pub use variance::{second_moment, variance_sigma2, variance_sigma2_with, SecondMomentMode};
