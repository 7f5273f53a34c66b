//! Second moment and scaled variance of motif densities.

use serde::{Deserialize, Serialize};

use crate::combinatorics::merged::cached_merged_copy_catalog;
use crate::combinatorics::provider::{expected_motif_density, DensityMethod, LinkProvider};
use crate::error::{Error, Result};
use crate::motif::Motif;
use crate::util::binom_f64;

/// How the top level `k = 2p` of the merged-copy sum is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondMomentMode {
    /// Every class in the catalog, including `k = 2p`.
    FullCatalog,
    /// Two copies on disjoint vertex sets are independent under any
    /// graphon, so `Σ_W N(W) D(W) P_W = (2p)! (N(R) P_R)^2` at `k = 2p`.
    FactorDisjoint,
}

/// `E[P_R(G_n)^2]` for `G_n` drawn from the provider's link function.
pub fn second_moment(
    provider: &LinkProvider<'_>,
    motif: &Motif,
    n: usize,
    mode: SecondMomentMode,
    method: DensityMethod,
) -> Result<f64> {
    let parts = moment_parts(provider, motif, n, mode, method)?;
    Ok(parts.lower + parts.top_factor * parts.mean * parts.mean)
}

struct MomentParts {
    mean: f64,
    /// Normalized contribution of `k < 2p` (all `k` in full-catalog mode).
    lower: f64,
    /// `E[P^2] = lower + top_factor · P^2`; `n^(2p) / (n^(p))^2` when
    /// factoring, else 0.
    top_factor: f64,
    /// `top_factor - 1`, computed without cancellation.
    top_excess: f64,
}

fn moment_parts(
    provider: &LinkProvider<'_>,
    motif: &Motif,
    n: usize,
    mode: SecondMomentMode,
    method: DensityMethod,
) -> Result<MomentParts> {
    let p = motif.vertex_count();
    if n < p {
        return Err(Error::MotifTooLarge { motif: p, graph: n });
    }
    let catalog = cached_merged_copy_catalog(motif)?;
    let mean = expected_motif_density(provider, motif, method)?.value;
    let norm = binom_f64(n, p) * crate::util::factorial(p) as f64 * motif.labeled_copy_count() as f64;
    let mut lower = 0.0;
    for level in catalog.levels() {
        let k = level.vertices;
        if k > n || (k == 2 * p && mode == SecondMomentMode::FactorDisjoint) {
            continue;
        }
        let mut s = 0.0;
        for e in &level.entries {
            let pw = expected_motif_density(provider, &e.motif, method)?.value;
            s += e.labeled_copies as f64 * e.coefficient as f64 * pw;
        }
        lower += binom_f64(n, k) / norm * (s / norm);
    }
    let (top_factor, top_excess) = if mode == SecondMomentMode::FactorDisjoint && 2 * p <= n {
        disjoint_factor(n, p)
    } else {
        (0.0, -1.0)
    };
    Ok(MomentParts {
        mean,
        lower,
        top_factor,
        top_excess,
    })
}

/// `c = n^(2p) / (n^(p))^2` and `c - 1`, the latter from exact integers.
fn disjoint_factor(n: usize, p: usize) -> (f64, f64) {
    let falling = |from: u128, len: usize| (0..len as u128).map(|i| from - i).product::<u128>();
    let n = n as u128;
    let a = falling(n, p);
    let b = falling(n - p as u128, p);
    // c - 1 = a (b - a) / a^2 = (b - a) / a, with b < a.
    let excess = -((a - b) as f64) / a as f64;
    (b as f64 / a as f64, excess)
}

/// `σ²_R = n / ρ^(2|E(R)|) · Var(P_R(G_n))` with `ρ` the provider's edge
/// density, using exact `P_W` and the disjoint-copy factorization.
pub fn variance_sigma2(provider: &LinkProvider<'_>, motif: &Motif, n: usize) -> Result<f64> {
    variance_sigma2_with(provider, motif, n, SecondMomentMode::FactorDisjoint, DensityMethod::Exact)
}

pub fn variance_sigma2_with(
    provider: &LinkProvider<'_>,
    motif: &Motif,
    n: usize,
    mode: SecondMomentMode,
    method: DensityMethod,
) -> Result<f64> {
    let parts = moment_parts(provider, motif, n, mode, method)?;
    let var = parts.lower + parts.top_excess * parts.mean * parts.mean;
    let rho = provider.edge_density()?;
    if rho <= 0.0 {
        return Err(Error::invalid("variance scaling needs a positive edge density"));
    }
    Ok(n as f64 * var / rho.powi(2 * motif.edge_count() as i32))
}
