//! Brute-force moments of motif densities on tiny graphs.
//!
//! Enumerates every labeled graph on `n <= 5` nodes and every assignment of
//! the nodes to atoms of the provider's step function; given the atoms,
//! edges are independent. Densities are recomputed by subset enumeration
//! and canonical keys, sharing no code with the census or the merged-copy
//! formula.

use serde::Serialize;

use crate::combinatorics::provider::LinkProvider;
use crate::error::{Error, Result};
use crate::motif::{canonical_key_of_mask, pair_index, Motif};

pub const ORACLE_MAX_NODES: usize = 5;

/// Exact `E[P_R(G_n)]` and `E[P_R(G_n)^2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

const WORK_LIMIT: f64 = 2e8;

pub fn brute_force_moments(provider: &LinkProvider<'_>, motif: &Motif, n: usize) -> Result<Moments> {
    let p = motif.vertex_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::invalid(format!("brute-force moments enumerate graphs on at most {ORACLE_MAX_NODES} nodes, got {n}")));
    }
    if n < p {
        return Err(Error::MotifTooLarge { motif: p, graph: n });
    }
    let step = provider.step_link().ok_or_else(|| {
        Error::UnsupportedMethod(format!(
            "the {} provider has no exact independent-edge structure for enumeration",
            provider.kind_name()
        ))
    })?;
    let atoms = step.atoms();
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
    let graphs = 1usize << pairs.len();
    let assignments = atoms.pow(n as u32);
    if assignments as f64 * graphs as f64 * pairs.len() as f64 > WORK_LIMIT {
        return Err(Error::CensusTooLarge(format!(
            "{assignments} atom assignments times {graphs} graphs is too much to enumerate"
        )));
    }
    let stat: Vec<f64> = (0..graphs).map(|g| subset_density(n, &pairs, g as u32, motif)).collect();

    let mut mean = 0.0;
    let mut second = 0.0;
    let mut assign = vec![0usize; n];
    let mut probs = vec![0.0; pairs.len()];
    for code in 0..assignments {
        let mut c = code;
        let mut weight = 1.0;
        for a in assign.iter_mut() {
            *a = c % atoms;
            c /= atoms;
            weight *= step.weight(*a);
        }
        if weight == 0.0 {
            continue;
        }
        for (slot, &(a, b)) in probs.iter_mut().zip(&pairs) {
            *slot = step.prob(assign[a], assign[b]);
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for (g, &s) in stat.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let mut pg = 1.0;
            for (i, &q) in probs.iter().enumerate() {
                pg *= if g >> i & 1 == 1 { q } else { 1.0 - q };
            }
            m1 += pg * s;
            m2 += pg * s * s;
        }
        mean += weight * m1;
        second += weight * m2;
    }
    Ok(Moments {
        mean,
        second_moment: second,
    })
}

/// `P_R(G)` for the graph whose pair bits are `g`, by checking every
/// `p`-subset.
fn subset_density(n: usize, pairs: &[(usize, usize)], g: u32, motif: &Motif) -> f64 {
    let p = motif.vertex_count();
    let has = |a: usize, b: usize| {
        let i = pairs.iter().position(|&e| e == (a.min(b), a.max(b))).expect("pair");
        g >> i & 1 == 1
    };
    let key = motif.canonical_key();
    let mut hits = 0u64;
    let mut subsets = 0u64;
    for set in 0u32..1 << n {
        if set.count_ones() as usize != p {
            continue;
        }
        subsets += 1;
        let nodes: Vec<usize> = (0..n).filter(|&i| set >> i & 1 == 1).collect();
        let mut mask = 0u32;
        for y in 1..p {
            for x in 0..y {
                if has(nodes[x], nodes[y]) {
                    mask |= 1 << pair_index(x, y);
                }
            }
        }
        hits += u64::from(canonical_key_of_mask(p, mask) == key);
    }
    hits as f64 / (subsets as f64 * motif.labeled_copy_count() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::GraphonSpec;

    #[test]
    fn binomial_edges_by_hand() {
        let c = LinkProvider::TrueGraphon {
            spec: GraphonSpec::Constant,
            rho: 0.5,
        };
        let m = brute_force_moments(&c, &Motif::k2(), 3).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.second_moment - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn merged_copy_identity_and_unbiasedness() {
        use crate::combinatorics::provider::{expected_motif_density, DensityMethod};
        use crate::combinatorics::variance::{second_moment, SecondMomentMode};
        use crate::estimators::HistogramModel;
        use crate::graph::Graph;
        let toy = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let hist = HistogramModel::from_assignment(&toy, 2, vec![0, 1, 1, 0]).unwrap();
        let block = GraphonSpec::block(vec![vec![1.6, 0.4], vec![0.4, 1.2]]).unwrap();
        let providers = [
            LinkProvider::TrueGraphon { spec: GraphonSpec::Constant, rho: 0.3 },
            LinkProvider::TrueGraphon { spec: block, rho: 0.5 },
            LinkProvider::Histogram(&hist),
            LinkProvider::Empirical(&toy),
        ];
        for provider in &providers {
            for motif in [Motif::k2(), Motif::two_star(), Motif::triangle()] {
                for n in [3, 4, 5] {
                    let brute = brute_force_moments(provider, &motif, n).unwrap();
                    let mean = expected_motif_density(provider, &motif, DensityMethod::Exact).unwrap().value;
                    assert!((brute.mean - mean).abs() < 1e-12);
                    for mode in [SecondMomentMode::FullCatalog, SecondMomentMode::FactorDisjoint] {
                        let formula = match second_moment(provider, &motif, n, mode, DensityMethod::Exact) {
                            Ok(v) => v,
                            // Merges on more than four vertices have no exact empirical density.
                            Err(Error::UnsupportedMethod(_)) if matches!(provider, LinkProvider::Empirical(_)) => continue,
                            Err(e) => panic!("{e}"),
                        };
                        let rel = if formula == brute.second_moment { 0.0 } else { ((formula - brute.second_moment) / brute.second_moment).abs() };
                        assert!(rel < 1e-10, "{} {motif} n={n}: {formula} vs {}", provider.kind_name(), brute.second_moment);
                    }
                }
            }
        }
    }

    #[test]
    fn limits() {
        let c = LinkProvider::TrueGraphon {
            spec: GraphonSpec::Constant,
            rho: 0.5,
        };
        assert!(brute_force_moments(&c, &Motif::k2(), 6).is_err());
        assert!(brute_force_moments(&c, &Motif::path(4), 3).is_err());
        let a = LinkProvider::TrueGraphon {
            spec: GraphonSpec::Additive,
            rho: 0.3,
        };
        assert!(matches!(brute_force_moments(&a, &Motif::k2(), 4), Err(Error::UnsupportedMethod(_))));
    }
}
