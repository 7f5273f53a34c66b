//! A uniform handle on the three link functions: the true graphon, the
//! empirical graphon and the fitted histogram.

use serde::{Deserialize, Serialize};

use crate::census::motif_density;
use crate::combinatorics::collision::merge_collision_catalog;
use crate::error::{Error, Result};
use crate::estimators::{EmpiricalGraphon, HistogramModel};
use crate::graph::Graph;
use crate::graphon::{
    monte_carlo_pattern, true_motif_probability, Estimate, GraphonSpec, ProbabilityMethod, StepLink, EXPANSION_MAX_NODES,
};
use crate::motif::Motif;

/// Largest pattern for exact densities under the empirical graphon.
pub const EMPIRICAL_EXACT_MAX_NODES: usize = 4;

#[derive(Clone, Debug)]
pub enum LinkProvider<'a> {
    TrueGraphon { spec: GraphonSpec, rho: f64 },
    Empirical(&'a Graph),
    Histogram(&'a HistogramModel),
}

/// How to evaluate `P_W` under a provider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum DensityMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

impl LinkProvider<'_> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LinkProvider::TrueGraphon { .. } => "true-graphon",
            LinkProvider::Empirical(_) => "empirical",
            LinkProvider::Histogram(_) => "histogram",
        }
    }

    /// `P_{K2}` of the link function.
    pub fn edge_density(&self) -> Result<f64> {
        match self {
            LinkProvider::TrueGraphon { spec, rho } => {
                spec.check_rho(*rho)?;
                Ok(rho * spec.integral())
            }
            LinkProvider::Empirical(g) => Ok(EmpiricalGraphon::new(g).edge_density()),
            LinkProvider::Histogram(m) => Ok(m.edge_density()),
        }
    }

    /// Link value at latent positions `(u, v)`.
    pub fn link(&self, u: f64, v: f64) -> f64 {
        match self {
            LinkProvider::TrueGraphon { spec, rho } => (rho * spec.w(u, v)).min(1.0),
            LinkProvider::Empirical(g) => EmpiricalGraphon::new(g).link(u, v),
            LinkProvider::Histogram(m) => m.link(u, v),
        }
    }

    /// Step-function form, when the link has one. The empirical graphon
    /// has one atom per node.
    pub fn step_link(&self) -> Option<StepLink> {
        match self {
            LinkProvider::TrueGraphon { spec, rho } => spec.step_link(*rho),
            LinkProvider::Empirical(g) => Some(EmpiricalGraphon::new(g).step_link()),
            LinkProvider::Histogram(m) => Some(m.step_link()),
        }
    }
}

/// `P_W` under the provider.
///
/// Exact availability: histogram always (sum over block assignments);
/// empirical for `p <= 4` through merge collisions; true graphon in closed
/// form for constant and block kinds and by polynomial expansion for the
/// additive kind (`p <= 6`).
pub fn expected_motif_density(provider: &LinkProvider<'_>, motif: &Motif, method: DensityMethod) -> Result<Estimate> {
    match method {
        DensityMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("monte-carlo needs at least one sample"));
            }
            provider.edge_density()?;
            Ok(monte_carlo_pattern(motif, samples, seed, |u, v| provider.link(u, v)))
        }
        DensityMethod::Exact => match provider {
            LinkProvider::TrueGraphon { spec, rho } => {
                let method = match spec {
                    GraphonSpec::Additive if motif.vertex_count() <= EXPANSION_MAX_NODES => ProbabilityMethod::Expansion,
                    _ => ProbabilityMethod::ClosedForm,
                };
                true_motif_probability(spec, *rho, motif, method)
            }
            LinkProvider::Empirical(g) => empirical_pattern_probability(g, motif).map(Estimate::exact),
            LinkProvider::Histogram(m) => Ok(Estimate::exact(m.step_link().pattern_probability(motif))),
        },
    }
}

/// Exact `P_S(ĥ_adj)`.
///
/// Of the `n^q` maps from motif vertices to nodes, group by which vertices
/// coincide. A partition `π` with `j` cells contributes
/// `n^(j) / n^q · P_{S/π}(G)` when it is consistent, and 0 otherwise.
pub fn empirical_pattern_probability(graph: &Graph, motif: &Motif) -> Result<f64> {
    let q = motif.vertex_count();
    if q > EMPIRICAL_EXACT_MAX_NODES {
        return Err(Error::UnsupportedMethod(format!(
            "exact empirical-graphon densities are limited to {EMPIRICAL_EXACT_MAX_NODES} vertices, got {q}"
        )));
    }
    let n = graph.node_count();
    let catalog = merge_collision_catalog(motif)?;
    let nf = n as f64;
    let mut total = 0.0;
    for level in catalog.levels() {
        let j = level.cells;
        if j > n {
            continue;
        }
        // n^(j) / n^q
        let mut weight = 1.0;
        for i in 0..j {
            weight *= (nf - i as f64) / nf;
        }
        weight /= nf.powi((q - j) as i32);
        for entry in level.entries.iter().filter(|e| e.consistent > 0) {
            let density = match &entry.quotient {
                Some(w) => motif_density(graph, w)?.raw_density,
                None => 1.0,
            };
            total += weight * entry.consistent as f64 * density;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{sample_graph, SparsitySchedule};

    #[test]
    fn histogram_single_block() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = HistogramModel::from_assignment(&g, 1, vec![0; 4]).unwrap();
        let q = m.q(0, 0);
        let v = expected_motif_density(&LinkProvider::Histogram(&m), &Motif::triangle(), DensityMethod::Exact).unwrap();
        assert!((v.value - q.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn empirical_edge_density() {
        let (g, _) = sample_graph(&GraphonSpec::Additive, &SparsitySchedule::constant(0.3), 40, 8).unwrap();
        let p = LinkProvider::Empirical(&g);
        let v = expected_motif_density(&p, &Motif::k2(), DensityMethod::Exact).unwrap().value;
        let n = 40.0;
        assert!((v - g.edge_density() * (n - 1.0) / n).abs() < 1e-15);
        assert!((p.edge_density().unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn empirical_exact_matches_atom_sum() {
        // Direct sum over all maps into the n atoms.
        let (g, _) = sample_graph(&GraphonSpec::Additive, &SparsitySchedule::constant(0.45), 9, 21).unwrap();
        let step = EmpiricalGraphon::new(&g).step_link();
        for p in 2..=4 {
            for m in crate::motif::all_motifs(p).unwrap() {
                let exact = empirical_pattern_probability(&g, &m).unwrap();
                let direct = step.pattern_probability(&m);
                assert!((exact - direct).abs() < 1e-14, "{m}: {exact} vs {direct}");
            }
        }
        assert!(empirical_pattern_probability(&g, &Motif::path(5)).is_err());
    }

    #[test]
    fn empirical_exact_agrees_with_monte_carlo() {
        let (g, _) = sample_graph(&GraphonSpec::Additive, &SparsitySchedule::constant(0.3), 60, 4).unwrap();
        let p = LinkProvider::Empirical(&g);
        let m = Motif::two_star();
        let exact = expected_motif_density(&p, &m, DensityMethod::Exact).unwrap().value;
        let mc = expected_motif_density(&p, &m, DensityMethod::MonteCarlo { samples: 1_000_000, seed: 5 }).unwrap();
        assert!((exact - mc.value).abs() < 3.0 * mc.std_error, "{exact} vs {mc:?}");
    }

    #[test]
    fn true_graphon_routes() {
        let c = LinkProvider::TrueGraphon {
            spec: GraphonSpec::Constant,
            rho: 0.4,
        };
        assert!((expected_motif_density(&c, &Motif::k2(), DensityMethod::Exact).unwrap().value - 0.4).abs() < 1e-15);
        let a = LinkProvider::TrueGraphon {
            spec: GraphonSpec::Additive,
            rho: 0.3,
        };
        assert!((expected_motif_density(&a, &Motif::k2(), DensityMethod::Exact).unwrap().value - 0.3).abs() < 1e-15);
        assert!(expected_motif_density(&a, &Motif::path(7), DensityMethod::Exact).is_err());
        assert_eq!(a.edge_density().unwrap(), 0.3);
    }
}
