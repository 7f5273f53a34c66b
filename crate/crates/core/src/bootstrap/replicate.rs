//! Single bootstrap graphs.

use rand::distributions::Open01;
use rand::Rng;

use crate::estimators::{node_of, HistogramModel};
use crate::graph::{Graph, GraphBuilder};
use crate::rng;

/// Resamples `m` vertices with replacement and copies their adjacencies.
/// Copies of the same vertex are never joined.
pub fn empirical_bootstrap_replicate(graph: &Graph, m: usize, seed: u64) -> Graph {
    let n = graph.node_count();
    let mut rng = rng::from_seed(seed);
    let picks: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
    resampled_graph(graph, &picks)
}

/// Graph on `picks.len()` nodes with `i ~ j` iff `picks[i] ~ picks[j]` in
/// `graph` (and `picks[i] != picks[j]`).
pub fn resampled_graph(graph: &Graph, picks: &[usize]) -> Graph {
    let mut builder = GraphBuilder::new(picks.len());
    for (i, &a) in picks.iter().enumerate() {
        for (j, &b) in picks.iter().enumerate().skip(i + 1) {
            if a != b && graph.has_edge(a, b) {
                builder.add(i, j);
            }
        }
    }
    builder.finish()
}

/// Draws `n` latent uniforms, maps each to its block through the fitted
/// assignment, and joins pairs independently with probability `Q_ab`.
pub fn histogram_bootstrap_replicate(model: &HistogramModel, n: usize, seed: u64) -> Graph {
    let source = model.node_count();
    let mut rng = rng::from_seed(seed);
    let blocks: Vec<usize> = (0..n)
        .map(|_| model.assignment()[node_of(source, rng.sample(Open01))])
        .collect();
    let mut builder = GraphBuilder::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < model.q(blocks[i], blocks[j]) {
                builder.add(i, j);
            }
        }
    }
    builder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{sample_graph, GraphonSpec, SparsitySchedule};

    #[test]
    fn distinct_picks_copy_the_induced_subgraph() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4), (0, 4)]).unwrap();
        let picks = [4, 0, 1];
        assert_eq!(resampled_graph(&g, &picks), g.induced(&picks));
        let repeated = resampled_graph(&g, &[0, 0, 1]);
        assert!(!repeated.has_edge(0, 1));
        assert!(repeated.has_edge(0, 2) && repeated.has_edge(1, 2));
    }

    #[test]
    fn empirical_mean_edge_density() {
        let (g, _) = sample_graph(&GraphonSpec::Constant, &SparsitySchedule::constant(0.3), 30, 1).unwrap();
        let n = 30.0;
        let target = g.edge_density() * (n - 1.0) / n;
        let reps = 10_000;
        let xs: Vec<f64> = (0..reps)
            .map(|k| empirical_bootstrap_replicate(&g, 30, rng::derive_seed(7, "test", k)).edge_density())
            .collect();
        let (mean, var) = crate::util::mean_var(&xs);
        let se = (var / reps as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target} (se {se})");
    }

    #[test]
    fn histogram_extremes_and_density() {
        let zeros = HistogramModel::from_assignment(&Graph::empty(4), 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(histogram_bootstrap_replicate(&zeros, 20, 3).edge_count(), 0);
        let ones = HistogramModel::from_assignment(&Graph::complete(4), 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(histogram_bootstrap_replicate(&ones, 20, 3), Graph::complete(20));
        let (data, _) = sample_graph(&GraphonSpec::Constant, &SparsitySchedule::constant(0.3), 500, 2).unwrap();
        let flat = HistogramModel::from_assignment(&data, 1, vec![0; 500]).unwrap();
        let q = flat.q(0, 0);
        let rep = histogram_bootstrap_replicate(&flat, 500, 9);
        let sd = (q * (1.0 - q) / (500.0 * 499.0 / 2.0)).sqrt();
        assert!((rep.edge_density() - q).abs() < 3.0 * sd);
        assert_eq!(rep, histogram_bootstrap_replicate(&flat, 500, 9));
    }
}
