//! The empirical graphon: the adjacency matrix read as a step function.

use crate::graph::Graph;
use crate::graphon::StepLink;

/// Node index `⌈n u⌉` (0-based) for `u` in `(0, 1]`; `u = 0` maps to the
/// first node.
#[inline]
pub fn node_of(n: usize, u: f64) -> usize {
    ((u * n as f64).ceil() as usize).clamp(1, n) - 1
}

/// `ĥ_adj(u, v) = A_{⌈nu⌉ ⌈nv⌉}`, zero when both land on the same node.
pub fn empirical_link(graph: &Graph, u: f64, v: f64) -> u8 {
    let n = graph.node_count();
    let (i, j) = (node_of(n, u), node_of(n, v));
    u8::from(i != j && graph.has_edge(i, j))
}

/// The empirical graphon of an observed graph.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalGraphon<'a> {
    source: &'a Graph,
}

impl<'a> EmpiricalGraphon<'a> {
    pub fn new(source: &'a Graph) -> Self {
        EmpiricalGraphon { source }
    }

    pub fn source(&self) -> &'a Graph {
        self.source
    }

    pub fn link(&self, u: f64, v: f64) -> f64 {
        f64::from(empirical_link(self.source, u, v))
    }

    /// `P_{K2}(ĥ_adj) = rho_hat (n - 1) / n`: of the `n^2` ordered node pairs
    /// the `n` coincident ones never connect.
    pub fn edge_density(&self) -> f64 {
        let n = self.source.node_count() as f64;
        self.source.edge_density() * (n - 1.0) / n
    }

    /// Step-function form with one atom per node. Exact sums over it cost
    /// `n^p`, so this is only for small graphs (oracles and tests).
    pub fn step_link(&self) -> StepLink {
        let n = self.source.node_count();
        let mut probs = vec![0.0; n * n];
        for (u, v) in self.source.edges() {
            probs[u * n + v] = 1.0;
            probs[v * n + u] = 1.0;
        }
        StepLink::new(vec![1.0 / n as f64; n], probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples_on_path3() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(empirical_link(&g, 0.1, 0.5), 1);
        assert_eq!(empirical_link(&g, 0.1, 0.9), 0);
        assert_eq!(empirical_link(&g, 0.1, 0.2), 0);
    }

    #[test]
    fn node_mapping_boundaries() {
        assert_eq!(node_of(4, 0.25), 0);
        assert_eq!(node_of(4, 0.2500001), 1);
        assert_eq!(node_of(4, 1.0), 3);
        assert_eq!(node_of(4, 0.0), 0);
    }

    #[test]
    fn k2_density_of_step_link() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let e = EmpiricalGraphon::new(&g);
        assert!((e.step_link().edge_density() - e.edge_density()).abs() < 1e-15);
    }
}
