//! Balanced-histogram stochastic block model fitted by least squares.
//!
//! Nodes are split into `r` blocks of exactly `n / r` nodes and `Q` holds
//! the block-pair edge frequencies. For a fixed assignment the least-squares
//! `Q` is the block mean; the diagonal `i = j` is excluded from both the
//! means and the loss because `A_ii = 0` is structural, not a draw.
//!
//! The minimization over balanced assignments is done by local search:
//! random balanced starts refined by pairwise swaps that strictly lower the
//! loss. Swap deltas are evaluated exactly in integer arithmetic (see
//! [`Objective`]), so acceptance decisions carry no rounding noise.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::empirical::node_of;
use crate::graph::Graph;
use crate::graphon::{GraphonSpec, LatentSample, StepLink};
use crate::rng::{self, purpose};

/// A fitted balanced histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramModel {
    node_count: usize,
    bin_count: usize,
    /// Block of each node, `0..bin_count`.
    assignment: Vec<usize>,
    /// Row-major `r × r` block probabilities.
    block_probs: Vec<f64>,
    loss: f64,
}

/// Local search settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_sweeps: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            restarts: 8,
            max_sweeps: 50,
        }
    }
}

impl HistogramModel {
    /// Model for a fixed balanced assignment: `Q` is the block mean of `A`
    /// over off-diagonal ordered pairs.
    pub fn from_assignment(graph: &Graph, bin_count: usize, assignment: Vec<usize>) -> Result<HistogramModel> {
        let n = graph.node_count();
        check_bins(n, bin_count)?;
        if assignment.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: assignment.len(),
            });
        }
        let size = n / bin_count;
        let mut sizes = vec![0usize; bin_count];
        for &a in &assignment {
            if a >= bin_count {
                return Err(Error::invalid(format!("block label {a} out of range for {bin_count} bins")));
            }
            sizes[a] += 1;
        }
        if sizes.iter().any(|&s| s != size) {
            return Err(Error::invalid(format!("assignment is not balanced: block sizes {sizes:?}")));
        }
        let edges = block_edge_counts(graph, bin_count, &assignment);
        let r = bin_count;
        let mut block_probs = vec![0.0; r * r];
        let mut loss = 0.0;
        for a in 0..r {
            for b in 0..r {
                let (e, pairs) = ordered_pairs(&edges, r, size, a, b);
                if pairs > 0 {
                    let q = e as f64 / pairs as f64;
                    block_probs[a * r + b] = q;
                    loss += e as f64 * (1.0 - q);
                }
            }
        }
        Ok(HistogramModel {
            node_count: n,
            bin_count,
            assignment,
            block_probs,
            loss,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_probs(&self) -> &[f64] {
        &self.block_probs
    }

    #[inline]
    pub fn q(&self, a: usize, b: usize) -> f64 {
        self.block_probs[a * self.bin_count + b]
    }

    /// Least-squares loss of `(Q, z)` over off-diagonal ordered pairs.
    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// `θ̂_ij = Q_{z(i) z(j)}` (also defined for `i = j`).
    #[inline]
    pub fn theta(&self, i: usize, j: usize) -> f64 {
        self.q(self.assignment[i], self.assignment[j])
    }

    /// `ĥ_hist(u, v) = θ̂_{⌈nu⌉ ⌈nv⌉}`.
    pub fn link(&self, u: f64, v: f64) -> f64 {
        self.theta(node_of(self.node_count, u), node_of(self.node_count, v))
    }

    /// Uniform latent positions land in each block with probability `1/r`.
    pub fn step_link(&self) -> StepLink {
        StepLink::uniform(self.block_probs.clone())
    }

    /// `P_{K2}(ĥ_hist)`: the mean entry of `Q`.
    pub fn edge_density(&self) -> f64 {
        self.block_probs.iter().sum::<f64>() / self.block_probs.len() as f64
    }
}

fn check_bins(n: usize, r: usize) -> Result<()> {
    if r == 0 || n == 0 || n % r != 0 {
        return Err(Error::invalid(format!("bin count {r} must divide the node count {n}")));
    }
    Ok(())
}

/// Unordered edge counts between blocks (`E[a][a]` counts edges inside `a`).
fn block_edge_counts(graph: &Graph, r: usize, z: &[usize]) -> Vec<i64> {
    let mut e = vec![0i64; r * r];
    for (u, v) in graph.edges() {
        let (a, b) = (z[u], z[v]);
        if a == b {
            e[a * r + a] += 1;
        } else {
            e[a * r + b] += 1;
            e[b * r + a] += 1;
        }
    }
    e
}

/// Ordered edge count and ordered pair count for block pair `(a, b)`.
fn ordered_pairs(edges: &[i64], r: usize, size: usize, a: usize, b: usize) -> (i64, i64) {
    let s = size as i64;
    if a == b {
        (2 * edges[a * r + a], s * (s - 1))
    } else {
        (edges[a * r + b], s * s)
    }
}

/// Bin count `r ≈ sqrt(n ρ / ln n)`, clamped to `[2, n/2]` and rounded to
/// the nearest divisor of `n` in that range (ties go to the smaller one).
pub fn select_bin_count(n: usize, edge_density: f64) -> Result<usize> {
    if n < 4 {
        return Err(Error::invalid(format!("bin selection needs n >= 4, got {n}")));
    }
    if !(edge_density > 0.0 && edge_density <= 1.0) {
        return Err(Error::invalid(format!("edge density must lie in (0, 1], got {edge_density}")));
    }
    let raw = (n as f64 * edge_density / (n as f64).ln()).sqrt();
    let target = raw.clamp(2.0, (n / 2) as f64);
    (2..=n / 2)
        .filter(|d| n % d == 0)
        .min_by(|&a, &b| {
            let da = (a as f64 - target).abs();
            let db = (b as f64 - target).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .ok_or_else(|| {
            Error::invalid(format!(
                "{n} has no divisor in [2, {}]; truncate the graph to a node count with one",
                n / 2
            ))
        })
}

/// Exact local-search objective.
///
/// `L = Σ e - Σ e²/N` over block pairs, and `Σ e` is fixed, so minimizing
/// `L` is maximizing `Σ e²/N`. Scaled by `s²(s-1)` (block size `s`), that is
/// the integer `2(s-1) Σ_{a<b} E_ab² + 4s Σ_a E_aa²`.
struct Objective {
    r: usize,
    s: i64,
    edges: Vec<i64>,
    /// `deg[i * r + c]`: neighbors of node `i` in block `c`.
    deg: Vec<i64>,
    z: Vec<usize>,
}

impl Objective {
    fn new(graph: &Graph, r: usize, z: Vec<usize>) -> Objective {
        let n = graph.node_count();
        let mut deg = vec![0i64; n * r];
        for (u, v) in graph.edges() {
            deg[u * r + z[v]] += 1;
            deg[v * r + z[u]] += 1;
        }
        Objective {
            r,
            s: (n / r) as i64,
            edges: block_edge_counts(graph, r, &z),
            deg,
            z,
        }
    }

    #[inline]
    fn off(&self, e: i64) -> i128 {
        2 * i128::from(self.s - 1) * i128::from(e) * i128::from(e)
    }

    #[inline]
    fn diag(&self, e: i64) -> i128 {
        4 * i128::from(self.s) * i128::from(e) * i128::from(e)
    }

    fn value(&self) -> i128 {
        let r = self.r;
        let mut total = 0i128;
        for a in 0..r {
            total += self.diag(self.edges[a * r + a]);
            for b in (a + 1)..r {
                total += self.off(self.edges[a * r + b]);
            }
        }
        total
    }

    /// Loss `L` implied by the current counts.
    fn loss(&self, total_edges: i64) -> f64 {
        let s = self.s as f64;
        2.0 * total_edges as f64 - self.value() as f64 / (s * s * (s - 1.0))
    }

    /// Objective gain of swapping `i` (block `a`) and `j` (block `b != a`).
    fn swap_gain(&self, i: usize, j: usize, x: i64) -> i128 {
        let r = self.r;
        let (a, b) = (self.z[i], self.z[j]);
        let di = &self.deg[i * r..(i + 1) * r];
        let dj = &self.deg[j * r..(j + 1) * r];
        let e = |p: usize, q: usize| self.edges[p * r + q];
        let mut gain = 0i128;
        for c in 0..r {
            if c == a || c == b {
                continue;
            }
            let shift = dj[c] - di[c];
            gain += self.off(e(a, c) + shift) - self.off(e(a, c));
            gain += self.off(e(b, c) - shift) - self.off(e(b, c));
        }
        let daa = dj[a] - di[a] - x;
        let dbb = di[b] - dj[b] - x;
        let dab = di[a] - di[b] + dj[b] - dj[a] + 2 * x;
        gain += self.diag(e(a, a) + daa) - self.diag(e(a, a));
        gain += self.diag(e(b, b) + dbb) - self.diag(e(b, b));
        gain += self.off(e(a, b) + dab) - self.off(e(a, b));
        gain
    }

    fn apply_swap(&mut self, graph: &Graph, i: usize, j: usize, x: i64) {
        let r = self.r;
        let (a, b) = (self.z[i], self.z[j]);
        for c in 0..r {
            if c == a || c == b {
                continue;
            }
            let shift = self.deg[j * r + c] - self.deg[i * r + c];
            self.edges[a * r + c] += shift;
            self.edges[c * r + a] += shift;
            self.edges[b * r + c] -= shift;
            self.edges[c * r + b] -= shift;
        }
        let (dia, dib, dja, djb) = (self.deg[i * r + a], self.deg[i * r + b], self.deg[j * r + a], self.deg[j * r + b]);
        self.edges[a * r + a] += dja - dia - x;
        self.edges[b * r + b] += dib - djb - x;
        let dab = dia - dib + djb - dja + 2 * x;
        self.edges[a * r + b] += dab;
        self.edges[b * r + a] += dab;
        for y in graph.neighbors(i) {
            self.deg[y * r + a] -= 1;
            self.deg[y * r + b] += 1;
        }
        for y in graph.neighbors(j) {
            self.deg[y * r + b] -= 1;
            self.deg[y * r + a] += 1;
        }
        self.z.swap(i, j);
    }
}

/// Refines a balanced assignment by strictly improving pairwise swaps until
/// a full sweep makes no change or `max_sweeps` sweeps have run.
///
/// `observer`, when given, sees the assignment and loss after every
/// accepted swap. Returns the final assignment and the number of sweeps.
pub fn refine_assignment(
    graph: &Graph,
    r: usize,
    z: Vec<usize>,
    max_sweeps: usize,
    mut observer: Option<&mut dyn FnMut(&[usize], f64)>,
) -> Result<(Vec<usize>, usize)> {
    let n = graph.node_count();
    // Validates balance and divisibility.
    HistogramModel::from_assignment(graph, r, z.clone())?;
    if r == 1 || r == n {
        return Ok((z, 0));
    }
    let total_edges = graph.edge_count() as i64;
    let mut obj = Objective::new(graph, r, z);
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if obj.z[i] == obj.z[j] {
                    continue;
                }
                let x = i64::from(graph.has_edge(i, j));
                if obj.swap_gain(i, j, x) > 0 {
                    obj.apply_swap(graph, i, j, x);
                    improved = true;
                    if let Some(f) = observer.as_mut() {
                        f(&obj.z, obj.loss(total_edges));
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((obj.z, sweeps))
}

fn random_balanced(n: usize, r: usize, seed: u64) -> Vec<usize> {
    let mut z: Vec<usize> = (0..n).map(|i| i / (n / r)).collect();
    z.shuffle(&mut rng::from_seed(seed));
    z
}

/// Fits a balanced histogram with `r` bins by restarted swap search.
///
/// Restart `k` starts from a random balanced assignment drawn from the
/// stream `(seed, histogram-restart, k)`; the model with the smallest loss
/// wins, ties going to the earliest restart. The result is a local optimum,
/// not a certified global one.
pub fn fit_histogram(graph: &Graph, r: usize, search: SearchParams, seed: u64) -> Result<HistogramModel> {
    let n = graph.node_count();
    check_bins(n, r)?;
    if search.restarts == 0 {
        return Err(Error::invalid("fit_histogram needs at least one restart; use HistogramModel::from_assignment for a fixed assignment"));
    }
    let results: Vec<Result<(i128, Vec<usize>)>> = (0..search.restarts)
        .into_par_iter()
        .map(|k| {
            let start = random_balanced(n, r, rng::derive_seed(seed, purpose::FIT_RESTART, k as u64));
            let (z, _) = refine_assignment(graph, r, start, search.max_sweeps, None)?;
            let value = if r == 1 || r == n { 0 } else { Objective::new(graph, r, z.clone()).value() };
            Ok((value, z))
        })
        .collect();
    let mut best: Option<(i128, Vec<usize>)> = None;
    for res in results {
        let (value, z) = res?;
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, z));
        }
    }
    let (_, z) = best.expect("at least one restart");
    HistogramModel::from_assignment(graph, r, z)
}

/// Mean squared and maximum deviation between `θ̂` and `θ_ij = h(ε_i, ε_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorError {
    pub mse: f64,
    pub max_dev: f64,
}

/// Compares a fitted histogram to the true link evaluated at the latent
/// positions, over all `n²` ordered pairs including the diagonal.
pub fn estimator_error(model: &HistogramModel, spec: &GraphonSpec, rho: f64, latent: &LatentSample) -> Result<EstimatorError> {
    let n = model.node_count();
    if latent.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: latent.len(),
        });
    }
    spec.check_rho(rho)?;
    let eps = &latent.values;
    let mut sum = 0.0;
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let truth = (rho * spec.w(eps[i], eps[j])).min(1.0);
            let d = (model.theta(i, j) - truth).abs();
            sum += d * d;
            max_dev = max_dev.max(d);
        }
    }
    Ok(EstimatorError {
        mse: sum / (n * n) as f64,
        max_dev,
    })
}
