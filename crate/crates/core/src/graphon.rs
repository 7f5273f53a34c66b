//! Graphon catalog, sparsity schedules and exchangeable graph sampling.
//!
//! Link functions factor as `h_n(u, v) = rho_n * w(u, v)` with
//! `∬ w = 1`, so `rho_n` is the marginal edge probability.

use std::collections::BTreeMap;

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::motif::Motif;
use crate::rng::{self, purpose};

/// Lipschitz behaviour of a graphon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Lipschitz {
    Constant(f64),
    /// Constant within cells only; excluded from smoothness-dependent checks.
    Piecewise,
}

/// Normalized graphon `w` with `∬ w = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphonSpec {
    /// `w ≡ 1`.
    Constant,
    /// `w(u, v) = u + v`.
    Additive,
    /// Piecewise-constant on a `k × k` grid of equal cells. The stored
    /// matrix is already scaled so that its mean entry is 1.
    Block { matrix: Vec<Vec<f64>> },
}

impl GraphonSpec {
    /// Block graphon from a symmetric nonnegative matrix, rescaled to
    /// integrate to one.
    pub fn block(matrix: Vec<Vec<f64>>) -> Result<GraphonSpec> {
        let k = matrix.len();
        if k == 0 || matrix.iter().any(|row| row.len() != k) {
            return Err(Error::invalid("block matrix must be square and non-empty"));
        }
        for a in 0..k {
            for b in 0..k {
                let x = matrix[a][b];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::invalid("block entries must be finite and nonnegative"));
                }
                if (x - matrix[b][a]).abs() > 1e-12 {
                    return Err(Error::invalid("block matrix must be symmetric"));
                }
            }
        }
        let mean = matrix.iter().flatten().sum::<f64>() / (k * k) as f64;
        if mean <= 0.0 {
            return Err(Error::invalid("block matrix must have positive mass"));
        }
        Ok(GraphonSpec::Block {
            matrix: matrix.iter().map(|r| r.iter().map(|x| x / mean).collect()).collect(),
        })
    }

    /// Validates a spec read from a file (the block matrix must already be
    /// normalized, symmetric and nonnegative).
    pub fn validate(&self) -> Result<()> {
        if let GraphonSpec::Block { matrix } = self {
            let normalized = GraphonSpec::block(matrix.clone())?;
            if let GraphonSpec::Block { matrix: m2 } = normalized {
                let drift = matrix.iter().flatten().zip(m2.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if drift > 1e-9 {
                    return Err(Error::invalid("block matrix must integrate to 1 (use GraphonSpec::block to normalize)"));
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GraphonSpec::Constant => "constant",
            GraphonSpec::Additive => "additive",
            GraphonSpec::Block { .. } => "block",
        }
    }

    /// `w(u, v)` for `u, v` in `[0, 1]`.
    pub fn w(&self, u: f64, v: f64) -> f64 {
        match self {
            GraphonSpec::Constant => 1.0,
            GraphonSpec::Additive => u + v,
            GraphonSpec::Block { matrix } => {
                let k = matrix.len();
                matrix[cell(u, k)][cell(v, k)]
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            GraphonSpec::Constant => 1.0,
            GraphonSpec::Additive => 2.0,
            GraphonSpec::Block { matrix } => matrix.iter().flatten().cloned().fold(0.0, f64::max),
        }
    }

    /// `∬ w`, evaluated by the exact formula for each kind.
    pub fn integral(&self) -> f64 {
        match self {
            GraphonSpec::Constant => 1.0,
            GraphonSpec::Additive => 1.0,
            GraphonSpec::Block { matrix } => {
                let k = matrix.len();
                matrix.iter().flatten().sum::<f64>() / (k * k) as f64
            }
        }
    }

    pub fn lipschitz(&self) -> Lipschitz {
        match self {
            GraphonSpec::Constant => Lipschitz::Constant(0.0),
            GraphonSpec::Additive => Lipschitz::Constant(1.0),
            GraphonSpec::Block { .. } => Lipschitz::Piecewise,
        }
    }

    /// Checks `rho * sup(w) <= 1`.
    pub fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        if rho * self.sup() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "rho * sup(w) = {} exceeds 1 for the {} graphon",
                rho * self.sup(),
                self.kind_name()
            )));
        }
        Ok(())
    }

    /// Step-function form of `rho * w` when `w` is piecewise constant.
    pub fn step_link(&self, rho: f64) -> Option<StepLink> {
        match self {
            GraphonSpec::Constant => Some(StepLink::uniform(vec![rho])),
            GraphonSpec::Additive => None,
            GraphonSpec::Block { matrix } => {
                let k = matrix.len();
                let probs = matrix.iter().flatten().map(|x| rho * x).collect();
                Some(StepLink::new(vec![1.0 / k as f64; k], probs))
            }
        }
    }
}

#[inline]
fn cell(u: f64, k: usize) -> usize {
    ((u * k as f64) as usize).min(k - 1)
}

/// Sparsity schedule `rho_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SparsitySchedule {
    Constant { c: f64 },
    /// `rho_n = c * n^(-alpha)` with `alpha` in `[0, 1)`.
    Power { c: f64, alpha: f64 },
}

impl SparsitySchedule {
    pub fn constant(c: f64) -> SparsitySchedule {
        SparsitySchedule::Constant { c }
    }

    pub fn validate(&self) -> Result<()> {
        let (c, alpha) = match *self {
            SparsitySchedule::Constant { c } => (c, 0.0),
            SparsitySchedule::Power { c, alpha } => (c, alpha),
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("sparsity constant c must be positive, got {c}")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("sparsity exponent must lie in [0, 1), got {alpha}")));
        }
        Ok(())
    }

    pub fn rho(&self, n: usize) -> f64 {
        match *self {
            SparsitySchedule::Constant { c } => c,
            SparsitySchedule::Power { c, alpha } => c * (n as f64).powf(-alpha),
        }
    }
}

/// Latent uniforms `ε_1..ε_n` behind a sampled graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSample {
    pub values: Vec<f64>,
}

impl LatentSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `h(u, v) = rho * w(u, v)`.
pub fn link_probability(spec: &GraphonSpec, rho: f64, u: f64, v: f64) -> Result<f64> {
    spec.check_rho(rho)?;
    if !((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)) {
        return Err(Error::invalid(format!("latent positions must lie in [0, 1], got ({u}, {v})")));
    }
    Ok((rho * spec.w(u, v)).min(1.0))
}

/// Samples `G_n` from `rho_n * w` with the given seed.
pub fn sample_graph(
    spec: &GraphonSpec,
    schedule: &SparsitySchedule,
    n: usize,
    seed: u64,
) -> Result<(Graph, LatentSample)> {
    schedule.validate()?;
    let rho = schedule.rho(n);
    sample_graph_with_rho(spec, rho, n, seed)
}

/// Samples with an explicit `rho`.
pub fn sample_graph_with_rho(spec: &GraphonSpec, rho: f64, n: usize, seed: u64) -> Result<(Graph, LatentSample)> {
    if n < 2 {
        return Err(Error::invalid("sample_graph needs n >= 2"));
    }
    spec.check_rho(rho)?;
    let mut rng = rng::from_seed(seed);
    let eps: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let mut builder = GraphBuilder::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let h = (rho * spec.w(eps[i], eps[j])).min(1.0);
            if rng.gen::<f64>() < h {
                builder.add(i, j);
            }
        }
    }
    Ok((builder.finish(), LatentSample { values: eps }))
}

/// How to evaluate a motif probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ProbabilityMethod {
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact integration of the expanded polynomial integrand; constant and
    /// additive graphons on at most [`EXPANSION_MAX_NODES`] vertices.
    Expansion,
}

/// Value and standard error (0 for exact methods).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate { value, std_error: 0.0 }
    }
}

/// `P_R(h)`: the probability that `G_n(1:p)` equals `R` as a labeled graph.
pub fn true_motif_probability(spec: &GraphonSpec, rho: f64, motif: &Motif, method: ProbabilityMethod) -> Result<Estimate> {
    spec.check_rho(rho)?;
    match method {
        ProbabilityMethod::ClosedForm => match spec.step_link(rho) {
            Some(step) => Ok(Estimate::exact(step.pattern_probability(motif))),
            None => Err(Error::UnsupportedMethod(format!(
                "closed-form motif probability is not available for the {} graphon",
                spec.kind_name()
            ))),
        },
        ProbabilityMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("monte-carlo needs at least one sample"));
            }
            Ok(monte_carlo_pattern(motif, samples, seed, |u, v| (rho * spec.w(u, v)).min(1.0)))
        }
        ProbabilityMethod::Expansion => match spec {
            GraphonSpec::Constant => Ok(Estimate::exact(spec.step_link(rho).expect("constant").pattern_probability(motif))),
            GraphonSpec::Additive => additive_pattern_probability(rho, motif).map(Estimate::exact),
            GraphonSpec::Block { .. } => Err(Error::UnsupportedMethod(
                "polynomial expansion applies to the constant and additive graphons".into(),
            )),
        },
    }
}

/// Largest pattern handled by [`ProbabilityMethod::Expansion`].
pub const EXPANSION_MAX_NODES: usize = 6;

/// `P_W` for `h(u, v) = rho (u + v)`: the integrand is a polynomial in the
/// latent positions, expanded factor by factor and integrated termwise with
/// `∫ u^e du = 1 / (e + 1)`.
pub fn additive_pattern_probability(rho: f64, motif: &Motif) -> Result<f64> {
    let k = motif.vertex_count();
    if k > EXPANSION_MAX_NODES {
        return Err(Error::UnsupportedMethod(format!(
            "polynomial expansion is limited to {EXPANSION_MAX_NODES} vertices, got {k}"
        )));
    }
    // Exponents packed 4 bits per variable; degrees never exceed k - 1.
    let mut poly: BTreeMap<u32, f64> = BTreeMap::new();
    poly.insert(0, 1.0);
    for b in 1..k {
        for a in 0..b {
            let (c0, c1) = if motif.has_edge(a, b) { (0.0, rho) } else { (1.0, -rho) };
            let mut next: BTreeMap<u32, f64> = BTreeMap::new();
            for (&mono, &coef) in &poly {
                if c0 != 0.0 {
                    *next.entry(mono).or_insert(0.0) += coef * c0;
                }
                *next.entry(mono + (1 << (4 * a))).or_insert(0.0) += coef * c1;
                *next.entry(mono + (1 << (4 * b))).or_insert(0.0) += coef * c1;
            }
            poly = next;
        }
    }
    let mut total = 0.0;
    for (&mono, &coef) in &poly {
        let mut w = coef;
        for v in 0..k {
            w /= f64::from((mono >> (4 * v)) & 0xf) + 1.0;
        }
        total += w;
    }
    Ok(total)
}

const MC_CHUNK: usize = 1 << 14;

/// Averages the pattern integrand over `samples` i.i.d. latent vectors.
/// Chunks draw from derived streams and are combined in order, so the
/// result does not depend on the thread count.
pub fn monte_carlo_pattern<F>(motif: &Motif, samples: usize, seed: u64, link: F) -> Estimate
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let p = motif.vertex_count();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, purpose::MONTE_CARLO, c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut u = [0.0f64; 8];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for x in u.iter_mut().take(p) {
                    *x = rng.sample(Open01);
                }
                let mut f = 1.0;
                'pairs: for b in 1..p {
                    for a in 0..b {
                        let h = link(u[a], u[b]);
                        f *= if motif.has_edge(a, b) { h } else { 1.0 - h };
                        if f == 0.0 {
                            break 'pairs;
                        }
                    }
                }
                s += f;
                s2 += f * f;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let m = samples as f64;
    let mean = s / m;
    let var = if samples > 1 { ((s2 - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
    Estimate {
        value: mean,
        std_error: (var / m).sqrt(),
    }
}

/// A step-function link: latent positions fall into atoms with the given
/// weights, and atoms `a`, `b` connect with probability `probs[a * k + b]`.
///
/// Constant and block graphons, the histogram estimator and (for small
/// graphs) the empirical graphon all have this form.
#[derive(Clone, Debug, PartialEq)]
pub struct StepLink {
    weights: Vec<f64>,
    probs: Vec<f64>,
}

impl StepLink {
    pub fn new(weights: Vec<f64>, probs: Vec<f64>) -> StepLink {
        let k = weights.len();
        assert_eq!(probs.len(), k * k, "probability matrix must be k x k");
        StepLink { weights, probs }
    }

    /// Equal-weight atoms with a `k × k` matrix given row-major.
    pub fn uniform(probs: Vec<f64>) -> StepLink {
        let k = (probs.len() as f64).sqrt().round() as usize;
        StepLink::new(vec![1.0 / k as f64; k], probs)
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, a: usize) -> f64 {
        self.weights[a]
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.weights.len() + b]
    }

    /// Edge probability between two independent latent positions.
    pub fn edge_density(&self) -> f64 {
        let k = self.atoms();
        let mut s = 0.0;
        for a in 0..k {
            for b in 0..k {
                s += self.weights[a] * self.weights[b] * self.prob(a, b);
            }
        }
        s
    }

    /// `P_W` as the exact sum over atom assignments of the vertices.
    pub fn pattern_probability(&self, motif: &Motif) -> f64 {
        let p = motif.vertex_count();
        let mut assign = [0usize; 8];
        self.sum_from(motif, p, 0, &mut assign, 1.0)
    }

    fn sum_from(&self, motif: &Motif, p: usize, depth: usize, assign: &mut [usize; 8], acc: f64) -> f64 {
        if depth == p {
            return acc;
        }
        let mut total = 0.0;
        for a in 0..self.atoms() {
            let mut f = acc * self.weights[a];
            for (s, &b) in assign.iter().enumerate().take(depth) {
                let q = self.prob(b, a);
                f *= if motif.has_edge(s, depth) { q } else { 1.0 - q };
            }
            if f == 0.0 {
                continue;
            }
            assign[depth] = a;
            total += self.sum_from(motif, p, depth + 1, assign, f);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_probability_examples() {
        assert_eq!(link_probability(&GraphonSpec::Constant, 0.3, 0.1, 0.9).unwrap(), 0.3);
        assert!((link_probability(&GraphonSpec::Additive, 0.4, 0.25, 0.25).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            link_probability(&GraphonSpec::Additive, 0.6, 1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        let b = GraphonSpec::block(vec![vec![2.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let h1 = link_probability(&b, 0.3, 0.2, 0.7).unwrap();
        let h2 = link_probability(&b, 0.3, 0.7, 0.2).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn integrals_and_sups() {
        for spec in [
            GraphonSpec::Constant,
            GraphonSpec::Additive,
            GraphonSpec::block(vec![vec![3.0, 1.0, 0.5], vec![1.0, 2.0, 0.0], vec![0.5, 0.0, 4.0]]).unwrap(),
        ] {
            assert!((spec.integral() - 1.0).abs() < 1e-9, "{spec:?}");
            spec.validate().unwrap();
        }
        assert_eq!(GraphonSpec::Additive.lipschitz(), Lipschitz::Constant(1.0));
        assert!(GraphonSpec::block(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
        assert!(GraphonSpec::block(vec![vec![-1.0]]).is_err());
    }

    #[test]
    fn schedules() {
        assert_eq!(SparsitySchedule::constant(0.2).rho(1000), 0.2);
        let s = SparsitySchedule::Power { c: 1.0, alpha: 0.5 };
        assert!((s.rho(100) - 0.1).abs() < 1e-15);
        assert!(SparsitySchedule::constant(0.0).validate().is_err());
        assert!(SparsitySchedule::Power { c: 1.0, alpha: 1.0 }.validate().is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_simple() {
        let s = SparsitySchedule::constant(0.3);
        let (g1, l1) = sample_graph(&GraphonSpec::Additive, &s, 60, 11).unwrap();
        let (g2, l2) = sample_graph(&GraphonSpec::Additive, &s, 60, 11).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(l1, l2);
        assert!(l1.values.iter().all(|&x| x > 0.0 && x < 1.0));
        let (g3, _) = sample_graph(&GraphonSpec::Additive, &s, 60, 12).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn degenerate_rhos() {
        let (k, _) = sample_graph(&GraphonSpec::Constant, &SparsitySchedule::constant(1.0), 30, 1).unwrap();
        assert_eq!(k, Graph::complete(30));
        let (e, _) = sample_graph(&GraphonSpec::Constant, &SparsitySchedule::constant(1e-12), 30, 1).unwrap();
        assert_eq!(e.edge_count(), 0);
        assert!(sample_graph(&GraphonSpec::Constant, &SparsitySchedule::constant(0.0), 30, 1).is_err());
        assert!(sample_graph(&GraphonSpec::Additive, &SparsitySchedule::constant(0.6), 30, 1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let k3 = Motif::triangle();
        let v = true_motif_probability(&GraphonSpec::Constant, 0.5, &k3, ProbabilityMethod::ClosedForm).unwrap();
        assert!((v.value - 0.125).abs() < 1e-15 && v.std_error == 0.0);
        let v = true_motif_probability(&GraphonSpec::Constant, 0.5, &Motif::two_star(), ProbabilityMethod::ClosedForm).unwrap();
        assert!((v.value - 0.125).abs() < 1e-15);
        assert!(matches!(
            true_motif_probability(&GraphonSpec::Additive, 0.3, &k3, ProbabilityMethod::ClosedForm),
            Err(Error::UnsupportedMethod(_))
        ));
    }

    #[test]
    fn additive_expansion_by_hand() {
        let rho = 0.3;
        let e = |m: &Motif| true_motif_probability(&GraphonSpec::Additive, rho, m, ProbabilityMethod::Expansion).unwrap().value;
        // ∬ rho (u + v) = rho.
        assert!((e(&Motif::k2()) - rho).abs() < 1e-15);
        // E[(u+v)(v+w)] = 1/4 + 1/4 + 1/3 + 1/4 = 13/12, and
        // (u+v)(v+w)(u+w) = (u+v+w)(uv+vw+uw) - uvw has mean 1 + 3/8 - 1/8 = 5/4.
        let k3 = Motif::triangle();
        assert!((e(&k3) - rho.powi(3) * 1.25).abs() < 1e-14);
        let open = Motif::two_star();
        let wedge = rho * rho * 13.0 / 12.0;
        assert!((e(&open) - (wedge - rho.powi(3) * 1.25)).abs() < 1e-14);
        let mc = true_motif_probability(
            &GraphonSpec::Additive,
            rho,
            &Motif::cycle(4),
            ProbabilityMethod::MonteCarlo { samples: 400_000, seed: 3 },
        )
        .unwrap();
        assert!((e(&Motif::cycle(4)) - mc.value).abs() < 4.0 * mc.std_error);
        assert!(true_motif_probability(&GraphonSpec::Additive, rho, &Motif::path(7), ProbabilityMethod::Expansion).is_err());
    }

    #[test]
    fn constant_k2_is_rho_and_bounded() {
        for rho in [0.1, 0.5, 0.9] {
            let v = true_motif_probability(&GraphonSpec::Constant, rho, &Motif::k2(), ProbabilityMethod::ClosedForm).unwrap();
            assert!((v.value - rho).abs() < 1e-15);
        }
    }
}
