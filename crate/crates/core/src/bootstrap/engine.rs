//! Bootstrap runs: fit once, center exactly, resample in parallel.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::interval::{percentile_interval, Interval};
use crate::bootstrap::replicate::{empirical_bootstrap_replicate, histogram_bootstrap_replicate};
use crate::census::{raw_densities, serialize_motif};
use crate::combinatorics::{expected_motif_density, DensityMethod, LinkProvider};
use crate::error::{Error, Result};
use crate::estimators::{fit_histogram, select_bin_count, HistogramModel, SearchParams};
use crate::graph::Graph;
use crate::motif::Motif;
use crate::rng::{self, purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapMethod {
    EmpiricalGraphon,
    Histogram,
}

impl BootstrapMethod {
    pub fn name(self) -> &'static str {
        match self {
            BootstrapMethod::EmpiricalGraphon => "empirical-graphon",
            BootstrapMethod::Histogram => "histogram",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CenterMethod {
    Exact,
    MonteCarlo { samples: usize },
}

pub const DEFAULT_REPLICATES: usize = 2000;
pub const DEFAULT_FALLBACK_SAMPLES: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct BootstrapPlan {
    pub method: BootstrapMethod,
    pub motifs: Vec<Motif>,
    pub replicates: usize,
    /// Bootstrap graph size; `None` means `n`. The histogram method only
    /// accepts `n`.
    pub m: Option<usize>,
    pub center: CenterMethod,
    pub levels: Vec<f64>,
    /// Histogram bin count; `None` selects it from the observed density.
    pub bins: Option<usize>,
    pub search: SearchParams,
    /// Monte-Carlo draws used when an exact center is unavailable.
    pub fallback_samples: usize,
    pub seed: u64,
}

impl BootstrapPlan {
    pub fn new(method: BootstrapMethod, motifs: Vec<Motif>, seed: u64) -> BootstrapPlan {
        BootstrapPlan {
            method,
            motifs,
            replicates: DEFAULT_REPLICATES,
            m: None,
            center: CenterMethod::Exact,
            levels: vec![0.9, 0.95],
            bins: None,
            search: SearchParams::default(),
            fallback_samples: DEFAULT_FALLBACK_SAMPLES,
            seed,
        }
    }
}

/// Per-motif replicate statistics.
#[derive(Clone, Debug, Serialize)]
pub struct MotifBootstrap {
    #[serde(serialize_with = "serialize_motif")]
    pub motif: Motif,
    pub key: String,
    /// `P_R(G_n)` on the data.
    pub observed: f64,
    /// `P_R(ĥ)`.
    pub center: f64,
    pub center_std_error: f64,
    /// Set when the exact center was unavailable and Monte Carlo was used.
    pub center_fallback: bool,
    /// `sqrt(m) / rho_bar^|E(R)|`.
    pub scale: f64,
    /// Percentile intervals of the raw replicate densities.
    pub intervals: Vec<Interval>,
    #[serde(skip)]
    pub raw: Vec<f64>,
    #[serde(skip)]
    pub scaled: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapResult {
    pub method: BootstrapMethod,
    pub n: usize,
    pub m: usize,
    pub replicates: usize,
    pub seed: u64,
    /// `rho_hat_n` of the data.
    pub edge_density: f64,
    /// `P_{K2}(ĥ)`.
    pub rho_bar: f64,
    pub model: Option<HistogramModel>,
    pub warnings: Vec<String>,
    pub motifs: Vec<MotifBootstrap>,
}

pub fn run_bootstrap(graph: &Graph, plan: &BootstrapPlan) -> Result<BootstrapResult> {
    let n = graph.node_count();
    if plan.motifs.is_empty() {
        return Err(Error::invalid("bootstrap plan lists no motifs"));
    }
    if plan.replicates == 0 {
        return Err(Error::invalid("bootstrap plan needs at least one replicate"));
    }
    for motif in &plan.motifs {
        if motif.vertex_count() > n {
            return Err(Error::MotifTooLarge {
                motif: motif.vertex_count(),
                graph: n,
            });
        }
    }
    let rho_hat = graph.edge_density();
    let mut warnings = Vec::new();
    let (m, model) = match plan.method {
        BootstrapMethod::EmpiricalGraphon => {
            let m = plan.m.unwrap_or(n);
            if m < n {
                return Err(Error::invalid(format!("the empirical bootstrap needs m >= n, got m = {m} < n = {n}")));
            }
            for motif in &plan.motifs {
                let needed = rho_hat.powi(-4 * motif.edge_count() as i32);
                if (m as f64) < needed {
                    warnings.push(format!(
                        "m = {m} is below rho_hat^(-4|E|) = {needed:.1} for {motif}; the empirical bootstrap may not be accurate"
                    ));
                }
            }
            (m, None)
        }
        BootstrapMethod::Histogram => {
            if let Some(m) = plan.m.filter(|&m| m != n) {
                return Err(Error::invalid(format!("the histogram bootstrap fixes m = n = {n}, got {m}")));
            }
            let r = match plan.bins {
                Some(r) => r,
                None => select_bin_count(n, rho_hat)?,
            };
            (n, Some(fit_histogram(graph, r, plan.search, plan.seed)?))
        }
    };
    let provider = match &model {
        Some(model) => LinkProvider::Histogram(model),
        None => LinkProvider::Empirical(graph),
    };
    let rho_bar = provider.edge_density()?;
    let observed = raw_densities(graph, &plan.motifs)?;

    let mut centers = Vec::with_capacity(plan.motifs.len());
    for (i, motif) in plan.motifs.iter().enumerate() {
        let mc = |samples| DensityMethod::MonteCarlo {
            samples,
            seed: rng::derive_seed(plan.seed, purpose::MONTE_CARLO, i as u64),
        };
        let center = match plan.center {
            CenterMethod::MonteCarlo { samples } => (expected_motif_density(&provider, motif, mc(samples))?, false),
            CenterMethod::Exact => match expected_motif_density(&provider, motif, DensityMethod::Exact) {
                Ok(e) => (e, false),
                Err(Error::UnsupportedMethod(_)) | Err(Error::CensusTooLarge(_)) => {
                    warnings.push(format!("exact center unavailable for {motif}; using monte-carlo"));
                    (expected_motif_density(&provider, motif, mc(plan.fallback_samples))?, true)
                }
                Err(e) => return Err(e),
            },
        };
        centers.push(center);
    }

    let rows: Vec<Vec<f64>> = (0..plan.replicates)
        .into_par_iter()
        .map(|k| {
            let seed = rng::derive_seed(plan.seed, purpose::REPLICATE, k as u64);
            let g = match &model {
                Some(model) => histogram_bootstrap_replicate(model, n, seed),
                None => empirical_bootstrap_replicate(graph, m, seed),
            };
            raw_densities(&g, &plan.motifs)
        })
        .collect::<Result<_>>()?;

    let mut motifs = Vec::with_capacity(plan.motifs.len());
    for (j, motif) in plan.motifs.iter().enumerate() {
        let raw: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (center, fallback) = centers[j];
        let scale = (m as f64).sqrt() / rho_bar.powi(motif.edge_count() as i32);
        let scaled = raw.iter().map(|&x| scale * (x - center.value)).collect();
        let intervals = if raw.len() >= crate::bootstrap::interval::MIN_INTERVAL_SAMPLES {
            plan.levels.iter().map(|&level| percentile_interval(&raw, level)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        motifs.push(MotifBootstrap {
            motif: motif.clone(),
            key: motif.canonical_key().to_string(),
            observed: observed[j],
            center: center.value,
            center_std_error: center.std_error,
            center_fallback: fallback,
            scale,
            intervals,
            raw,
            scaled,
        });
    }
    Ok(BootstrapResult {
        method: plan.method,
        n,
        m,
        replicates: plan.replicates,
        seed: plan.seed,
        edge_density: rho_hat,
        rho_bar,
        model,
        warnings,
        motifs,
    })
}

impl BootstrapResult {
    pub fn motif(&self, motif: &Motif) -> Option<&MotifBootstrap> {
        self.motifs.iter().find(|b| b.motif.canonical_key() == motif.canonical_key())
    }

    /// Rows `motif_key,replicate_index,raw,scaled`.
    pub fn write_replicates_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "motif_key,replicate_index,raw,scaled")?;
        for b in &self.motifs {
            for (k, (raw, scaled)) in b.raw.iter().zip(&b.scaled).enumerate() {
                writeln!(out, "{},{k},{raw},{scaled}", b.key)?;
            }
        }
        Ok(())
    }
}
