//! Monte-Carlo draws from the sampling distribution the bootstrap targets.

use rayon::prelude::*;
use serde::Serialize;

use crate::census::raw_densities;
use crate::combinatorics::{expected_motif_density, DensityMethod, LinkProvider};
use crate::error::{Error, Result};
use crate::graphon::{sample_graph, Estimate, GraphonSpec, SparsitySchedule};
use crate::motif::Motif;
use crate::rng::{self, purpose};

/// Largest standard error accepted for a Monte-Carlo truth center.
pub const MAX_CENTER_STD_ERROR: f64 = 1e-4;

const CENTER_SAMPLES: usize = 4_000_000;

/// Centered, scaled statistics for one motif over independent data graphs.
#[derive(Clone, Debug, Serialize)]
pub struct TruthSample {
    #[serde(serialize_with = "crate::census::serialize_motif")]
    pub motif: Motif,
    /// `P_R(h)` used as the center.
    pub center: Estimate,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// `P_R(h_n)`: exact where available, otherwise Monte Carlo with a checked
/// standard error.
pub fn truth_center(spec: &GraphonSpec, rho: f64, motif: &Motif, seed: u64) -> Result<Estimate> {
    let provider = LinkProvider::TrueGraphon { spec: spec.clone(), rho };
    match expected_motif_density(&provider, motif, DensityMethod::Exact) {
        Ok(e) => Ok(e),
        Err(Error::UnsupportedMethod(_)) => {
            let e = expected_motif_density(
                &provider,
                motif,
                DensityMethod::MonteCarlo {
                    samples: CENTER_SAMPLES,
                    seed: rng::derive_seed(seed, purpose::MONTE_CARLO, 0),
                },
            )?;
            if e.std_error > MAX_CENTER_STD_ERROR {
                return Err(Error::invalid(format!(
                    "monte-carlo center for {motif} has standard error {:.2e} above {MAX_CENTER_STD_ERROR:e}",
                    e.std_error
                )));
            }
            Ok(e)
        }
        Err(e) => Err(e),
    }
}

/// `M` draws of `sqrt(n) / rho_hat^|E(R)| (P_R(G_n) - P_R(h))`, each from
/// an independent graph with seed `(seed, truth-sample, i)`.
pub fn sampling_distribution_truth(
    spec: &GraphonSpec,
    schedule: &SparsitySchedule,
    n: usize,
    motif: &Motif,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut out = sampling_distribution_truth_many(spec, schedule, n, std::slice::from_ref(motif), samples, seed)?;
    Ok(out.pop().expect("one motif").values)
}

/// Several motifs evaluated on the same data graphs.
pub fn sampling_distribution_truth_many(
    spec: &GraphonSpec,
    schedule: &SparsitySchedule,
    n: usize,
    motifs: &[Motif],
    samples: usize,
    seed: u64,
) -> Result<Vec<TruthSample>> {
    schedule.validate()?;
    let rho = schedule.rho(n);
    spec.check_rho(rho)?;
    if samples == 0 {
        return Err(Error::invalid("truth sampling needs at least one draw"));
    }
    let centers: Vec<Estimate> = motifs.iter().map(|m| truth_center(spec, rho, m, seed)).collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (g, _) = sample_graph(spec, schedule, n, rng::derive_seed(seed, purpose::TRUTH, i as u64))?;
            let rho_hat = g.edge_density();
            if rho_hat == 0.0 {
                return Err(Error::invalid(format!("truth graph {i} has no edges; the scaled statistic is undefined")));
            }
            let raw = raw_densities(&g, motifs)?;
            Ok(raw
                .iter()
                .zip(motifs)
                .zip(&centers)
                .map(|((&x, m), c)| (n as f64).sqrt() / rho_hat.powi(m.edge_count() as i32) * (x - c.value))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(motifs
        .iter()
        .enumerate()
        .map(|(j, m)| TruthSample {
            motif: m.clone(),
            center: centers[j],
            values: rows.iter().map(|r| r[j]).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::mean_var;

    #[test]
    fn constant_k2_is_centered_with_er_variance() {
        let spec = GraphonSpec::Constant;
        let schedule = SparsitySchedule::constant(0.2);
        let xs = sampling_distribution_truth(&spec, &schedule, 400, &Motif::k2(), 2000, 42).unwrap();
        assert_eq!(xs.len(), 2000);
        let (mean, var) = mean_var(&xs);
        assert!(mean.abs() < 4.0 * (var / 2000.0).sqrt());
        // sqrt(n)/rho_hat (rho_hat - rho) = sqrt(n) (1 - rho/rho_hat) ≈ sqrt(n)/rho (rho_hat - rho).
        let sigma2 = 2.0 * 0.8 / (399.0 * 0.2);
        assert!((var / sigma2 - 1.0).abs() < 0.25, "{var} vs {sigma2}");
        let again = sampling_distribution_truth(&spec, &schedule, 400, &Motif::k2(), 2000, 42).unwrap();
        assert_eq!(xs, again);
    }
}
