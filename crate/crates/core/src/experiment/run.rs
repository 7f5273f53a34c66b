//! Running experiments.
//!
//! An experiment is a grid of cells. Each cell gets its own seed derived
//! from the master seed and its coordinates, cells run in parallel, and rows
//! are assembled in grid order so the output does not depend on scheduling.

use rayon::prelude::*;

use crate::bootstrap::{
    ks_normal, ks_two_sample, run_bootstrap, sampling_distribution_truth_many, truth_center, BootstrapMethod,
    BootstrapPlan, BootstrapResult, CenterMethod,
};
use crate::combinatorics::{brute_force_moments, expected_motif_density, variance_sigma2, DensityMethod, LinkProvider};
use crate::error::{Error, Result};
use crate::estimators::{HistogramModel, SearchParams};
use crate::experiment::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::report::{Environment, ExperimentReport, MetricRow, SummaryRow};
use crate::graph::Graph;
use crate::graphon::sample_graph;
use crate::motif::Motif;
use crate::rng::{derive_seed, purpose};
use crate::util::{mean_var, median};

const BOOTSTRAP_SEED: &str = "experiment-bootstrap";

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let kind = config.kind()?;
    let motifs = config.motifs()?;
    let (metric_names, rows, bootstrap) = match kind {
        ExperimentKind::Bootstrap => {
            let (names, rows, result) = single_bootstrap(config, &motifs)?;
            (names, rows, Some(result))
        }
        ExperimentKind::ValidateTheorem1 => {
            let (names, rows) = validate(config, &motifs, BootstrapMethod::EmpiricalGraphon);
            (names, rows, None)
        }
        ExperimentKind::ValidateTheorem2 => {
            let (names, rows) = validate(config, &motifs, BootstrapMethod::Histogram);
            (names, rows, None)
        }
        ExperimentKind::Coverage => {
            let (names, rows) = coverage(config, &motifs)?;
            (names, rows, None)
        }
        ExperimentKind::CltCheck => {
            let (names, rows) = clt_check(config, &motifs);
            (names, rows, None)
        }
        ExperimentKind::Oracle => {
            let (names, rows) = oracle(config, &motifs);
            (names, rows, None)
        }
    };
    let summary = summarize(kind, &metric_names, &rows);
    Ok(ExperimentReport {
        kind: kind.as_str().to_string(),
        config: config.clone(),
        environment: Environment::current(),
        metric_names,
        rows,
        summary,
        bootstrap,
    })
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn ok_row(n: usize, motif: &Motif, replicate: usize, method: &str, seed: u64, values: Vec<f64>) -> MetricRow {
    MetricRow {
        n,
        motif: motif.label(),
        replicate,
        method: method.to_string(),
        seed,
        status: "ok".into(),
        values,
    }
}

fn skipped_row(n: usize, motif: &Motif, replicate: usize, method: &str, seed: u64, err: &Error) -> MetricRow {
    MetricRow {
        n,
        motif: motif.label(),
        replicate,
        method: method.to_string(),
        seed,
        status: format!("skipped: {err}"),
        values: Vec::new(),
    }
}

fn plan_for(config: &ExperimentConfig, method: BootstrapMethod, motifs: &[Motif], seed: u64) -> BootstrapPlan {
    let mut plan = BootstrapPlan::new(method, motifs.to_vec(), seed);
    plan.replicates = config.replicates();
    plan.levels = config.levels().to_vec();
    plan.bins = config.plan.bins;
    if method == BootstrapMethod::EmpiricalGraphon {
        plan.m = config.plan.m;
    }
    let defaults = SearchParams::default();
    plan.search = SearchParams {
        restarts: config.plan.restarts.unwrap_or(defaults.restarts),
        max_sweeps: config.plan.max_sweeps.unwrap_or(defaults.max_sweeps),
    };
    if let Some(samples) = config.plan.center_samples {
        plan.center = CenterMethod::MonteCarlo { samples };
    }
    plan
}

fn data_graph(config: &ExperimentConfig, n: usize, cell_seed: u64) -> Result<Graph> {
    Ok(sample_graph(&config.graphon, &config.sparsity, n, derive_seed(cell_seed, purpose::DATA, n as u64))?.0)
}

fn single_bootstrap(config: &ExperimentConfig, motifs: &[Motif]) -> Result<(Vec<String>, Vec<MetricRow>, BootstrapResult)> {
    let seed = config.experiment.seed;
    let graph = match &config.data.graph {
        Some(path) => Graph::load(path)?,
        None => data_graph(config, config.grid.n[0], seed)?,
    };
    let method = config.plan.method.unwrap_or(BootstrapMethod::EmpiricalGraphon);
    let plan = plan_for(config, method, motifs, derive_seed(seed, BOOTSTRAP_SEED, 0));
    let result = run_bootstrap(&graph, &plan)?;
    let mut metric = names(&["observed", "center", "center_std_error", "edge_density", "rho_bar", "scale", "scaled_sd"]);
    for level in config.levels() {
        metric.push(format!("lo_{level}"));
        metric.push(format!("hi_{level}"));
    }
    let rows = result
        .motifs
        .iter()
        .map(|b| {
            let mut values = vec![
                b.observed,
                b.center,
                b.center_std_error,
                result.edge_density,
                result.rho_bar,
                b.scale,
                mean_var(&b.scaled).1.sqrt(),
            ];
            for iv in &b.intervals {
                values.push(iv.lo);
                values.push(iv.hi);
            }
            ok_row(result.n, &b.motif, 0, method.name(), plan.seed, values)
        })
        .collect();
    Ok((metric, rows, result))
}

/// `(n, replication)` cells in grid order.
fn cells(config: &ExperimentConfig) -> Vec<(usize, usize, u64)> {
    let mut out = Vec::new();
    for &n in &config.grid.n {
        for s in 0..config.experiment.replications {
            out.push((n, s, derive_seed(config.experiment.seed, purpose::REPLICATION, s as u64)));
        }
    }
    out
}

fn validate(config: &ExperimentConfig, motifs: &[Motif], method: BootstrapMethod) -> (Vec<String>, Vec<MetricRow>) {
    let metric = names(&["ks", "bootstrap_center", "truth_center", "edge_density", "rho_bar", "bins", "scaled_sd", "truth_sd"]);
    let per_cell: Vec<Vec<MetricRow>> = cells(config)
        .into_par_iter()
        .map(|(n, s, cell_seed)| {
            let run = || -> Result<Vec<Vec<f64>>> {
                let graph = data_graph(config, n, cell_seed)?;
                let plan = plan_for(config, method, motifs, derive_seed(cell_seed, BOOTSTRAP_SEED, n as u64));
                let boot = run_bootstrap(&graph, &plan)?;
                let truth = sampling_distribution_truth_many(
                    &config.graphon,
                    &config.sparsity,
                    n,
                    motifs,
                    config.truth_samples(),
                    derive_seed(cell_seed, purpose::TRUTH, n as u64),
                )?;
                let bins = boot.model.as_ref().map_or(f64::NAN, |m| m.bin_count() as f64);
                boot.motifs
                    .iter()
                    .zip(&truth)
                    .map(|(b, t)| {
                        Ok(vec![
                            ks_two_sample(&b.scaled, &t.values)?,
                            b.center,
                            t.center.value,
                            boot.edge_density,
                            boot.rho_bar,
                            bins,
                            mean_var(&b.scaled).1.sqrt(),
                            mean_var(&t.values).1.sqrt(),
                        ])
                    })
                    .collect()
            };
            match run() {
                Ok(values) => motifs
                    .iter()
                    .zip(values)
                    .map(|(m, v)| ok_row(n, m, s, method.name(), cell_seed, v))
                    .collect(),
                Err(e) => motifs.iter().map(|m| skipped_row(n, m, s, method.name(), cell_seed, &e)).collect(),
            }
        })
        .collect();
    (metric, per_cell.into_iter().flatten().collect())
}

/// Each simulation draws a fresh data graph, bootstraps it with every
/// configured method and checks whether the interval for
/// `P_R(h) / rho_n^|E(R)|` covers the truth. The interval is the percentile
/// interval of the replicate densities divided by `rho_n^|E(R)|`.
fn coverage(config: &ExperimentConfig, motifs: &[Motif]) -> Result<(Vec<String>, Vec<MetricRow>)> {
    let methods = config
        .plan
        .methods
        .clone()
        .unwrap_or_else(|| vec![BootstrapMethod::EmpiricalGraphon, BootstrapMethod::Histogram]);
    let levels = config.levels();
    let mut metric = names(&["target"]);
    for level in levels {
        metric.push(format!("lo_{level}"));
        metric.push(format!("hi_{level}"));
        metric.push(format!("covered_{level}"));
    }
    let master = config.experiment.seed;
    let mut grid = Vec::new();
    for &n in &config.grid.n {
        let rho = config.sparsity.rho(n);
        let targets: Vec<std::result::Result<f64, String>> = motifs
            .iter()
            .map(|m| {
                truth_center(&config.graphon, rho, m, master)
                    .map(|c| c.value / rho.powi(m.edge_count() as i32))
                    .map_err(|e| e.to_string())
            })
            .collect();
        for sim in 0..config.simulations() {
            grid.push((n, sim, derive_seed(master, purpose::SIMULATION, sim as u64), rho, targets.clone()));
        }
    }
    let per_cell: Vec<Vec<MetricRow>> = grid
        .into_par_iter()
        .map(|(n, sim, cell_seed, rho, targets)| {
            let graph = data_graph(config, n, cell_seed);
            let mut rows = Vec::new();
            for (mi, method) in methods.iter().enumerate() {
                let boot = graph.as_ref().map_err(|e| Error::invalid(e.to_string())).and_then(|g| {
                    let plan = plan_for(config, *method, motifs, derive_seed(cell_seed, BOOTSTRAP_SEED, mi as u64));
                    run_bootstrap(g, &plan)
                });
                for (j, motif) in motifs.iter().enumerate() {
                    let cell = match (&boot, &targets[j]) {
                        (Err(e), _) => Err(Error::invalid(e.to_string())),
                        (_, Err(e)) => Err(Error::invalid(e.clone())),
                        (Ok(b), Ok(target)) => {
                            let norm = rho.powi(motif.edge_count() as i32);
                            let mb = &b.motifs[j];
                            if mb.intervals.len() != levels.len() {
                                Err(Error::TooFewSamples {
                                    required: crate::bootstrap::interval::MIN_INTERVAL_SAMPLES,
                                    actual: mb.raw.len(),
                                })
                            } else {
                                let mut values = vec![*target];
                                for iv in &mb.intervals {
                                    let (lo, hi) = (iv.lo / norm, iv.hi / norm);
                                    values.extend([lo, hi, f64::from(u8::from(lo <= *target && *target <= hi))]);
                                }
                                Ok(values)
                            }
                        }
                    };
                    rows.push(match cell {
                        Ok(v) => ok_row(n, motif, sim, method.name(), cell_seed, v),
                        Err(e) => skipped_row(n, motif, sim, method.name(), cell_seed, &e),
                    });
                }
            }
            rows
        })
        .collect();
    Ok((metric, per_cell.into_iter().flatten().collect()))
}

/// KS distance of the scaled sampling distribution to the normal with the
/// same mean and variance, plus the variance predicted by the merged-copy
/// formula.
fn clt_check(config: &ExperimentConfig, motifs: &[Motif]) -> (Vec<String>, Vec<MetricRow>) {
    let metric = names(&["ks_normal", "mean", "variance", "sigma2_formula"]);
    let per_cell: Vec<Vec<MetricRow>> = cells(config)
        .into_par_iter()
        .map(|(n, s, cell_seed)| {
            let truth = sampling_distribution_truth_many(
                &config.graphon,
                &config.sparsity,
                n,
                motifs,
                config.truth_samples(),
                derive_seed(cell_seed, purpose::TRUTH, n as u64),
            );
            let provider = LinkProvider::TrueGraphon {
                spec: config.graphon.clone(),
                rho: config.sparsity.rho(n),
            };
            match truth {
                Err(e) => motifs.iter().map(|m| skipped_row(n, m, s, "truth", cell_seed, &e)).collect(),
                Ok(truth) => truth
                    .iter()
                    .map(|t| {
                        let (mean, var) = mean_var(&t.values);
                        let sigma2 = variance_sigma2(&provider, &t.motif, n).unwrap_or(f64::NAN);
                        match ks_normal(&t.values, mean, var.sqrt()) {
                            Ok(ks) => ok_row(n, &t.motif, s, "truth", cell_seed, vec![ks, mean, var, sigma2]),
                            Err(e) => skipped_row(n, &t.motif, s, "truth", cell_seed, &e),
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    (metric, per_cell.into_iter().flatten().collect())
}

/// A four-node histogram toy with two blocks of two nodes.
pub fn oracle_toy_histogram() -> HistogramModel {
    let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).expect("toy graph");
    HistogramModel::from_assignment(&g, 2, vec![0, 0, 1, 1]).expect("balanced toy assignment")
}

/// Brute-force moments against the exact mean and the second moment implied
/// by the variance formula, for each provider, motif and `n` in the grid.
fn oracle(config: &ExperimentConfig, motifs: &[Motif]) -> (Vec<String>, Vec<MetricRow>) {
    let metric = names(&["brute_mean", "exact_mean", "mean_abs_err", "brute_second", "formula_second", "second_rel_err"]);
    let toy = oracle_toy_histogram();
    let mut providers: Vec<(String, LinkProvider<'_>)> = config
        .oracle
        .rhos
        .iter()
        .map(|&rho| {
            (
                format!("constant(rho={rho})"),
                LinkProvider::TrueGraphon {
                    spec: crate::graphon::GraphonSpec::Constant,
                    rho,
                },
            )
        })
        .collect();
    providers.push(("histogram(r=2)".into(), LinkProvider::Histogram(&toy)));
    let mut grid = Vec::new();
    for &n in &config.grid.n {
        for motif in motifs {
            for (pi, (name, provider)) in providers.iter().enumerate() {
                grid.push((n, motif, pi, name, provider));
            }
        }
    }
    let rows = grid
        .into_par_iter()
        .map(|(n, motif, pi, name, provider)| {
            let run = || -> Result<Vec<f64>> {
                let brute = brute_force_moments(provider, motif, n)?;
                let exact = expected_motif_density(provider, motif, DensityMethod::Exact)?.value;
                let sigma2 = variance_sigma2(provider, motif, n)?;
                let rho = provider.edge_density()?;
                let second = sigma2 * rho.powi(2 * motif.edge_count() as i32) / n as f64 + exact * exact;
                let rel = if brute.second_moment == second {
                    0.0
                } else {
                    (second - brute.second_moment).abs() / brute.second_moment.abs().max(f64::MIN_POSITIVE)
                };
                Ok(vec![brute.mean, exact, (brute.mean - exact).abs(), brute.second_moment, second, rel])
            };
            match run() {
                Ok(v) => ok_row(n, motif, pi, name, 0, v),
                Err(e) => skipped_row(n, motif, pi, name, 0, &e),
            }
        })
        .collect();
    (metric, rows)
}

fn summarize(kind: ExperimentKind, metric_names: &[String], rows: &[MetricRow]) -> Vec<SummaryRow> {
    let targets: Vec<(String, &str)> = match kind {
        ExperimentKind::Bootstrap => Vec::new(),
        ExperimentKind::ValidateTheorem1 | ExperimentKind::ValidateTheorem2 => vec![("ks".into(), "median")],
        ExperimentKind::CltCheck => vec![("ks_normal".into(), "median"), ("variance".into(), "median")],
        ExperimentKind::Coverage => metric_names
            .iter()
            .filter(|m| m.starts_with("covered_"))
            .map(|m| (m.clone(), "mean"))
            .collect(),
        ExperimentKind::Oracle => vec![("second_rel_err".into(), "max"), ("mean_abs_err".into(), "max")],
    };
    // Groups in first-appearance order.
    let mut groups: Vec<(usize, String, String)> = Vec::new();
    for r in rows {
        let key = (r.n, r.motif.clone(), r.method.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    if kind == ExperimentKind::Oracle {
        groups = vec![(0, "*".into(), "*".into())];
    }
    let mut out = Vec::new();
    for (n, motif, method) in groups {
        let members: Vec<&MetricRow> = rows
            .iter()
            .filter(|r| r.is_ok() && (motif == "*" || (r.n == n && r.motif == motif && r.method == method)))
            .collect();
        for (metric, statistic) in &targets {
            let xs: Vec<f64> = members.iter().filter_map(|r| r.value(metric_names, metric)).collect();
            let value = if xs.is_empty() {
                f64::NAN
            } else {
                match *statistic {
                    "median" => median(&xs),
                    "mean" => xs.iter().sum::<f64>() / xs.len() as f64,
                    _ => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            };
            out.push(SummaryRow {
                n,
                motif: motif.clone(),
                method: method.clone(),
                metric: metric.clone(),
                statistic: statistic.to_string(),
                value,
                cells: xs.len(),
            });
        }
    }
    out
}
