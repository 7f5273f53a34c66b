//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. Statistical criteria use fixed
//! master seeds, so their outcomes are reproducible.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use graphboot::combinatorics::{
    brute_force_moments, expected_motif_density, merge_collision_catalog, merged_copy_catalog, variance_sigma2,
    DensityMethod, LinkProvider,
};
use graphboot::estimators::{estimator_error, fit_histogram, select_bin_count, SearchParams};
use graphboot::experiment::{oracle_toy_histogram, run_experiment, ExperimentConfig, ExperimentReport};
use graphboot::graphon::{sample_graph_with_rho, GraphonSpec};
use graphboot::motif::{connected_motifs, pair_index};
use graphboot::rng::derive_seed;
use graphboot::Motif;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn motifs_123() -> Vec<Motif> {
    vec![Motif::k2(), Motif::two_star(), Motif::triangle()]
}

fn providers(toy: &graphboot::estimators::HistogramModel) -> Vec<(String, LinkProvider<'_>)> {
    let mut out: Vec<(String, LinkProvider<'_>)> = [0.3, 0.7]
        .iter()
        .map(|&rho| {
            (
                format!("constant rho={rho}"),
                LinkProvider::TrueGraphon {
                    spec: GraphonSpec::Constant,
                    rho,
                },
            )
        })
        .collect();
    out.push(("histogram r=2".into(), LinkProvider::Histogram(toy)));
    out
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("acceptance config")
}

fn summary(report: &ExperimentReport, n: usize, motif: &str, method: &str, metric: &str) -> f64 {
    report.summary_value(n, motif, method, metric).unwrap_or(f64::NAN)
}

fn merged_identity() -> Outcome {
    let toy = oracle_toy_histogram();
    let mut worst: f64 = 0.0;
    for (_, provider) in providers(&toy) {
        for motif in motifs_123() {
            for n in [4, 5] {
                let brute = brute_force_moments(&provider, &motif, n).unwrap();
                let mean = expected_motif_density(&provider, &motif, DensityMethod::Exact).unwrap().value;
                let rho = provider.edge_density().unwrap();
                let implied = variance_sigma2(&provider, &motif, n).unwrap() * rho.powi(2 * motif.edge_count() as i32)
                    / n as f64
                    + mean * mean;
                let rel = if implied == brute.second_moment {
                    0.0
                } else {
                    (implied - brute.second_moment).abs() / brute.second_moment
                };
                worst = worst.max(rel);
            }
        }
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} (tol 1e-10)"))
}

fn unbiasedness() -> Outcome {
    let toy = oracle_toy_histogram();
    let mut worst: f64 = 0.0;
    for (_, provider) in providers(&toy) {
        for motif in motifs_123() {
            for n in [4, 5] {
                let brute = brute_force_moments(&provider, &motif, n).unwrap();
                let exact = expected_motif_density(&provider, &motif, DensityMethod::Exact).unwrap().value;
                worst = worst.max((brute.mean - exact).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |E P - P(h)| {worst:.2e} (tol 1e-12)"))
}

fn er_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for rho in [0.1, 0.5] {
        for n in [10usize, 100] {
            let provider = LinkProvider::TrueGraphon {
                spec: GraphonSpec::Constant,
                rho,
            };
            let got = variance_sigma2(&provider, &Motif::k2(), n).unwrap();
            let want = 2.0 * (1.0 - rho) / ((n as f64 - 1.0) * rho);
            worst = worst.max((got - want).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max abs error {worst:.2e} (tol 1e-12)"))
}

fn empirical_ks() -> Outcome {
    let report = run_experiment(&config(
        r#"
[experiment]
kind = "validate-theorem1"
seed = 20240601
replications = 5
[graphon]
kind = "constant"
[sparsity]
kind = "constant"
c = 0.2
[grid]
n = [100, 400]
[motifs]
list = ["k2: 2; 0-1"]
[plan]
replicates = 2000
truth_samples = 2000
"#,
    ))
    .unwrap();
    let small = summary(&report, 100, "k2", "empirical-graphon", "ks");
    let large = summary(&report, 400, "k2", "empirical-graphon", "ks");
    outcome(
        large < small && large < 0.15 && report.skipped() == 0,
        format!("median KS n=100 {small:.4}, n=400 {large:.4} (need n=400 < n=100 and < 0.15)"),
    )
}

fn histogram_ks() -> Outcome {
    let report = run_experiment(&config(
        r#"
[experiment]
kind = "validate-theorem2"
seed = 20240602
replications = 5
[graphon]
kind = "additive"
[sparsity]
kind = "constant"
c = 0.3
[grid]
n = [128, 512]
[motifs]
list = ["k2: 2; 0-1", "2star: 3; 0-1,1-2"]
[plan]
replicates = 2000
truth_samples = 2000
"#,
    ))
    .unwrap();
    let mut pass = report.skipped() == 0;
    let mut detail = Vec::new();
    for motif in ["k2", "2star"] {
        let small = summary(&report, 128, motif, "histogram", "ks");
        let large = summary(&report, 512, motif, "histogram", "ks");
        pass &= large < small && large < 0.2;
        detail.push(format!("{motif}: n=128 {small:.4}, n=512 {large:.4}"));
    }
    outcome(pass, format!("median KS {} (need n=512 < n=128 and < 0.2)", detail.join("; ")))
}

/// Median MSE and median `max_dev / rho` of 20 histogram fits per size.
fn histogram_fits(sizes: &[usize]) -> Vec<(usize, f64, f64)> {
    let rho = 0.3;
    sizes
        .iter()
        .map(|&n| {
            let (mut mse, mut dev) = (Vec::new(), Vec::new());
            for i in 0..20u64 {
                let seed = derive_seed(20240603, "mse-fit", (n as u64) << 8 | i);
                let (g, latent) = sample_graph_with_rho(&GraphonSpec::Additive, rho, n, seed).unwrap();
                let r = select_bin_count(n, g.edge_density()).unwrap();
                let model = fit_histogram(&g, r, SearchParams::default(), seed).unwrap();
                let err = estimator_error(&model, &GraphonSpec::Additive, rho, &latent).unwrap();
                mse.push(err.mse);
                dev.push(err.max_dev / rho);
            }
            (n, median(mse), median(dev))
        })
        .collect()
}

fn mse_rate(fits: &[(usize, f64, f64)]) -> Outcome {
    let at = |n| fits.iter().find(|f| f.0 == n).unwrap().1;
    let ratio = at(512) / at(128);
    outcome(
        (0.2..=0.6).contains(&ratio),
        format!("median MSE n=128 {:.3e}, n=512 {:.3e}, ratio {ratio:.3} (need [0.2, 0.6])", at(128), at(512)),
    )
}

fn max_deviation(fits: &[(usize, f64, f64)]) -> Outcome {
    let devs: Vec<f64> = fits.iter().map(|f| f.2).collect();
    let pass = devs.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let shown: Vec<String> = fits.iter().map(|f| format!("n={} {:.3}", f.0, f.2)).collect();
    outcome(pass, format!("median max_dev/rho {} (non-increasing within 20%)", shown.join(", ")))
}

fn clt() -> Outcome {
    let report = run_experiment(&config(
        r#"
[experiment]
kind = "clt-check"
seed = 20240604
[graphon]
kind = "constant"
[sparsity]
kind = "constant"
c = 0.3
[grid]
n = [500]
[motifs]
list = ["k2: 2; 0-1"]
[plan]
truth_samples = 1000
"#,
    ))
    .unwrap();
    let ks = summary(&report, 500, "k2", "truth", "ks_normal");
    outcome(ks < 0.06, format!("KS to matched normal {ks:.4} (need < 0.06)"))
}

fn coverage() -> Outcome {
    let report = run_experiment(&config(
        r#"
[experiment]
kind = "coverage"
seed = 20240605
[graphon]
kind = "additive"
[sparsity]
kind = "constant"
c = 0.3
[grid]
n = [256]
[motifs]
list = ["k2: 2; 0-1"]
[plan]
methods = ["empirical-graphon", "histogram"]
replicates = 1000
levels = [0.9]
simulations = 200
"#,
    ))
    .unwrap();
    let emp = summary(&report, 256, "k2", "empirical-graphon", "covered_0.9");
    let hist = summary(&report, 256, "k2", "histogram", "covered_0.9");
    outcome(
        emp >= 0.8 && hist >= 0.8 && report.skipped() == 0,
        format!("coverage empirical {emp:.3}, histogram {hist:.3} (need >= 0.80)"),
    )
}

/// Automorphisms by trying every permutation.
fn automorphisms_by_search(m: &Motif) -> u64 {
    fn rec(m: &Motif, perm: &mut Vec<usize>, used: &mut Vec<bool>) -> u64 {
        let p = m.vertex_count();
        let i = perm.len();
        if i == p {
            return 1;
        }
        let mut total = 0;
        for v in 0..p {
            if !used[v] && (0..i).all(|j| m.has_edge(j, i) == m.has_edge(perm[j], v)) {
                perm.push(v);
                used[v] = true;
                total += rec(m, perm, used);
                perm.pop();
                used[v] = false;
            }
        }
        total
    }
    rec(m, &mut Vec::new(), &mut vec![false; m.vertex_count()])
}

fn fixtures() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in 2..=5 {
        for m in connected_motifs(p).unwrap() {
            let factorial: u64 = (1..=p as u64).product();
            if m.labeled_copy_count() != factorial / automorphisms_by_search(&m) {
                failures.push(format!("labeled copies of {}", m.literal()));
            }
            checked += 1;
        }
    }
    let cat = merged_copy_catalog(&Motif::k2()).unwrap();
    let disjoint = Motif::new(4, &[(0, 1), (2, 3)]).unwrap();
    for (w, d) in [(Motif::two_star(), 8), (Motif::triangle(), 24), (disjoint.clone(), 8)] {
        if cat.coefficient(&w) != Some(d) {
            failures.push(format!("D({}) = {:?}, want {d}", w.literal(), cat.coefficient(&w)));
        }
    }
    let three = cat.level(3).map(|l| l.entries.len()).unwrap_or(0);
    let four_has_disjoint = cat
        .level(4)
        .is_some_and(|l| l.entries.iter().any(|e| e.motif.is_isomorphic(&disjoint)));
    if three != 2 || !four_has_disjoint {
        failures.push("merged-copy levels".into());
    }
    let col = merge_collision_catalog(&Motif::path(3)).unwrap();
    let level = |j: usize| -> Vec<(String, u64)> {
        col.level(j)
            .map(|l| {
                l.entries
                    .iter()
                    .map(|e| (e.quotient.as_ref().map_or("1;".into(), |q| q.canonical_key().to_string()), e.multiplicity))
                    .collect()
            })
            .unwrap_or_default()
    };
    let want2 = vec![(Motif::k2().canonical_key().to_string(), 1)];
    let want3 = vec![(Motif::path(3).canonical_key().to_string(), 1)];
    if level(2) != want2 || level(3) != want3 || !level(1).is_empty() {
        failures.push(format!("collision catalog of path-3: {:?} {:?} {:?}", level(1), level(2), level(3)));
    }
    // Sanity of the brute-force automorphism count itself.
    let c4 = Motif::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
    if automorphisms_by_search(&c4) != 8 || pair_index(0, 1) != 0 {
        failures.push("automorphism search".into());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} connected motifs, merged-copy and collision fixtures exact")
        } else {
            failures.join("; ")
        },
    )
}

fn metrics_bytes(config: &ExperimentConfig, threads: usize, dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let first = run_experiment(config).unwrap();
        first.write_to(dir).unwrap();
        let echoed = ExperimentConfig::load(dir.join("config.toml")).unwrap();
        let again = run_experiment(&echoed).unwrap();
        let mut rerun = Vec::new();
        again.write_metrics_csv(&mut rerun).unwrap();
        (std::fs::read(dir.join("metrics.csv")).unwrap(), rerun)
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        r#"
[experiment]
kind = "validate-theorem2"
seed = 7
replications = 3
[graphon]
kind = "additive"
[sparsity]
kind = "constant"
c = 0.3
[grid]
n = [64, 128]
[motifs]
list = ["k2: 2; 0-1", "2star: 3; 0-1,1-2"]
[plan]
replicates = 300
truth_samples = 300
"#,
        r#"
[experiment]
kind = "coverage"
seed = 8
[graphon]
kind = "additive"
[sparsity]
kind = "constant"
c = 0.3
[grid]
n = [96]
[motifs]
list = ["k2: 2; 0-1", "k3: 3; 0-1,0-2,1-2"]
[plan]
replicates = 200
simulations = 12
levels = [0.8, 0.9]
"#,
        r#"
[experiment]
kind = "validate-theorem1"
seed = 9
replications = 2
[graphon]
kind = "constant"
[sparsity]
kind = "constant"
c = 0.2
[grid]
n = [50, 80]
[plan]
replicates = 300
truth_samples = 300
"#,
    ];
    let mut failures = Vec::new();
    for (i, text) in configs.iter().enumerate() {
        let c = config(text);
        let (one, one_again) = metrics_bytes(&c, 1, &dir.path().join(format!("{i}-t1")));
        let (eight, eight_again) = metrics_bytes(&c, 8, &dir.path().join(format!("{i}-t8")));
        if one != one_again || one != eight || eight != eight_again {
            failures.push(c.experiment.kind.clone());
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "metrics.csv identical at 1 and 8 threads and on re-run from the echoed config".to_string()
        } else {
            format!("differing metrics for {}", failures.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "merged-copy identity", Duration::from_secs(5), Box::new(merged_identity)),
        (2, "unbiasedness", Duration::from_secs(1), Box::new(unbiasedness)),
        (3, "ER variance closed form", Duration::from_secs(1), Box::new(er_closed_form)),
        (4, "empirical bootstrap KS", Duration::from_secs(300), Box::new(empirical_ks)),
        (5, "histogram bootstrap KS", Duration::from_secs(900), Box::new(histogram_ks)),
        (8, "CLT check", Duration::from_secs(120), Box::new(clt)),
        (9, "coverage", Duration::from_secs(1200), Box::new(coverage)),
        (10, "combinatorial fixtures", Duration::from_secs(10), Box::new(fixtures)),
        (11, "determinism", Duration::from_secs(600), Box::new(determinism)),
    ];
    let mut results: Vec<(u32, String, bool)> = Vec::new();
    let mut report = |id: u32, name: &str, limit: Duration, start: Instant, o: Outcome| {
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= limit;
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name}: {} [{:.1}s, limit {}s]",
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        results.push((id, name.to_string(), pass));
    };
    for (id, name, limit, f) in &criteria[..5] {
        let start = Instant::now();
        report(*id, name, *limit, start, f());
    }
    // Criteria 6 and 7 share one set of fits; each gets the full time.
    let start = Instant::now();
    let fits = histogram_fits(&[128, 256, 512]);
    report(6, "histogram MSE rate", Duration::from_secs(600), start, mse_rate(&fits));
    report(7, "max-deviation boundedness", Duration::from_secs(600), start, max_deviation(&fits));
    for (id, name, limit, f) in &criteria[5..] {
        let start = Instant::now();
        report(*id, name, *limit, start, f());
    }
    results.sort_by_key(|r| r.0);
    let failed: Vec<String> = results.iter().filter(|r| !r.2).map(|r| format!("{} ({})", r.0, r.1)).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria PASS", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
