//! Experiment reports and their CSV/JSON files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bootstrap::BootstrapResult;
use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;

/// One `(n, motif, replicate, method)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRow {
    pub n: usize,
    pub motif: String,
    pub replicate: usize,
    pub method: String,
    pub seed: u64,
    /// `ok`, or `skipped: <reason>`.
    pub status: String,
    /// Aligned with [`ExperimentReport::metric_names`]; empty when skipped.
    pub values: Vec<f64>,
}

impl MetricRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn value(&self, names: &[String], name: &str) -> Option<f64> {
        let i = names.iter().position(|m| m == name)?;
        self.values.get(i).copied()
    }
}

/// An aggregate over cells sharing `(n, motif, method)`.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub motif: String,
    pub method: String,
    pub metric: String,
    pub statistic: String,
    pub value: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Environment {
        Environment {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub config: ExperimentConfig,
    pub environment: Environment,
    pub metric_names: Vec<String>,
    pub rows: Vec<MetricRow>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapResult>,
}

impl ExperimentReport {
    pub fn skipped(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn summary_value(&self, n: usize, motif: &str, method: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.n == n && s.motif == motif && s.method == method && s.metric == metric)
            .map(|s| s.value)
    }

    pub fn write_metrics_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n", "motif", "replicate", "method", "seed", "status"];
        header.extend(self.metric_names.iter().map(String::as_str));
        w.write_record(&header).map_err(csv_error)?;
        for r in &self.rows {
            let mut record = vec![
                r.n.to_string(),
                r.motif.clone(),
                r.replicate.to_string(),
                r.method.clone(),
                r.seed.to_string(),
                r.status.clone(),
            ];
            for i in 0..self.metric_names.len() {
                record.push(r.values.get(i).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&record).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::io("metrics.csv", e))
    }

    /// Writes `report.json`, `metrics.csv`, `config.toml` (the effective
    /// configuration) and, for a single bootstrap, `replicates.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = serde_json::to_string_pretty(self)?;
        let path = dir.join("report.json");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        let path = dir.join("metrics.csv");
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.write_metrics_csv(std::io::BufWriter::new(file))?;
        let path = dir.join("config.toml");
        fs::write(&path, self.config.to_toml()).map_err(|e| Error::io(&path, e))?;
        if let Some(b) = &self.bootstrap {
            let path = dir.join("replicates.csv");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            b.write_replicates_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::io("metrics.csv", std::io::Error::other(e.to_string()))
}
