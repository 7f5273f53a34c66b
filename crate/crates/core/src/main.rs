use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graphboot::bootstrap::BootstrapMethod;
use graphboot::census::{census, motif_density};
use graphboot::estimators::{fit_histogram, select_bin_count, HistogramModel, SearchParams};
use graphboot::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use graphboot::graphon::{sample_graph, GraphonSpec, SparsitySchedule};
use graphboot::{Error, Graph, Motif, Result};

#[derive(Parser)]
#[command(name = "graphboot", version, about = "Bootstrap resampling for exchangeable random graphs")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Motif densities of a graph.
    Motifs(MotifArgs),
    /// Fit a balanced histogram to a graph.
    FitHistogram(FitArgs),
    /// Bootstrap motif densities of one graph.
    Bootstrap(BootstrapArgs),
    /// Compare bootstrap and sampling distributions over a grid of sizes.
    Validate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
    },
    /// Interval coverage study.
    Coverage,
    /// Normal approximation of the scaled motif density.
    CltCheck,
    /// Brute-force checks of the moment formulas on tiny graphs.
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphonKind {
    Constant,
    Additive,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "constant")]
    graphon: GraphonKind,
    #[arg(long, default_value_t = 0.2)]
    rho: f64,
    #[arg(long)]
    n: usize,
    /// Also write the latent positions as JSON.
    #[arg(long)]
    latent: bool,
}

#[derive(Args)]
struct MotifArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Motif literal such as "2star: 3; 0-1,1-2"; repeatable.
    #[arg(long = "motif")]
    motifs: Vec<String>,
    /// Full induced census on this many vertices.
    #[arg(long)]
    census: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Bin count; selected from the edge density when absent.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, default_value_t = SearchParams::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = SearchParams::default().max_sweeps)]
    max_sweeps: usize,
    /// File of whitespace-separated block indices; skips the search.
    #[arg(long)]
    fixed_assignment: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Edge-list file; overrides the config's data graph.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long = "motif")]
    motifs: Vec<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    EmpiricalGraphon,
    Histogram,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(&cli, args),
        Command::Motifs(args) => motifs(&cli, args),
        Command::FitHistogram(args) => fit(&cli, args),
        Command::Bootstrap(args) => {
            let mut config = match &cli.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => {
                    let graph = args
                        .graph
                        .as_ref()
                        .ok_or_else(|| Error::config("data.graph", "bootstrap needs --graph or --config"))?;
                    let n = Graph::load(graph)?.node_count();
                    bare_config(ExperimentKind::Bootstrap, vec![n])
                }
            };
            config.experiment.kind = ExperimentKind::Bootstrap.as_str().into();
            if let Some(g) = &args.graph {
                config.data.graph = Some(g.clone());
            }
            if let Some(m) = args.method {
                config.plan.method = Some(match m {
                    MethodArg::EmpiricalGraphon => BootstrapMethod::EmpiricalGraphon,
                    MethodArg::Histogram => BootstrapMethod::Histogram,
                });
            }
            if !args.motifs.is_empty() {
                config.motifs.list = args.motifs.clone();
            }
            config.plan.replicates = args.replicates.or(config.plan.replicates);
            config.plan.m = args.m.or(config.plan.m);
            experiment(&cli, config)
        }
        Command::Validate { theorem } => {
            let kind = if *theorem == 1 {
                ExperimentKind::ValidateTheorem1
            } else {
                ExperimentKind::ValidateTheorem2
            };
            experiment(&cli, required_config(&cli, kind)?)
        }
        Command::Coverage => experiment(&cli, required_config(&cli, ExperimentKind::Coverage)?),
        Command::CltCheck => experiment(&cli, required_config(&cli, ExperimentKind::CltCheck)?),
        Command::Oracle => {
            let mut config = match &cli.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => {
                    let mut c = bare_config(ExperimentKind::Oracle, vec![4, 5]);
                    c.motifs.list = vec!["k2: 2; 0-1".into(), "2star: 3; 0-1,1-2".into(), "k3: 3; 0-1,0-2,1-2".into()];
                    c
                }
            };
            config.experiment.kind = ExperimentKind::Oracle.as_str().into();
            experiment(&cli, config)
        }
    }
}

fn bare_config(kind: ExperimentKind, n: Vec<usize>) -> ExperimentConfig {
    let text = format!("[experiment]\nkind = \"{}\"\n[grid]\nn = {:?}\n", kind.as_str(), n);
    ExperimentConfig::parse(&text).expect("minimal config parses")
}

fn required_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("config", format!("`{}` needs --config", kind.as_str())))?;
    let config = ExperimentConfig::load(path)?;
    if config.kind()? != kind {
        return Err(Error::config(
            "experiment.kind",
            format!("config declares `{}` but the command runs `{}`", config.experiment.kind, kind.as_str()),
        ));
    }
    Ok(config)
}

fn experiment(cli: &Cli, mut config: ExperimentConfig) -> Result<()> {
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| config.experiment.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&config.experiment.kind));
    config.validate()?;
    let report = run_experiment(&config)?;
    report.write_to(&dir)?;
    for s in &report.summary {
        println!("{} n={} {} {} {}={}", s.statistic, s.n, s.motif, s.method, s.metric, s.value);
    }
    if let Some(b) = &report.bootstrap {
        for w in &b.warnings {
            eprintln!("warning: {w}");
        }
    }
    if report.skipped() > 0 {
        eprintln!("{} cells skipped; see metrics.csv", report.skipped());
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let (spec, schedule, n) = match &cli.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            let n = c.grid.n[0];
            (c.graphon, c.sparsity, n)
        }
        None => {
            let spec = match args.graphon {
                GraphonKind::Constant => GraphonSpec::Constant,
                GraphonKind::Additive => GraphonSpec::Additive,
            };
            (spec, SparsitySchedule::constant(args.rho), args.n)
        }
    };
    let (graph, latent) = sample_graph(&spec, &schedule, n, cli.seed.unwrap_or(0))?;
    let dir = out_dir(cli);
    create_dir(&dir)?;
    graph.save(dir.join("graph.edges"))?;
    if args.latent {
        write_file(&dir.join("latent.json"), &serde_json::to_string_pretty(&latent)?)?;
    }
    eprintln!("n = {} edges = {} density = {}", n, graph.edge_count(), graph.edge_density());
    Ok(())
}

fn motifs(cli: &Cli, args: &MotifArgs) -> Result<()> {
    let graph = Graph::load(&args.graph)?;
    let mut list: Vec<Motif> = args.motifs.iter().map(|s| Motif::parse(s)).collect::<Result<_>>()?;
    if let Some(p) = args.census {
        list.extend(census(&graph, p)?.into_iter().map(|(m, _)| m));
    }
    if list.is_empty() {
        list.push(Motif::k2());
    }
    let reports = list.iter().map(|m| motif_density(&graph, m)).collect::<Result<Vec<_>>>()?;
    let json = serde_json::to_string_pretty(&reports)?;
    match &cli.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("motifs.json"), &json)?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn fit(cli: &Cli, args: &FitArgs) -> Result<()> {
    let graph = Graph::load(&args.graph)?;
    let n = graph.node_count();
    let model = match &args.fixed_assignment {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let z: Vec<usize> = text
                .split_whitespace()
                .enumerate()
                .map(|(i, t)| {
                    t.parse().map_err(|e| Error::Parse {
                        line: 0,
                        message: format!("assignment entry {i}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            let r = match args.bins {
                Some(r) => r,
                None => z.iter().max().map_or(0, |m| m + 1),
            };
            HistogramModel::from_assignment(&graph, r, z)?
        }
        None => {
            let r = match args.bins {
                Some(r) => r,
                None => select_bin_count(n, graph.edge_density())?,
            };
            let search = SearchParams {
                restarts: args.restarts,
                max_sweeps: args.max_sweeps,
            };
            fit_histogram(&graph, r, search, cli.seed.unwrap_or(0))?
        }
    };
    let json = serde_json::to_string_pretty(&model)?;
    match &cli.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("histogram.json"), &json)?;
        }
        None => println!("{json}"),
    }
    eprintln!("r = {} loss = {}", model.bin_count(), model.loss());
    Ok(())
}
