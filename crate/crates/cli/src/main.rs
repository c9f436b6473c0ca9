//! Command line interface for global testing of community structure.
//!
//! Exit codes: 0 on success (or an accepted null for `test`), 3 when
//! `test` rejects the null, 2 on any error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commtest::error::Error;
use commtest::experiment::{
    run_experiment, test_file, write_results, ExperimentConfig, OutputFormat,
};
use commtest::inc::{default_rank_tol, intrinsic_num_communities, DEFAULT_HULL_TOL};
use commtest::matrix::Matrix;
use commtest::model::{
    generate_network, omega_matrix, sample_memberships, MmsbmParams, ProbabilityMatrix,
};
use commtest::presets::{build_scenario, Preset, PresetKnobs};
use commtest::stats::StatisticName;
use commtest::theory::{theory_report, theory_report_for_params};

const EXIT_REJECT: u8 = 3;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "commtest",
    about = "Global testing of community structure in undirected networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestStatistic {
    Chi2,
    Osq,
    Pe,
}

impl From<TestStatistic> for StatisticName {
    fn from(s: TestStatistic) -> Self {
        match s {
            TestStatistic::Chi2 => StatisticName::Chi2,
            TestStatistic::Osq => StatisticName::Osq,
            TestStatistic::Pe => StatisticName::Pe,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

/// Knob overrides shared by the preset-driven subcommands.
#[derive(Args, Clone, Copy, Default)]
struct KnobArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl From<KnobArgs> for PresetKnobs {
    fn from(k: KnobArgs) -> Self {
        PresetKnobs {
            n: k.n,
            a: k.a,
            b: k.b,
            c: k.c,
            d: k.d,
            eps: k.eps,
            alpha: k.alpha,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one test statistic on an edge-list file.
    Test {
        /// Edge-list file: first line n, then `i j` pairs (0-based, i < j).
        path: PathBuf,
        #[arg(long, value_enum, default_value = "pe")]
        statistic: TestStatistic,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Generate a network from model parameters and emit its edge list.
    Simulate {
        /// Preset scenario name (see `snr --list`).
        #[arg(long, conflicts_with = "params")]
        preset: Option<String>,
        /// TOML file with explicit model parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        knobs: KnobArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the theoretical separation quantities for a model.
    Snr {
        #[arg(long, conflicts_with_all = ["k", "p", "h"])]
        preset: Option<String>,
        #[command(flatten)]
        knobs: KnobArgs,
        /// Community count for an explicit model.
        #[arg(long)]
        k: Option<usize>,
        /// Community matrix rows, e.g. "0.2,0.05;0.05,0.2".
        #[arg(long)]
        p: Option<String>,
        /// Mean membership vector, e.g. "0.5,0.5".
        #[arg(long)]
        h: Option<String>,
        /// List the known presets and exit.
        #[arg(long)]
        list: bool,
    },
    /// Intrinsic number of communities of a probability matrix.
    Inc {
        /// Dense whitespace matrix file holding the probability matrix.
        #[arg(long, conflicts_with = "params")]
        omega: Option<PathBuf>,
        /// TOML model parameters; the matrix is built from a sampled
        /// membership realization.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Absolute eigenvalue cutoff (default: 1e-8 times the spectral
        /// norm).
        #[arg(long)]
        rank_tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_HULL_TOL)]
        hull_tol: f64,
    },
    /// Run a config-driven Monte Carlo experiment.
    Experiment {
        /// Experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        level: Option<f64>,
        /// Worker thread cap.
        #[arg(long)]
        threads: Option<usize>,
        /// Output path (overrides the config; stdout when neither is
        /// set).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<CliFormat>,
        /// Suppress progress lines on stderr.
        #[arg(long)]
        quiet: bool,
    },
}

fn parse_matrix_arg(text: &str) -> Result<Matrix, Error> {
    let rows: Result<Vec<Vec<f64>>, Error> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad matrix entry {v:?}")))
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows?)
}

fn parse_vector_arg(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad vector entry {v:?}")))
        })
        .collect()
}

fn load_params(path: &PathBuf) -> Result<MmsbmParams, Error> {
    let text = std::fs::read_to_string(path)?;
    let params: MmsbmParams =
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad parameter file: {e}")))?;
    params.validate()?;
    Ok(params)
}

fn resolve_params(
    preset: &Option<String>,
    params: &Option<PathBuf>,
    knobs: KnobArgs,
) -> Result<MmsbmParams, Error> {
    match (preset, params) {
        (Some(name), None) => {
            let preset: Preset = name.parse()?;
            Ok(build_scenario(preset, &knobs.into())?.params)
        }
        (None, Some(path)) => load_params(path),
        (None, None) => Err(Error::Config(
            "provide either --preset or --params".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Test {
            path,
            statistic,
            level,
        } => {
            let report = test_file(&path, statistic.into(), level)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Config(e.to_string()))?
            );
            Ok(if report.reject { EXIT_REJECT } else { 0 })
        }
        Command::Simulate {
            preset,
            params,
            knobs,
            seed,
            output,
        } => {
            let params = resolve_params(&preset, &params, knobs)?;
            let network = generate_network(&params, seed)?;
            match output {
                Some(path) => {
                    let file = std::fs::File::create(path)?;
                    network.write_edgelist(std::io::BufWriter::new(file))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    network.write_edgelist(stdout.lock())?;
                }
            }
            Ok(0)
        }
        Command::Snr {
            preset,
            knobs,
            k,
            p,
            h,
            list,
        } => {
            if list {
                for preset in Preset::ALL {
                    println!("{}", preset.name());
                }
                return Ok(0);
            }
            let report = match (&preset, k, &p, &h) {
                (Some(name), None, None, None) => {
                    let preset: Preset = name.parse()?;
                    let scenario = build_scenario(preset, &knobs.into())?;
                    theory_report_for_params(&scenario.params)?
                }
                (None, Some(k), Some(p), Some(h)) => {
                    let n = knobs.n.ok_or_else(|| {
                        Error::Config("explicit models need --n".into())
                    })?;
                    theory_report(k, &parse_matrix_arg(p)?, &parse_vector_arg(h)?, n)?
                }
                _ => {
                    return Err(Error::Config(
                        "provide --preset NAME, or all of --k --p --h with --n".into(),
                    ))
                }
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Config(e.to_string()))?
            );
            Ok(0)
        }
        Command::Inc {
            omega,
            params,
            seed,
            rank_tol,
            hull_tol,
        } => {
            let omega = match (omega, params) {
                (Some(path), None) => {
                    let file = std::fs::File::open(&path).map_err(|e| {
                        Error::Config(format!("cannot open {}: {e}", path.display()))
                    })?;
                    ProbabilityMatrix::read_dense(std::io::BufReader::new(file))?
                }
                (None, Some(path)) => {
                    let params = load_params(&path)?;
                    let pi = sample_memberships(&params, seed)?;
                    omega_matrix(&params, &pi)?
                }
                _ => {
                    return Err(Error::Config(
                        "provide either --omega FILE or --params FILE".into(),
                    ))
                }
            };
            let rank_tol = match rank_tol {
                Some(t) => t,
                None => default_rank_tol(&omega)?,
            };
            let result = intrinsic_num_communities(&omega, rank_tol, hull_tol)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result)
                    .map_err(|e| Error::Config(e.to_string()))?
            );
            Ok(0)
        }
        Command::Experiment {
            config,
            seed,
            level,
            threads,
            output,
            format,
            quiet,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", config.display()))
            })?;
            let mut config = ExperimentConfig::from_toml_str(&text)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(level) = level {
                config.level = level;
            }
            config.validate()?;

            let results = match threads {
                Some(t) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build()
                        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
                    pool.install(|| run_experiment(&config, !quiet))?
                }
                None => run_experiment(&config, !quiet)?,
            };

            let format = match format {
                Some(CliFormat::Csv) => OutputFormat::Csv,
                Some(CliFormat::Json) => OutputFormat::Json,
                None => config.format.unwrap_or(OutputFormat::Csv),
            };
            let output = output.or_else(|| config.output.clone().map(PathBuf::from));
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path)?;
                    write_results(&results, format, std::io::BufWriter::new(file))?;
                    if !quiet {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => {
                    let stdout = std::io::stdout();
                    write_results(&results, format, stdout.lock())?;
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // a closed stdout (e.g. piping into head) is not an error
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            let mut stderr = std::io::stderr();
            let _ = writeln!(stderr, "error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
