use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dirbias_core::experiment::{
    compare_schemes, parse_seeds, run_experiment, theorem_suite, BatchSummary, ExperimentConfig, Metric, SchemeConfig,
    TheoremSuiteConfig,
};
use dirbias_core::kernels::{sample_sphere_data, KernelSpec};
use dirbias_core::linalg::Matrix;
use dirbias_core::metrics::Alternative;
use dirbias_core::spectral::verify_spectral_suite;

/// Kernel regression trained by SGD and GD: directional-bias experiments and checks.
#[derive(Parser)]
#[command(name = "dirbias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run SGD/GD schedules over a batch of seeds on synthetic sine regression.
    Simulate(SimulateArgs),
    /// Run the synthetic directional-bias and generalization checks.
    Theorems(TheoremArgs),
    /// Check the Gram-matrix inequality suite on a generated or loaded matrix.
    VerifySpectral(SpectralArgs),
    /// One-sided Wilcoxon signed-rank comparison of two schemes in a batch JSON.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Squared-norm range as `LO,HI`.
    #[arg(long, value_parser = parse_range)]
    sq_norm_range: Option<[f64; 2]>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Kernel, e.g. `polynomial:0.01:2`, `gaussian:1`, `bilinear`.
    #[arg(long)]
    kernel: Option<KernelSpec>,
    /// Scheme `name:method:ETAxSTEPS,...` (repeatable; replaces the configured list).
    #[arg(long = "scheme")]
    schemes: Vec<SchemeConfig>,
    /// Seeds as `A..B` or `s1,s2,...`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TheoremArgs {
    /// JSON file with suite parameters; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    epsilon_prime: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    /// CSV file holding a square matrix (no header).
    #[arg(long, conflicts_with_all = ["n", "dim", "kernel", "seed"])]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Input dimension of the generated points.
    #[arg(long, default_value_t = 10_000)]
    dim: usize,
    #[arg(long, default_value = "bilinear")]
    kernel: KernelSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_range, default_value = "1,1")]
    sq_norm_range: [f64; 2],
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Batch JSON written by `simulate`.
    #[arg(long)]
    batch: PathBuf,
    /// rq, rrq, pred_mse, train_loss or est_error.
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "greater")]
    alternative: Alternative,
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([lo, hi])
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit_json<T: serde::Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig::sine_study_default(),
    };
    let d = &mut config.data;
    d.n = args.n.unwrap_or(d.n);
    d.p = args.p.unwrap_or(d.p);
    d.noise_sd = args.noise_sd.unwrap_or(d.noise_sd);
    d.sq_norm_range = args.sq_norm_range.unwrap_or(d.sq_norm_range);
    d.n_test = args.n_test.unwrap_or(d.n_test);
    if let Some(k) = args.kernel {
        config.kernel = k;
    }
    if !args.schemes.is_empty() {
        config.schemes = args.schemes;
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = parse_seeds(seeds)?;
    }
    config.record_every = args.record_every.unwrap_or(config.record_every);
    if args.output_dir.is_some() {
        config.output_dir = args.output_dir;
    }
    if config.output_dir.is_none() {
        config.output_dir = Some(PathBuf::from("out"));
    }

    let summary = run_experiment(&config)?;
    println!("{:<16} {:>12} {:>12} {:>12} {:>12}", "scheme", "median_rq", "median_mse", "median_loss", "e_ratio");
    for s in &summary.schemes {
        println!(
            "{:<16} {:>12.6} {:>12.6} {:>12.3e} {:>12.6}",
            s.name, s.final_rq.median, s.final_pred_mse.median, s.final_train_loss.median, s.e_ratio
        );
    }
    for c in &summary.pairwise {
        match &c.result {
            Some(r) => println!(
                "{} vs {} on {} ({}): W+ = {}, p = {:.3e}",
                c.scheme_a, c.scheme_b, c.metric, format!("{:?}", r.alternative).to_lowercase(), r.statistic, r.p_value
            ),
            None => println!(
                "{} vs {} on {}: {}",
                c.scheme_a,
                c.scheme_b,
                c.metric,
                c.note.as_deref().unwrap_or("undefined")
            ),
        }
    }
    if let Some(dir) = &config.output_dir {
        eprintln!("wrote run CSVs and batch.json to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn theorems(args: TheoremArgs) -> Result<ExitCode> {
    let mut cfg: TheoremSuiteConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => TheoremSuiteConfig::default(),
    };
    cfg.sgd_runs = args.runs.unwrap_or(cfg.sgd_runs);
    cfg.sgd_seed = args.seed.unwrap_or(cfg.sgd_seed);
    cfg.k1 = args.k1.unwrap_or(cfg.k1);
    cfg.k2 = args.k2.unwrap_or(cfg.k2);
    cfg.epsilon = args.epsilon.unwrap_or(cfg.epsilon);
    cfg.epsilon_prime = args.epsilon_prime.unwrap_or(cfg.epsilon_prime);

    let report = theorem_suite(&cfg)?;
    for e in &report.entries {
        eprintln!("{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.description);
    }
    emit_json(&report, args.output.as_deref())?;
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| v.parse::<f64>().with_context(|| format!("bad number '{v}'")))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("{} does not hold a square matrix", path.display());
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn verify_spectral(args: SpectralArgs) -> Result<ExitCode> {
    let k = match &args.matrix {
        Some(path) => load_matrix(path)?,
        None => {
            let data = sample_sphere_data(args.n, args.dim, args.seed, args.sq_norm_range)?;
            args.kernel.gram_matrix(&data.x)?
        }
    };
    let report = verify_spectral_suite(&k)?;
    for e in &report.entries {
        let status = match e.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        eprintln!("{status} {}", e.name);
    }
    emit_json(&report, args.output.as_deref())?;
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn compare(args: CompareArgs) -> Result<ExitCode> {
    let summary = BatchSummary::read_json(&args.batch)?;
    let (result, warning) = compare_schemes(&summary, args.metric, &args.a, &args.b, args.alternative)?;
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    emit_json(&result, None)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Theorems(a) => theorems(a),
        Command::VerifySpectral(a) => verify_spectral(a),
        Command::Compare(a) => compare(a),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
