use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orthofair::experiment::{run_sweep, time_debias, write_sweep, SweepSpec};
use orthofair::io::{
    config_hash, load_encoded, load_schema, read_json, read_predictions, schema_of, sibling, write_dataset_csv,
    write_json,
};
use orthofair::pipeline::{debias_dataset, write_debiased};
use orthofair::{Error, Result};
use orthofair_core::metrics::{evaluate, EvaluationConfig};
use orthofair_core::synth::{correlated_design, generate, DesignConfig, SynthConfig};
use orthofair_core::tabular::{center, is_binary, standardize};
use orthofair_core::{ProtectedSlice, Role};
use serde::Serialize;

/// Removes linear correlation between features and protected attributes
/// and measures the resulting fairness/accuracy trade-off.
#[derive(Debug, Parser, Serialize)]
#[command(name = "orthofair", version)]
struct Cli {
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Debias the feature columns of a CSV at a fairness level lambda.
    Debias(DebiasArgs),
    /// Run a lambda sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Score externally produced predictions.
    Metrics(MetricsArgs),
    /// Generate the biased two-Gaussian synthetic dataset.
    Synth(SynthArgs),
    /// Time basis construction plus debiasing.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Serialize)]
struct DebiasArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Schema JSON mapping column name to {"role", "categorical"}.
    #[arg(long)]
    schema: PathBuf,
    /// Fairness level in [0, 1]; 0 removes all linear correlation.
    #[arg(long)]
    lambda: f64,
    /// Output CSV; the sidecar goes to <output stem>.json unless --sidecar is given.
    #[arg(long)]
    output: PathBuf,
    /// Sidecar JSON path.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Scale columns to unit variance after centering.
    #[arg(long)]
    standardize: bool,
    /// Appended to every debiased feature name.
    #[arg(long, default_value = "")]
    suffix: String,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Sweep config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the split seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MetricsArgs {
    /// CSV with columns row_index,yhat_real.
    #[arg(long)]
    predictions: PathBuf,
    /// Dataset CSV holding the outcome and protected columns.
    #[arg(long)]
    dataset: PathBuf,
    /// Schema JSON for the dataset.
    #[arg(long)]
    schema: PathBuf,
    /// Binary protected column for the group metrics (default: first binary one).
    #[arg(long)]
    protected: Option<String>,
    /// Model id recorded in the report.
    #[arg(long, default_value = "external")]
    model_id: String,
    /// Report JSON path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Cross-validation folds for Acc P.
    #[arg(long, default_value_t = 5)]
    acc_p_folds: usize,
    /// Histogram bins for the Bayes discriminator of Acc P.
    #[arg(long, default_value_t = 10)]
    acc_p_bins: usize,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// Number of rows (overrides the config).
    #[arg(long)]
    n: Option<usize>,
    /// Random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; <stem>.config.json and <stem>.schema.json are written beside it.
    #[arg(long)]
    out: PathBuf,
    /// Generator config JSON (means, covariances, protected_bias).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    /// Dataset CSV; without it a synthetic design is timed.
    #[arg(long, requires = "schema")]
    input: Option<PathBuf>,
    /// Schema JSON for --input.
    #[arg(long, requires = "input")]
    schema: Option<PathBuf>,
    /// Timed runs; the median is reported.
    #[arg(long, default_value_t = 11)]
    repeats: usize,
    /// Synthetic rows.
    #[arg(long, default_value_t = 45_000)]
    rows: usize,
    /// Synthetic feature columns.
    #[arg(long, default_value_t = 103)]
    features: usize,
    /// Synthetic protected columns.
    #[arg(long, default_value_t = 1)]
    protected: usize,
    /// Synthetic seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale columns to unit variance after centering.
    #[arg(long)]
    standardize: bool,
}

fn announce(seed: Option<u64>, hash: &str) {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    log::info!("orthofair {} seed={seed} config_hash={hash}", env!("CARGO_PKG_VERSION"));
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_debias(a: &DebiasArgs, json: bool, hash: &str) -> Result<()> {
    announce(None, hash);
    let raw = load_encoded(&a.input, &load_schema(&a.schema)?)?;
    let run = debias_dataset(&raw, a.lambda, a.standardize, &a.suffix)?;
    write_debiased(&a.output, &raw, &run)?;
    let sidecar = a.sidecar.clone().unwrap_or_else(|| sibling(&a.output, ".json"));
    write_json(&sidecar, &run.sidecar)?;
    log::info!(
        "rank {} of {} protected, max residual correlation {:e}, {:.1} ms",
        run.sidecar.rank,
        run.sidecar.n_protected,
        run.sidecar.max_residual_correlation,
        run.sidecar.wall_clock_ms
    );
    if json {
        print_json(&run.sidecar);
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, json: bool) -> Result<()> {
    let mut spec = SweepSpec::load(&a.config)?;
    if let Some(seed) = a.seed {
        spec.split_plan.seed = seed;
    }
    if let Some(dir) = &a.output_dir {
        spec.output_dir = dir.clone();
    }
    announce(Some(spec.seed()), &spec.config_hash());
    let result = run_sweep(&spec)?;
    write_sweep(&result, &spec.output_dir)?;
    let t = &result.provenance.timings;
    log::info!(
        "{} reports written to {} in {:.0} ms",
        result.rows.len(),
        spec.output_dir.display(),
        t.total_ms
    );
    if json {
        #[derive(Serialize)]
        struct Summary<'a> {
            output_dir: &'a std::path::Path,
            rows: usize,
            config_hash: &'a str,
            dataset_sha256: &'a str,
        }
        print_json(&Summary {
            output_dir: &spec.output_dir,
            rows: result.rows.len(),
            config_hash: &result.provenance.config_hash,
            dataset_sha256: &result.provenance.dataset_sha256,
        });
    }
    Ok(())
}

fn cmd_metrics(a: &MetricsArgs, json: bool, hash: &str) -> Result<()> {
    announce(None, hash);
    let d = load_encoded(&a.dataset, &load_schema(&a.schema)?)?;
    let preds = read_predictions(&a.predictions)?;
    if let Some(p) = preds.iter().find(|p| p.row_index >= d.n_rows()) {
        return Err(Error::Predictions {
            path: a.predictions.clone(),
            message: format!("row_index {} is out of range for {} rows", p.row_index, d.n_rows()),
        });
    }
    let rows: Vec<usize> = preds.iter().map(|p| p.row_index).collect();
    let yhat: Vec<f64> = preds.iter().map(|p| p.yhat_real).collect();
    let gather = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let y = gather(d.outcome().values()?);
    let protected: Vec<(String, Vec<f64>)> = d
        .with_role(Role::Protected)
        .map(|c| Ok((c.name.clone(), gather(c.values()?))))
        .collect::<Result<_>>()?;
    let slices: Vec<ProtectedSlice<'_>> = protected
        .iter()
        .map(|(name, values)| ProtectedSlice { name, values })
        .collect();
    let designated = match &a.protected {
        Some(name) => Some(
            protected
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| orthofair_core::Error::UnknownColumn(name.clone()))?,
        ),
        None => protected.iter().position(|(_, v)| is_binary(v)),
    };
    let config = EvaluationConfig {
        acc_p_folds: a.acc_p_folds,
        acc_p_bins: a.acc_p_bins,
    };
    let mut report = evaluate(&yhat, &y, &slices, designated, config)?;
    report.model_id = a.model_id.clone();
    report.split_id = "all".into();
    for note in &report.notes {
        log::warn!("{note}");
    }
    log::info!(
        "n {} acc_y {:.4} max |corr| {:.4} nll {:.4}",
        report.n,
        report.acc_y,
        report.max_abs_corr,
        report.neg_log_likelihood
    );
    if let Some(out) = &a.output {
        write_json(out, &report)?;
    }
    if json {
        print_json(&report);
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs, json: bool) -> Result<()> {
    let mut config: SynthConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    announce(Some(config.seed), &config_hash(&config));
    let d = generate(&config)?;
    write_dataset_csv(&a.out, &d)?;
    write_json(sibling(&a.out, ".config.json"), &config)?;
    write_json(sibling(&a.out, ".schema.json"), &schema_of(&d))?;
    log::info!("{} rows written to {}", d.n_rows(), a.out.display());
    if json {
        print_json(&config);
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, json: bool, hash: &str) -> Result<()> {
    let raw = match (&a.input, &a.schema) {
        (Some(input), Some(schema)) => {
            announce(None, hash);
            load_encoded(input, &load_schema(schema)?)?
        }
        _ => {
            announce(Some(a.seed), hash);
            correlated_design(&DesignConfig {
                n: a.rows,
                n_features: a.features,
                n_protected: a.protected,
                correlation: 0.5,
                binary_protected: true,
                seed: a.seed,
            })?
        }
    };
    let d = if a.standardize { standardize(&raw)? } else { center(&raw)? };
    let report = time_debias(&d, a.repeats)?;
    log::info!(
        "n {} n_f {} n_p {}: median {:.1} ms over {} runs (target {} ms)",
        report.n,
        report.n_f,
        report.n_p,
        report.median_ms,
        report.repeats,
        report.target_ms
    );
    if json {
        print_json(&report);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let hash = config_hash(cli);
    match &cli.command {
        Command::Debias(a) => cmd_debias(a, cli.json, &hash),
        Command::Sweep(a) => cmd_sweep(a, cli.json),
        Command::Metrics(a) => cmd_metrics(a, cli.json, &hash),
        Command::Synth(a) => cmd_synth(a, cli.json),
        Command::Bench(a) => cmd_bench(a, cli.json, &hash),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
