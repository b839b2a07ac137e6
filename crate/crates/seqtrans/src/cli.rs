//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when arguments or configuration fail
//! validation (including clap usage errors), 2 when a run fails at runtime.
//! Nothing is written before validation passes, so a nonzero exit from a
//! bad flag leaves no partial output behind.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{self, SplitFallback, SuiteConfig};
use crate::error::{Error, Result};
use crate::harness::{self, write_score_matrix_csv, ExperimentConfig};
use crate::learner::Strategy;
use crate::measures::pearson;
use crate::metrics::MetricId;
use crate::ordersel::{greedy_order, pairwise_score_matrix, OrderSelection, ProbeConfig, ProbeDescriptor};

#[derive(Parser)]
#[command(
    name = "seqtrans",
    version,
    about = "Continual-learning experiments with transferability-guided task ordering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic task suite as CSV files plus a manifest.
    Generate(GenerateArgs),
    /// Run the experiment sweep described by a config file.
    Run(RunArgs),
    /// Score a suite's tasks pairwise and select a training order per batch.
    SelectOrder(SelectOrderArgs),
    /// Compare the selected order against random orders on one suite.
    Compare(CompareArgs),
    /// Recompute the correlation table from an existing reports directory.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of tasks in the suite.
    #[arg(long, default_value_t = 5)]
    tasks: usize,
    /// Classes per task.
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Input dimensionality.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Samples per class before the train/eval split.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Inter-task similarity in [0, 1]; 1 gives identical class means.
    #[arg(long, default_value_t = 0.5)]
    similarity: f64,
    /// Spread of per-task noise scales; 0 makes all tasks equally hard.
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Fraction of each class held out for evaluation.
    #[arg(long, default_value_t = 0.2)]
    eval_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to write the CSVs and manifest into.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Override the config's metric (logme, leep, transrate, gbc).
    #[arg(long)]
    metric: Option<String>,
    /// Override the config's number of random orders.
    #[arg(long)]
    orders: Option<usize>,
    /// Replace the config's strategy list with one strategy.
    #[arg(long)]
    strategy: Option<String>,
    /// Replace the config's buffer-capacity list with one capacity.
    #[arg(long)]
    buffer: Option<usize>,
}

#[derive(Args)]
struct SelectOrderArgs {
    /// Suite manifest to load tasks from.
    #[arg(long)]
    manifest: PathBuf,
    /// Transferability metric backing the pairwise scores.
    #[arg(long, default_value = "logme")]
    metric: String,
    /// Probe subsample size per class.
    #[arg(long, default_value_t = 20)]
    samples_per_class: usize,
    /// Probe training epochs.
    #[arg(long, default_value_t = 10)]
    probe_epochs: usize,
    /// Probe trunk width.
    #[arg(long, default_value_t = 16)]
    probe_hidden: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the order record and score CSVs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Experiment config file (JSON); comparison runs under its first
    /// strategy and first buffer capacity.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Directory holding a reports.csv to correlate.
    #[arg(long)]
    reports: PathBuf,
}

/// Parses `argv` and executes; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; they are successes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run_sweep(args),
        Command::SelectOrder(args) => select_order(args),
        Command::Compare(args) => compare(args),
        Command::Correlate(args) => correlate(args),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let config = SuiteConfig {
        task_count: args.tasks,
        classes_per_task: args.classes,
        dim: args.dim,
        samples_per_class: args.samples,
        similarity: args.similarity,
        difficulty_spread: args.spread,
        eval_fraction: args.eval_fraction,
        seed: args.seed,
    };
    let batch = dataset::generate_synthetic_suite(&config)?;
    dataset::write_suite(std::slice::from_ref(&batch), Some(&config), &args.out)?;
    println!(
        "wrote {} tasks to {}",
        batch.len(),
        args.out.join(dataset::MANIFEST_NAME).display()
    );
    Ok(())
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

fn run_sweep(args: RunArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(seed) = args.master_seed {
        config.master_seed = seed;
    }
    if let Some(metric) = &args.metric {
        config.metric = MetricId::from_str(metric)?;
    }
    if let Some(orders) = args.orders {
        config.random_order_count = orders;
    }
    if let Some(strategy) = &args.strategy {
        config.strategies = vec![Strategy::from_str(strategy)?];
    }
    if let Some(buffer) = args.buffer {
        config.buffer_capacities = vec![buffer];
    }

    let started = Instant::now();
    let result = harness::run_experiment(&config)?;
    println!(
        "{} runs ({} failed), {} correlation rows -> {} in {:.1}s",
        result.runs.len(),
        result.failures.len(),
        result.correlations.rows.len(),
        config.output_dir.display(),
        started.elapsed().as_secs_f64()
    );
    for failure in &result.failures {
        eprintln!(
            "failed run {}: {}",
            harness::run_id(failure.strategy, failure.buffer_capacity, failure.order_index),
            failure.message
        );
    }
    Ok(())
}

fn select_order(args: SelectOrderArgs) -> Result<()> {
    let metric = MetricId::from_str(&args.metric)?;
    let probe = ProbeConfig {
        samples_per_class: args.samples_per_class,
        epochs: args.probe_epochs,
        hidden: args.probe_hidden,
        seed: args.seed,
    };
    probe.validate()?;
    let (batches, _) = dataset::load_manifest(&args.manifest, SplitFallback::default())?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut selections: Vec<OrderSelection> = Vec::with_capacity(batches.len());
    for batch in &batches {
        let matrix = pairwise_score_matrix(batch, metric, &probe)?;
        let scores_path = args.out.join(format!("scores_b{}.csv", batch.batch_id));
        write_score_matrix_csv(&matrix, &scores_path)?;
        let mut selection = greedy_order(&matrix);
        selection.probe_config = Some(ProbeDescriptor { probe, metric });
        println!(
            "batch {}: order {}",
            batch.batch_id,
            selection
                .order
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join(" -> ")
        );
        selections.push(selection);
    }
    harness::emit::write_json_atomic(&selections, &args.out.join("order.json"))?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    let batches = {
        config.validate()?;
        config.load_batches()?
    };
    let started = Instant::now();
    let report = harness::compare_hctos_random(&config, &batches)?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    harness::emit::write_json_atomic(&report, &config.output_dir.join("comparison.json"))?;
    println!(
        "selected-order AA {:.4} vs random mean {:.4} (std {:.4}) over {} orders: {} in {:.1}s",
        report.hctos.aa,
        report.random_mean_aa,
        report.random_std_aa,
        report.random.len(),
        if report.hctos_beats_random_mean {
            "selected order wins"
        } else {
            "selected order does not beat the mean"
        },
        started.elapsed().as_secs_f64()
    );
    if let Some(span) = &report.brute_force {
        println!(
            "brute-force span over {} orders: [{:.4}, {:.4}]",
            span.order_count, span.min_aa, span.max_aa
        );
    }
    Ok(())
}

fn correlate(args: CorrelateArgs) -> Result<()> {
    let path = args.reports.join(harness::emit::REPORTS_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());

    // Grouped (aa, tft, trt) triples keyed by (strategy, buffer).
    let mut cells: std::collections::BTreeMap<(String, usize), Vec<[f64; 3]>> =
        std::collections::BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.clone(),
            line: index as u64 + 2,
            message: e.to_string(),
        })?;
        let parse = |field: usize, name: &str| -> Result<f64> {
            record
                .get(field)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.clone(),
                    line: index as u64 + 2,
                    message: format!("bad {name} value"),
                })
        };
        let strategy = record.get(2).unwrap_or_default().to_string();
        let buffer = record
            .get(3)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                path: path.clone(),
                line: index as u64 + 2,
                message: "bad buffer value".into(),
            })?;
        cells
            .entry((strategy, buffer))
            .or_default()
            .push([parse(5, "aa")?, parse(6, "tft")?, parse(7, "trt")?]);
    }
    if cells.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} holds no runs to correlate",
            path.display()
        )));
    }

    println!("strategy,buffer,r_aa_tft,p_aa_tft,r_aa_trt,p_aa_trt,run_count");
    for ((strategy, buffer), rows) in &cells {
        let col = |i: usize| -> Vec<f64> { rows.iter().map(|r| r[i]).collect() };
        let fmt = |c: Result<crate::measures::Correlation>| match c {
            Ok(c) => format!("{},{}", c.r, c.p_value),
            Err(_) => ",".into(),
        };
        println!(
            "{strategy},{buffer},{},{},{}",
            fmt(pearson(&col(0), &col(1))),
            fmt(pearson(&col(0), &col(2))),
            rows.len()
        );
    }
    Ok(())
}
