//! Experiment orchestration: random-order sweeps, strategy/buffer grids,
//! accuracy-vs-transferability correlations, and greedy-vs-random order
//! comparisons, all emitted as deterministic report files.
//!
//! Every run's seeds are pure functions of `(master_seed, strategy, buffer,
//! order index)`, so reordering the sweep loops — or running arms in
//! parallel — cannot change any individual result. Model initialization
//! depends only on the order index, which keeps strategy and buffer arms
//! paired: they start from identical parameters and differ only in how they
//! train.

pub mod emit;

pub use emit::{emit, write_score_matrix_csv, EmitOutcome};

use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_synthetic_suite, load_manifest, SplitFallback, SuiteConfig, Task, TaskBatch,
};
use crate::error::{Error, Result};
use crate::learner::{init_model, train_sequence, ReplayBuffer, Strategy, TrainHyper};
use crate::measures::{average_accuracy, pearson, sequence_report, SequenceReport, SequenceRun};
use crate::metrics::{MetricId, DEFAULT_TRANSRATE_EPS};
use crate::ordersel::{hctos_batch, OrderSelection, ProbeConfig};
use crate::rng::{self, stream};

/// Replay-buffer capacities sized for the synthetic suites in this crate.
pub const DESK_BUFFER_PRESET: [usize; 4] = [90, 225, 450, 900];
/// The capacities used by the large-scale studies this crate miniaturizes.
pub const PAPER_BUFFER_PRESET: [usize; 4] = [360, 900, 1800, 3600];

/// Where an experiment's tasks come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteSource {
    /// Generate a synthetic suite in-process.
    Config(SuiteConfig),
    /// Load batches from a suite manifest on disk.
    Manifest(PathBuf),
}

/// Full description of one experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: SuiteSource,
    pub strategies: Vec<Strategy>,
    pub buffer_capacities: Vec<usize>,
    pub metric: MetricId,
    #[serde(default = "default_transrate_eps")]
    pub transrate_eps: f64,
    pub random_order_count: usize,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub hyper: TrainHyper,
    /// Trunk width of the continual model (probes size themselves).
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

fn default_hidden() -> usize {
    32
}

fn default_transrate_eps() -> f64 {
    DEFAULT_TRANSRATE_EPS
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "need at least one strategy"));
        }
        if self.buffer_capacities.is_empty() {
            return Err(Error::config(
                "buffer_capacities",
                "need at least one capacity",
            ));
        }
        if self.random_order_count < 1 {
            return Err(Error::config("random_order_count", "must be at least 1"));
        }
        if self.hidden < 1 {
            return Err(Error::config("hidden", "must be at least 1"));
        }
        if !(self.transrate_eps > 0.0 && self.transrate_eps.is_finite()) {
            return Err(Error::config("transrate_eps", "must be finite and > 0"));
        }
        self.probe.validate()?;
        for &strategy in &self.strategies {
            // Each arm resolves the base hyperparameters against its own
            // strategy; validate the resolved form, not the base.
            self.hyper
                .with_strategy(strategy, self.hyper.replay_minibatch.max(1))
                .validate()?;
        }
        if let SuiteSource::Config(suite) = &self.suite {
            suite.validate()?;
        }
        Ok(())
    }

    /// Loads or generates the experiment's task batches.
    pub fn load_batches(&self) -> Result<Vec<TaskBatch>> {
        match &self.suite {
            SuiteSource::Config(suite) => Ok(vec![generate_synthetic_suite(suite)?]),
            SuiteSource::Manifest(path) => {
                let (batches, _) = load_manifest(path, SplitFallback::default())?;
                Ok(batches)
            }
        }
    }
}

/// Uniform random task orders, sampled with replacement from the permutation
/// space. Each order draws from its own derived stream, so `count` and the
/// iteration order of callers never shift the sequence.
pub fn sample_random_orders(n_tasks: usize, count: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_tasks < 2 {
        return Err(Error::InvalidInput(
            "random orders need at least 2 tasks".into(),
        ));
    }
    if count < 1 {
        return Err(Error::InvalidInput("need at least one order".into()));
    }
    let mut orders = Vec::with_capacity(count);
    for k in 0..count {
        let mut order: Vec<usize> = (0..n_tasks).collect();
        order.shuffle(&mut rng::rng(rng::derive(seed, &[stream::ORDERS, k as u64])));
        orders.push(order);
    }
    Ok(orders)
}

fn strategy_code(strategy: Strategy) -> u64 {
    match strategy {
        Strategy::Naive => 0,
        Strategy::Er => 1,
        Strategy::Agem => 2,
    }
}

/// Initialization seed for one order arm; shared across strategies and
/// buffers so those comparisons are paired.
pub fn init_seed(master_seed: u64, order_index: usize) -> u64 {
    rng::derive(master_seed, &[stream::RUN, 0, order_index as u64])
}

/// Training-stream seed for one fully specified run.
pub fn train_seed(
    master_seed: u64,
    strategy: Strategy,
    buffer_capacity: usize,
    order_index: usize,
) -> u64 {
    rng::derive(
        master_seed,
        &[
            stream::RUN,
            1,
            strategy_code(strategy),
            buffer_capacity as u64,
            order_index as u64,
        ],
    )
}

/// Trains one continual pass over `tasks` arranged by `order` (positions
/// into `tasks`), starting from a fresh model. The base hyperparameters are
/// resolved against `strategy`: Naive runs drop the replay minibatch, replay
/// strategies keep it.
#[allow(clippy::too_many_arguments)]
pub fn execute_run(
    tasks: &[Task],
    order: &[usize],
    strategy: Strategy,
    buffer_capacity: usize,
    hyper: &TrainHyper,
    hidden: usize,
    init_seed: u64,
    train_seed: u64,
) -> Result<SequenceRun> {
    let n = tasks.len();
    let mut seen = vec![false; n];
    for &position in order {
        if position >= n || seen[position] {
            return Err(Error::InvalidInput(format!(
                "order is not a permutation of 0..{n}"
            )));
        }
        seen[position] = true;
    }
    if order.len() != n || n < 2 {
        return Err(Error::InvalidInput(format!(
            "order must cover all {n} tasks"
        )));
    }

    let ordered: Vec<&Task> = order.iter().map(|&p| &tasks[p]).collect();
    let mut run_hyper = hyper.with_strategy(strategy, hyper.replay_minibatch.max(1));
    run_hyper.seed = train_seed;
    run_hyper.validate()?;

    let model = init_model(ordered[0].dim(), hidden, init_seed);
    let buffer = ReplayBuffer::new(buffer_capacity);
    let (snapshots, _) = train_sequence(&model, &ordered, &run_hyper, &buffer)?;

    Ok(SequenceRun {
        order: ordered.iter().map(|t| t.task_id).collect(),
        tasks: ordered.into_iter().cloned().collect(),
        snapshots,
        strategy,
        buffer_capacity,
        seed: train_seed,
    })
}

/// One finished run of the sweep, keyed by its coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub strategy: Strategy,
    pub buffer_capacity: usize,
    pub order_index: usize,
    pub report: SequenceReport,
}

/// A run that errored, with enough coordinates to rerun it alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub strategy: Strategy,
    pub buffer_capacity: usize,
    pub order_index: usize,
    pub message: String,
}

/// Correlations between final accuracy and the two transfer measures for one
/// (strategy, buffer) cell. A `None` pair means the inputs were degenerate —
/// too few successful runs or zero variance — never a fabricated number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub strategy: Strategy,
    pub buffer_capacity: usize,
    pub r_aa_tft: Option<f64>,
    pub p_aa_tft: Option<f64>,
    pub r_aa_trt: Option<f64>,
    pub p_aa_trt: Option<f64>,
    pub run_count: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
}

/// Everything a sweep produced, before and after writing to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub runs: Vec<RunReport>,
    pub failures: Vec<RunFailure>,
    pub correlations: CorrelationReport,
    /// The sampled orders, as positions into the flattened task list.
    pub orders: Vec<Vec<usize>>,
}

pub fn run_id(strategy: Strategy, buffer_capacity: usize, order_index: usize) -> String {
    format!("{}_b{}_o{:03}", strategy.name(), buffer_capacity, order_index)
}

/// Runs the full sweep described by `config` and writes its report files to
/// `config.output_dir`. Tasks from all batches are flattened into one pool;
/// each sampled order permutes the whole pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = run_experiment_in_memory(config)?;
    emit(config, &result, &config.output_dir)?;
    Ok(result)
}

/// As [`run_experiment`] without touching the filesystem.
pub fn run_experiment_in_memory(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let batches = config.load_batches()?;
    let tasks: Vec<Task> = batches.into_iter().flat_map(|b| b.tasks).collect();
    if tasks.len() < 2 {
        return Err(Error::InvalidInput(
            "an experiment needs at least 2 tasks".into(),
        ));
    }

    let orders = sample_random_orders(tasks.len(), config.random_order_count, config.master_seed)?;

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &strategy in &config.strategies {
        for &capacity in &config.buffer_capacities {
            for (order_index, order) in orders.iter().enumerate() {
                let outcome = execute_run(
                    &tasks,
                    order,
                    strategy,
                    capacity,
                    &config.hyper,
                    config.hidden,
                    init_seed(config.master_seed, order_index),
                    train_seed(config.master_seed, strategy, capacity, order_index),
                )
                .and_then(|run| sequence_report(&run, config.metric));
                match outcome {
                    Ok(report) => runs.push(RunReport {
                        run_id: run_id(strategy, capacity, order_index),
                        strategy,
                        buffer_capacity: capacity,
                        order_index,
                        report,
                    }),
                    Err(e) => failures.push(RunFailure {
                        strategy,
                        buffer_capacity: capacity,
                        order_index,
                        message: e.to_string(),
                    }),
                }
            }
        }
    }

    let correlations = correlate(config, &runs);
    Ok(ExperimentResult {
        runs,
        failures,
        correlations,
        orders,
    })
}

fn correlate(config: &ExperimentConfig, runs: &[RunReport]) -> CorrelationReport {
    let mut rows = Vec::new();
    for &strategy in &config.strategies {
        for &capacity in &config.buffer_capacities {
            let cell: Vec<&RunReport> = runs
                .iter()
                .filter(|r| r.strategy == strategy && r.buffer_capacity == capacity)
                .collect();
            let aa: Vec<f64> = cell.iter().map(|r| r.report.aa).collect();
            let tft: Vec<f64> = cell.iter().map(|r| r.report.tft).collect();
            let trt: Vec<f64> = cell.iter().map(|r| r.report.trt).collect();
            let aa_tft = pearson(&aa, &tft).ok();
            let aa_trt = pearson(&aa, &trt).ok();
            rows.push(CorrelationRow {
                strategy,
                buffer_capacity: capacity,
                r_aa_tft: aa_tft.map(|c| c.r),
                p_aa_tft: aa_tft.map(|c| c.p_value),
                r_aa_trt: aa_trt.map(|c| c.r),
                p_aa_trt: aa_trt.map(|c| c.p_value),
                run_count: cell.len(),
                degenerate: aa_tft.is_none() || aa_trt.is_none(),
            });
        }
    }
    CorrelationReport { rows }
}

/// One order arm of a comparison and the accuracy it reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonArm {
    /// Task ids in training order, batch blocks concatenated.
    pub order: Vec<usize>,
    pub aa: f64,
}

/// Accuracy span of the factorial enumeration on a small batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceSpan {
    pub min_aa: f64,
    pub max_aa: f64,
    pub order_count: usize,
}

/// Greedy-selected order versus random orders under identical seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub hctos: ComparisonArm,
    pub random: Vec<ComparisonArm>,
    pub random_mean_aa: f64,
    pub random_std_aa: f64,
    pub hctos_beats_random_mean: bool,
    /// Populated on a single batch of at most 5 tasks.
    pub brute_force: Option<BruteForceSpan>,
    /// The per-batch selections behind the greedy arm.
    pub selections: Vec<OrderSelection>,
}

/// Compares the greedy-selected task order against `random_order_count`
/// random orders on the same batches. Both arms share one model
/// initialization and one training-stream seed, so accuracy differences come
/// from ordering alone. Random orders permute within each batch; batch
/// blocks keep their relative position. Runs under the first strategy and
/// first buffer capacity of `config`.
pub fn compare_hctos_random(
    config: &ExperimentConfig,
    batches: &[TaskBatch],
) -> Result<ComparisonReport> {
    config.validate()?;
    if batches.is_empty() {
        return Err(Error::InvalidInput("no batches to compare".into()));
    }
    let total: usize = batches.iter().map(|b| b.len()).sum();
    if total < 2 {
        return Err(Error::InvalidInput(
            "a comparison needs at least 2 tasks overall".into(),
        ));
    }
    let strategy = config.strategies[0];
    let capacity = config.buffer_capacities[0];
    let init = rng::derive(config.master_seed, &[stream::COMPARE, 0]);
    let train = rng::derive(config.master_seed, &[stream::COMPARE, 1]);

    let tasks: Vec<Task> = batches.iter().flat_map(|b| b.tasks.clone()).collect();
    // Offsets of each batch's block within the flattened task list.
    let mut offsets = Vec::with_capacity(batches.len());
    let mut next = 0;
    for batch in batches {
        offsets.push(next);
        next += batch.len();
    }

    let evaluate = |order: &[usize]| -> Result<f64> {
        let run = execute_run(
            &tasks,
            order,
            strategy,
            capacity,
            &config.hyper,
            config.hidden,
            init,
            train,
        )?;
        average_accuracy(run.final_model()?, &run.tasks)
    };

    // Greedy arm: select within each batch, then concatenate. A single-task
    // batch has no ordering freedom and no pairwise scores; it contributes
    // its one task directly.
    let mut selections = Vec::with_capacity(batches.len());
    let mut hctos_order = Vec::with_capacity(total);
    for (batch, &offset) in batches.iter().zip(&offsets) {
        let selection = if batch.len() == 1 {
            OrderSelection {
                order: vec![batch.tasks[0].task_id],
                remaining_scores: Vec::new(),
                probe_config: None,
            }
        } else {
            hctos_batch(batch, config.metric, &config.probe)?
        };
        for id in &selection.order {
            let position = batch
                .tasks
                .iter()
                .position(|t| t.task_id == *id)
                .expect("selection returns batch task ids");
            hctos_order.push(offset + position);
        }
        selections.push(selection);
    }
    let hctos_aa = evaluate(&hctos_order)?;

    let mut random = Vec::with_capacity(config.random_order_count);
    for r in 0..config.random_order_count {
        let mut order = Vec::with_capacity(total);
        for (b, (batch, &offset)) in batches.iter().zip(&offsets).enumerate() {
            let mut block: Vec<usize> = (0..batch.len()).map(|p| offset + p).collect();
            block.shuffle(&mut rng::rng(rng::derive(
                config.master_seed,
                &[stream::COMPARE, 2, r as u64, b as u64],
            )));
            order.extend(block);
        }
        let aa = evaluate(&order)?;
        random.push(ComparisonArm {
            order: order.iter().map(|&p| tasks[p].task_id).collect(),
            aa,
        });
    }

    let aas: Vec<f64> = random.iter().map(|a| a.aa).collect();
    let mean = aas.iter().sum::<f64>() / aas.len() as f64;
    let std = if aas.len() > 1 {
        (aas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (aas.len() - 1) as f64).sqrt()
    } else {
        0.0
    };

    let brute_force = if batches.len() == 1 && (2..=5).contains(&total) {
        let mut min_aa = f64::INFINITY;
        let mut max_aa = f64::NEG_INFINITY;
        let mut count = 0;
        let mut positions: Vec<usize> = (0..total).collect();
        permute_all(&mut positions, 0, &mut |order| {
            let aa = evaluate(order)?;
            min_aa = min_aa.min(aa);
            max_aa = max_aa.max(aa);
            count += 1;
            Ok(())
        })?;
        Some(BruteForceSpan {
            min_aa,
            max_aa,
            order_count: count,
        })
    } else {
        None
    };

    Ok(ComparisonReport {
        hctos: ComparisonArm {
            order: hctos_order.iter().map(|&p| tasks[p].task_id).collect(),
            aa: hctos_aa,
        },
        random,
        random_mean_aa: mean,
        random_std_aa: std,
        hctos_beats_random_mean: hctos_aa > mean,
        brute_force,
        selections,
    })
}

/// Visits every permutation of `items[at..]` in place (Heap-style recursive
/// enumeration); used only for factorial enumeration on tiny batches.
fn permute_all<F>(items: &mut Vec<usize>, at: usize, visit: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if at == items.len() {
        return visit(items);
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute_all(items, at + 1, visit)?;
        items.swap(at, i);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::tft_with;
    use crate::metrics::TransferMetric;

    fn tiny_config(out: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig {
            suite: SuiteSource::Config(SuiteConfig {
                task_count: 3,
                classes_per_task: 2,
                dim: 4,
                samples_per_class: 20,
                similarity: 0.5,
                difficulty_spread: 1.0,
                eval_fraction: 0.2,
                seed: 9,
            }),
            strategies: vec![Strategy::Naive],
            buffer_capacities: vec![0],
            metric: MetricId::LogMe,
            transrate_eps: DEFAULT_TRANSRATE_EPS,
            random_order_count: 4,
            probe: ProbeConfig {
                samples_per_class: 5,
                epochs: 2,
                ..ProbeConfig::default()
            },
            hyper: TrainHyper {
                epochs: 3,
                ..TrainHyper::default()
            },
            hidden: 8,
            master_seed: 1,
            output_dir: out.to_path_buf(),
        }
    }

    #[test]
    fn random_orders_are_valid_permutations() {
        let orders = sample_random_orders(5, 40, 7).unwrap();
        assert_eq!(orders.len(), 40);
        for order in &orders {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn random_orders_single_count_deterministic() {
        let a = sample_random_orders(6, 1, 123).unwrap();
        let b = sample_random_orders(6, 1, 123).unwrap();
        assert_eq!(a, b);
        // A longer request starts with the same first order.
        let c = sample_random_orders(6, 10, 123).unwrap();
        assert_eq!(c[0], a[0]);
    }

    #[test]
    fn two_task_order_frequencies_are_uniform() {
        let orders = sample_random_orders(2, 1000, 0).unwrap();
        let forward = orders.iter().filter(|o| *o == &vec![0, 1]).count();
        // Binomial(1000, 0.5): 3 standard errors around the mean is ±47.4.
        let se3 = 3.0 * (0.25f64 / 1000.0).sqrt() * 1000.0;
        assert!(
            (forward as f64 - 500.0).abs() <= se3,
            "forward order appeared {forward} times"
        );
    }

    #[test]
    fn execute_run_rejects_bad_orders() {
        let batch = generate_synthetic_suite(&SuiteConfig {
            task_count: 3,
            classes_per_task: 2,
            dim: 3,
            samples_per_class: 10,
            ..SuiteConfig::default()
        })
        .unwrap();
        let hyper = TrainHyper::default();
        for bad in [vec![0, 1], vec![0, 1, 1], vec![0, 1, 5]] {
            assert!(execute_run(&batch.tasks, &bad, Strategy::Naive, 0, &hyper, 8, 0, 0).is_err());
        }
    }

    #[test]
    fn sweep_produces_expected_counts() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let result = run_experiment_in_memory(&config).unwrap();
        assert_eq!(result.runs.len(), 4);
        assert_eq!(result.failures.len(), 0);
        assert_eq!(result.correlations.rows.len(), 1);
        assert_eq!(result.correlations.rows[0].run_count, 4);
        assert_eq!(result.orders.len(), 4);
    }

    #[test]
    fn loop_order_does_not_change_individual_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.strategies = vec![Strategy::Naive, Strategy::Er];
        config.hyper.replay_minibatch = 8;
        config.random_order_count = 2;
        let forward = run_experiment_in_memory(&config).unwrap();

        let mut reversed = config.clone();
        reversed.strategies = vec![Strategy::Er, Strategy::Naive];
        let backward = run_experiment_in_memory(&reversed).unwrap();

        for run in &forward.runs {
            let twin = backward
                .runs
                .iter()
                .find(|r| r.run_id == run.run_id)
                .expect("same run set");
            assert_eq!(run, twin);
        }
    }

    #[test]
    fn constant_metric_flags_degenerate_correlations() {
        struct Flat;
        impl TransferMetric for Flat {
            fn score(
                &self,
                _: &crate::learner::ContinualModel,
                _: &crate::dataset::LabeledSet,
                _: usize,
            ) -> Result<f64> {
                Ok(0.25)
            }
            fn name(&self) -> String {
                "flat".into()
            }
        }

        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let result = run_experiment_in_memory(&config).unwrap();
        // Rebuild the cell's tft vector under a constant backend: the
        // correlation machinery must refuse it rather than invent a number.
        let batch = config.load_batches().unwrap().remove(0);
        let run = execute_run(
            &batch.tasks,
            &result.orders[0],
            Strategy::Naive,
            0,
            &config.hyper,
            config.hidden,
            init_seed(config.master_seed, 0),
            train_seed(config.master_seed, Strategy::Naive, 0, 0),
        )
        .unwrap();
        assert_eq!(tft_with(&run, &Flat).unwrap(), 0.25);
        let flat_tfts = vec![0.25; 4];
        let aas: Vec<f64> = result.runs.iter().map(|r| r.report.aa).collect();
        assert!(pearson(&aas, &flat_tfts).is_err());
    }

    #[test]
    fn comparison_has_requested_random_arms() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let batches = config.load_batches().unwrap();
        let report = compare_hctos_random(&config, &batches).unwrap();
        assert_eq!(report.random.len(), 4);
        assert_eq!(report.hctos.order.len(), 3);
        assert_eq!(report.selections.len(), 1);
        // 3-task single batch: factorial enumeration applies.
        let span = report.brute_force.unwrap();
        assert_eq!(span.order_count, 6);
        assert!(span.min_aa <= report.hctos.aa + 1e-12);
        assert!(report.hctos.aa <= span.max_aa + 1e-12);
        for arm in &report.random {
            assert!(span.min_aa <= arm.aa + 1e-12 && arm.aa <= span.max_aa + 1e-12);
        }
    }

    #[test]
    fn single_task_batches_leave_no_ordering_freedom() {
        let suite = generate_synthetic_suite(&SuiteConfig {
            task_count: 3,
            classes_per_task: 2,
            dim: 4,
            samples_per_class: 15,
            seed: 2,
            ..SuiteConfig::default()
        })
        .unwrap();
        let batches: Vec<TaskBatch> = suite
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| TaskBatch::new(i, vec![t.clone()]).unwrap())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.random_order_count = 3;
        let report = compare_hctos_random(&config, &batches).unwrap();
        for arm in &report.random {
            assert_eq!(arm.order, report.hctos.order);
            assert_eq!(arm.aa, report.hctos.aa);
        }
        assert!((report.hctos.aa - report.random_mean_aa).abs() < 1e-15);
        assert!(report.brute_force.is_none());
    }

    #[test]
    fn permutation_enumerator_counts_factorial() {
        let mut items = vec![0, 1, 2, 3];
        let mut seen = std::collections::BTreeSet::new();
        permute_all(&mut items, 0, &mut |order| {
            seen.insert(order.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn config_validation_names_offending_field() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.random_order_count = 0;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("random_order_count"), "{err}");

        let mut config = tiny_config(dir.path());
        config.strategies.clear();
        assert!(config.validate().is_err());

        let mut config = tiny_config(dir.path());
        config.transrate_eps = 0.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }
}
