//! Greedy task-order selection from pairwise transferability scores.
//!
//! For each task in a batch, a small probe model is trained on a per-class
//! subsample of that task alone; scoring every probe against every other
//! task's train split yields a score matrix `a[t][i]`. The greedy pass then
//! repeatedly appends the unselected task whose total score toward the still
//! unselected tasks is smallest — hardest-to-transfer-from first — which is
//! cheap compared to trying task orders by full training.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{subsample_per_class, Task, TaskBatch};
use crate::error::{Error, Result};
use crate::learner::{init_model, train_task, ReplayBuffer, Strategy, TrainHyper};
use crate::metrics::{MetricId, MetricSpec, TransferMetric};
use crate::rng::{self, stream};

/// How probe models are built: subsample size, training length, and the
/// probe trunk width. Probes always train Naive from a fresh initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub samples_per_class: usize,
    pub epochs: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            samples_per_class: 20,
            epochs: 10,
            hidden: 16,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_class < 1 {
            return Err(Error::config("samples_per_class", "must be at least 1"));
        }
        if self.epochs < 1 {
            return Err(Error::config("probe_epochs", "must be at least 1"));
        }
        if self.hidden < 1 {
            return Err(Error::config("probe_hidden", "must be at least 1"));
        }
        Ok(())
    }

    /// Seed for everything involving the probe of `task_id`: subsampling,
    /// trunk initialization, and epoch shuffling. Tied to the task id, not
    /// its position, so relabeling a batch relabels the probes with it.
    fn task_seed(&self, task_id: usize) -> u64 {
        rng::derive(self.seed, &[stream::PROBE, task_id as u64])
    }
}

/// Pairwise transfer scores `a[t][i]` between tasks of one batch, indexed by
/// position with `task_ids` giving the id at each position. The diagonal is
/// never read and holds NaN, which is why this type carries no `PartialEq`.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    entries: Array2<f64>,
    task_ids: Vec<usize>,
}

impl ScoreMatrix {
    pub fn new(entries: Array2<f64>, task_ids: Vec<usize>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::Dimension {
                context: "score matrix".into(),
                expected: n,
                actual: entries.ncols(),
            });
        }
        if task_ids.len() != n {
            return Err(Error::Dimension {
                context: "score matrix task ids".into(),
                expected: n,
                actual: task_ids.len(),
            });
        }
        if n < 1 {
            return Err(Error::InvalidInput("score matrix must be non-empty".into()));
        }
        for t in 0..n {
            for i in 0..n {
                if t != i && !entries[[t, i]].is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "non-finite score at ({t}, {i})"
                    )));
                }
            }
        }
        Ok(Self { entries, task_ids })
    }

    /// Square matrix over positions 0..n with identity task ids.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        let ids = (0..entries.nrows()).collect();
        Self::new(entries, ids)
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn task_ids(&self) -> &[usize] {
        &self.task_ids
    }

    /// Score of position `t`'s probe against position `i`'s data.
    pub fn score(&self, t: usize, i: usize) -> f64 {
        debug_assert_ne!(t, i, "diagonal is undefined");
        self.entries[[t, i]]
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// The compared candidates of one greedy step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCandidate {
    pub task_id: usize,
    /// Total score from this candidate to the tasks still unselected.
    pub remaining_score: f64,
}

/// What the probes looked like when a selection was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeDescriptor {
    pub probe: ProbeConfig,
    pub metric: MetricId,
}

/// A selected task order plus the per-step evidence for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    /// Task ids in selected order.
    pub order: Vec<usize>,
    /// For every step with more than one candidate, the scores compared.
    pub remaining_scores: Vec<Vec<StepCandidate>>,
    /// Present when the matrix came from probe training.
    pub probe_config: Option<ProbeDescriptor>,
}

/// Builds the pairwise score matrix for a batch with the default backend
/// settings of `metric`.
pub fn pairwise_score_matrix(
    batch: &TaskBatch,
    metric: MetricId,
    probe: &ProbeConfig,
) -> Result<ScoreMatrix> {
    pairwise_score_matrix_with(batch, &MetricSpec::new(metric), probe)
}

/// As [`pairwise_score_matrix`] with any scoring backend.
///
/// For each task: subsample `probe.samples_per_class` rows per class from the
/// train split, train a fresh probe on them (Naive), then score that probe
/// against every other task's full train split. Eval splits are never read.
pub fn pairwise_score_matrix_with<M: TransferMetric + ?Sized>(
    batch: &TaskBatch,
    metric: &M,
    probe: &ProbeConfig,
) -> Result<ScoreMatrix> {
    probe.validate()?;
    let n = batch.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "pairwise scoring needs at least 2 tasks".into(),
        ));
    }

    let mut entries = Array2::from_elem((n, n), f64::NAN);
    for (t, task) in batch.tasks.iter().enumerate() {
        let seed = probe.task_seed(task.task_id);
        let probe_model = train_probe(task, probe, seed)
            .map_err(|e| Error::Selection {
                task_id: task.task_id,
                source: Box::new(e),
            })?;
        for (i, other) in batch.tasks.iter().enumerate() {
            if i == t {
                continue;
            }
            let value = metric
                .score(&probe_model, &other.train, task.task_id)
                .map_err(|e| Error::Selection {
                    task_id: task.task_id,
                    source: Box::new(e),
                })?;
            if !value.is_finite() {
                return Err(Error::Selection {
                    task_id: task.task_id,
                    source: Box::new(Error::Degenerate(format!(
                        "non-finite score against task {}",
                        other.task_id
                    ))),
                });
            }
            entries[[t, i]] = value;
        }
    }
    ScoreMatrix::new(entries, batch.tasks.iter().map(|t| t.task_id).collect())
}

fn train_probe(
    task: &Task,
    probe: &ProbeConfig,
    seed: u64,
) -> Result<crate::learner::ContinualModel> {
    let subsample = subsample_per_class(&task.train, probe.samples_per_class, seed)?;
    // The probe never reads an eval split; the train subsample doubles as the
    // structural placeholder Task requires.
    let probe_task = Task::new(task.task_id, subsample.clone(), subsample)?;
    let model = init_model(task.dim(), probe.hidden, seed);
    let hyper = TrainHyper {
        epochs: probe.epochs,
        strategy: Strategy::Naive,
        replay_minibatch: 0,
        seed,
        ..TrainHyper::default()
    };
    let (trained, _) = train_task(&model, &probe_task, &hyper, &ReplayBuffer::new(0))?;
    Ok(trained)
}

/// Greedy order from a score matrix: repeatedly append the unselected task
/// whose total score toward the other unselected tasks is smallest, breaking
/// ties by lowest task id. The final task joins without a comparison.
pub fn greedy_order(scores: &ScoreMatrix) -> OrderSelection {
    let n = scores.len();
    let mut unselected: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut remaining_scores = Vec::new();

    while unselected.len() > 1 {
        let mut candidates = Vec::with_capacity(unselected.len());
        for &t in &unselected {
            let remaining: f64 = unselected
                .iter()
                .filter(|&&j| j != t)
                .map(|&j| scores.score(t, j))
                .sum();
            candidates.push(StepCandidate {
                task_id: scores.task_ids()[t],
                remaining_score: remaining,
            });
        }
        let best = unselected
            .iter()
            .zip(&candidates)
            .min_by(|(_, a), (_, b)| {
                a.remaining_score
                    .partial_cmp(&b.remaining_score)
                    .expect("finite scores")
                    .then(a.task_id.cmp(&b.task_id))
            })
            .map(|(&pos, _)| pos)
            .expect("non-empty");
        remaining_scores.push(candidates);
        order.push(scores.task_ids()[best]);
        unselected.retain(|&p| p != best);
    }
    if let Some(&last) = unselected.first() {
        order.push(scores.task_ids()[last]);
    }

    OrderSelection {
        order,
        remaining_scores,
        probe_config: None,
    }
}

/// Runs probe scoring and greedy selection for one batch.
pub fn hctos_batch(batch: &TaskBatch, metric: MetricId, probe: &ProbeConfig) -> Result<OrderSelection> {
    let matrix = pairwise_score_matrix(batch, metric, probe)?;
    let mut selection = greedy_order(&matrix);
    selection.probe_config = Some(ProbeDescriptor {
        probe: *probe,
        metric,
    });
    Ok(selection)
}

/// Applies selection independently to each batch, in batch order. Training
/// downstream follows the concatenation of the returned orders.
pub fn hctos_multibatch(
    batches: &[TaskBatch],
    metric: MetricId,
    probe: &ProbeConfig,
) -> Result<Vec<OrderSelection>> {
    if batches.is_empty() {
        return Err(Error::InvalidInput("no batches to order".into()));
    }
    batches
        .iter()
        .map(|batch| hctos_batch(batch, metric, probe))
        .collect()
}
