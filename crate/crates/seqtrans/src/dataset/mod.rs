//! Tasks, labelled sets, and deterministic splits/subsamples.
//!
//! A [`Task`] is one labelled classification dataset with its own label
//! space, split into disjoint train and eval parts. Tasks are grouped into
//! unordered [`TaskBatch`]es, the unit over which order selection operates.
//! All values are immutable after construction and safe to share across
//! parallel runs.

mod io;
mod synth;

pub use io::{
    load_csv_tasks, load_csv_tasks_logged, load_manifest, write_suite, SplitFallback, TaskIngest,
    MANIFEST_NAME,
};
pub use synth::generate_synthetic_suite;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A dense feature matrix (n rows, d columns) with one integer class label
/// per row. Labels are dense local ids in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    inputs: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledSet {
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::InvalidInput("labeled set has no rows".into()));
        }
        if labels.len() != inputs.nrows() {
            return Err(Error::Dimension {
                context: "labeled set labels".into(),
                expected: inputs.nrows(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for class_count {class_count}"
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Self {
            inputs,
            labels,
            class_count,
        })
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    /// Feature dimension d.
    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Row indices grouped by class, in row order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.class_count];
        for (i, &label) in self.labels.iter().enumerate() {
            groups[label].push(i);
        }
        groups
    }

    /// New set containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let inputs = self.inputs.select(ndarray::Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(inputs, labels, self.class_count)
    }
}

/// One task: a labelled dataset with disjoint train/eval parts sharing the
/// same feature dimension and label space.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub task_id: usize,
    pub train: LabeledSet,
    pub eval: LabeledSet,
}

impl Task {
    pub fn new(task_id: usize, train: LabeledSet, eval: LabeledSet) -> Result<Self> {
        if train.dim() != eval.dim() {
            return Err(Error::Dimension {
                context: format!("task {task_id} eval dimension"),
                expected: train.dim(),
                actual: eval.dim(),
            });
        }
        if train.class_count() != eval.class_count() {
            return Err(Error::Dimension {
                context: format!("task {task_id} eval class count"),
                expected: train.class_count(),
                actual: eval.class_count(),
            });
        }
        Ok(Self {
            task_id,
            train,
            eval,
        })
    }

    pub fn dim(&self) -> usize {
        self.train.dim()
    }

    pub fn class_count(&self) -> usize {
        self.train.class_count()
    }
}

/// An unordered group of tasks sharing one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBatch {
    pub batch_id: usize,
    pub tasks: Vec<Task>,
}

impl TaskBatch {
    pub fn new(batch_id: usize, tasks: Vec<Task>) -> Result<Self> {
        if let Some(first) = tasks.first() {
            let d = first.dim();
            for task in &tasks {
                if task.dim() != d {
                    return Err(Error::Dimension {
                        context: format!("batch {batch_id} task {} dimension", task.task_id),
                        expected: d,
                        actual: task.dim(),
                    });
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for task in &tasks {
            if !seen.insert(task.task_id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate task id {} in batch {batch_id}",
                    task.task_id
                )));
            }
        }
        Ok(Self { batch_id, tasks })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task_by_id(&self, task_id: usize) -> Option<&Task> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }
}

/// Knobs for the synthetic suite generator.
///
/// `similarity` interpolates class means between task-private draws (0) and a
/// pool shared by all tasks (1); `difficulty_spread` scales how much per-task
/// cluster noise varies, so tasks differ in hardness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub task_count: usize,
    pub classes_per_task: usize,
    pub dim: usize,
    pub samples_per_class: usize,
    pub similarity: f64,
    pub difficulty_spread: f64,
    pub eval_fraction: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            task_count: 5,
            classes_per_task: 3,
            dim: 8,
            samples_per_class: 50,
            similarity: 0.5,
            difficulty_spread: 1.0,
            eval_fraction: 0.2,
            seed: 0,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.task_count < 2 {
            return Err(Error::config("task_count", "must be at least 2"));
        }
        if self.classes_per_task < 2 {
            return Err(Error::config("classes_per_task", "must be at least 2"));
        }
        if self.dim < 1 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.samples_per_class < 2 {
            return Err(Error::config("samples_per_class", "must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.similarity) {
            return Err(Error::config("similarity", "must lie in [0, 1]"));
        }
        if !self.difficulty_spread.is_finite() || self.difficulty_spread < 0.0 {
            return Err(Error::config("difficulty_spread", "must be finite and >= 0"));
        }
        if !(self.eval_fraction > 0.0 && self.eval_fraction < 1.0) {
            return Err(Error::config("eval_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Stratified train/eval split.
///
/// Per class, `round(eval_fraction * class_size)` rows go to eval, clamped to
/// `[1, class_size - 1]` so neither part is ever empty. Selection shuffles
/// each class with the seeded RNG and takes the head; surviving rows keep
/// their original relative order.
pub fn split_train_eval(
    set: &LabeledSet,
    eval_fraction: f64,
    seed: u64,
) -> Result<(LabeledSet, LabeledSet)> {
    if !(eval_fraction > 0.0 && eval_fraction < 1.0) {
        return Err(Error::config("eval_fraction", "must lie in (0, 1)"));
    }
    let mut rng = rng::rng(seed);
    let mut train_idx = Vec::new();
    let mut eval_idx = Vec::new();
    for (class, mut indices) in set.class_indices().into_iter().enumerate() {
        if indices.is_empty() {
            continue;
        }
        if indices.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "class {class} has a single example and cannot be split"
            )));
        }
        let size = indices.len();
        let want = (eval_fraction * size as f64).round() as usize;
        let eval_count = want.clamp(1, size - 1);
        indices.shuffle(&mut rng);
        eval_idx.extend_from_slice(&indices[..eval_count]);
        train_idx.extend_from_slice(&indices[eval_count..]);
    }
    train_idx.sort_unstable();
    eval_idx.sort_unstable();
    Ok((set.select_rows(&train_idx)?, set.select_rows(&eval_idx)?))
}

/// Uniform per-class subsample without replacement.
///
/// Takes `min(k, class_size)` rows per class; selected rows keep their
/// original relative order.
pub fn subsample_per_class(set: &LabeledSet, k: usize, seed: u64) -> Result<LabeledSet> {
    if k < 1 {
        return Err(Error::config("samples_per_class", "must be at least 1"));
    }
    let mut rng = rng::rng(seed);
    let mut keep = Vec::new();
    for mut indices in set.class_indices() {
        if indices.is_empty() {
            continue;
        }
        let take = k.min(indices.len());
        indices.shuffle(&mut rng);
        keep.extend_from_slice(&indices[..take]);
    }
    keep.sort_unstable();
    set.select_rows(&keep)
}
