//! Sequence-level evaluation: average accuracy, total forward/reverse
//! transferability, and correlation between them.
//!
//! A [`SequenceRun`] bundles what one continual-learning pass over an ordered
//! task list produced (the per-task snapshots plus the bookkeeping needed to
//! interpret them). The measures here reduce a run to scalars:
//!
//! - `average_accuracy`: how much the final model still knows about every
//!   task, on held-out data.
//! - `tft`: how promising each next task looked to the model right before
//!   training it (forward transfer, averaged over the sequence).
//! - `trt`: how well the final model's representation still matches earlier
//!   tasks' data (reverse transfer — a cheap forgetting proxy).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::learner::{ContinualModel, SnapshotSequence, Strategy};
use crate::metrics::{MetricId, MetricSpec, TransferMetric};

/// One completed continual-learning pass over an ordered task sequence.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    /// Task ids in training order.
    pub order: Vec<usize>,
    /// Tasks in the same order as `order`.
    pub tasks: Vec<Task>,
    /// Model state recorded after each task.
    pub snapshots: SnapshotSequence,
    pub strategy: Strategy,
    pub buffer_capacity: usize,
    pub seed: u64,
}

impl SequenceRun {
    pub fn validate(&self) -> Result<()> {
        let t = self.tasks.len();
        if t < 2 {
            return Err(Error::InvalidInput(
                "a sequence run needs at least 2 tasks".into(),
            ));
        }
        if self.order.len() != t || self.snapshots.len() != t {
            return Err(Error::Dimension {
                context: "sequence run lengths".into(),
                expected: t,
                actual: self.order.len().min(self.snapshots.len()),
            });
        }
        for (task, &id) in self.tasks.iter().zip(&self.order) {
            if task.task_id != id {
                return Err(Error::InvalidInput(format!(
                    "order lists task {id} where task {} sits",
                    task.task_id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn final_model(&self) -> Result<&ContinualModel> {
        self.snapshots
            .last()
            .ok_or_else(|| Error::Evaluation("sequence run has no snapshots".into()))
    }
}

/// Scalar summary of one run plus the full accuracy matrix behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub aa: f64,
    pub tft: f64,
    pub trt: f64,
    /// Row t holds the accuracy of the snapshot after task t on the eval
    /// split of every task j ≤ t (sequence positions).
    pub acc_matrix: Vec<Vec<f64>>,
    pub metric: MetricId,
    pub order: Vec<usize>,
}

/// Mean accuracy of `final_model` over every task's eval split, using each
/// task's own head.
pub fn average_accuracy(final_model: &ContinualModel, tasks: &[Task]) -> Result<f64> {
    if tasks.is_empty() {
        return Err(Error::Evaluation("no tasks to evaluate".into()));
    }
    let mut total = 0.0;
    for task in tasks {
        if task.eval.is_empty() {
            return Err(Error::Evaluation(format!(
                "task {} has an empty eval split",
                task.task_id
            )));
        }
        total += final_model.accuracy(task.eval.inputs(), task.eval.labels(), task.task_id)?;
    }
    Ok(total / tasks.len() as f64)
}

/// Total forward transferability: the mean over sequence positions t ≥ 2 of
/// the transfer score of the model *before* task t against task t's train
/// split. The source head is the most recently trained one at that point.
pub fn tft(run: &SequenceRun, metric: MetricId) -> Result<f64> {
    tft_with(run, &MetricSpec::new(metric))
}

pub fn tft_with<M: TransferMetric + ?Sized>(run: &SequenceRun, metric: &M) -> Result<f64> {
    run.validate()?;
    let mut total = 0.0;
    let t = run.len();
    for position in 1..t {
        let model = run
            .snapshots
            .after(position - 1)
            .ok_or_else(|| Error::Evaluation("missing snapshot".into()))?;
        let source = run.order[position - 1];
        let value = metric.score(model, &run.tasks[position].train, source)?;
        if !value.is_finite() {
            return Err(Error::Degenerate(format!(
                "non-finite forward transfer term at position {position}"
            )));
        }
        total += value;
    }
    Ok(total / (t - 1) as f64)
}

/// Total reverse transferability: the mean over positions t ≤ T−1 of the
/// transfer score of the *final* model against task t's train split. The
/// source head is the last-trained one.
pub fn trt(run: &SequenceRun, metric: MetricId) -> Result<f64> {
    trt_with(run, &MetricSpec::new(metric))
}

pub fn trt_with<M: TransferMetric + ?Sized>(run: &SequenceRun, metric: &M) -> Result<f64> {
    run.validate()?;
    let t = run.len();
    let final_model = run.final_model()?;
    let source = run.order[t - 1];
    let mut total = 0.0;
    for position in 0..t - 1 {
        let value = metric.score(final_model, &run.tasks[position].train, source)?;
        if !value.is_finite() {
            return Err(Error::Degenerate(format!(
                "non-finite reverse transfer term at position {position}"
            )));
        }
        total += value;
    }
    Ok(total / (t - 1) as f64)
}

/// Pearson correlation with its two-sided significance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Sample Pearson r between `xs` and `ys`, with the two-sided p-value from
/// the exact t-transform `t = r·√((n−2)/(1−r²))` against a Student-t
/// distribution with n−2 degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::Dimension {
            context: "pearson inputs".into(),
            expected: n,
            actual: ys.len(),
        });
    }
    if n < 3 {
        return Err(Error::Degenerate(
            "pearson needs at least 3 points".into(),
        ));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Degenerate(
            "pearson inputs have zero variance".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if 1.0 - r * r <= f64::EPSILON {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df)
            .map_err(|e| Error::Degenerate(format!("t-distribution: {e}")))?;
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(Correlation { r, p_value, n })
}

/// Evaluates every snapshot on every earlier task and assembles the scalar
/// measures into one report.
pub fn sequence_report(run: &SequenceRun, metric: MetricId) -> Result<SequenceReport> {
    run.validate()?;
    let t = run.len();
    let mut acc_matrix = Vec::with_capacity(t);
    for row in 0..t {
        let model = run
            .snapshots
            .after(row)
            .ok_or_else(|| Error::Evaluation("missing snapshot".into()))?;
        let mut accs = Vec::with_capacity(row + 1);
        for task in &run.tasks[..=row] {
            accs.push(model.accuracy(
                task.eval.inputs(),
                task.eval.labels(),
                task.task_id,
            )?);
        }
        acc_matrix.push(accs);
    }
    let last = acc_matrix.last().expect("t >= 2");
    let aa = last.iter().sum::<f64>() / last.len() as f64;
    Ok(SequenceReport {
        aa,
        tft: tft(run, metric)?,
        trt: trt(run, metric)?,
        acc_matrix,
        metric,
        order: run.order.clone(),
    })
}
