//! The continual model and its training strategies.
//!
//! The model is a two-layer tanh trunk shared across tasks plus one affine
//! head per task. Training a task sequence produces one snapshot per
//! completed task; strategies differ in how each SGD step uses the replay
//! buffer:
//!
//! - `Naive`: plain fine-tuning on the current task.
//! - `ER` (experience replay): every step adds a buffer minibatch, routed
//!   through the heads the samples were stored under, to the loss.
//! - `AGEM`: every step projects the current gradient so it cannot conflict
//!   with a reference gradient computed on a buffer minibatch.

mod buffer;

pub use buffer::{buffer_insert_reservoir, ReplayBuffer, ReplayItem};

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Naive,
    Er,
    Agem,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::Er => "er",
            Strategy::Agem => "agem",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Strategy::Naive),
            "er" => Ok(Strategy::Er),
            "agem" | "a-gem" => Ok(Strategy::Agem),
            other => Err(Error::config(
                "strategy",
                format!("unknown strategy `{other}` (expected naive, er, or agem)"),
            )),
        }
    }
}

/// Per-task training hyperparameters.
///
/// Deserializes with struct-level defaults so experiment configs can set only
/// the fields they care about.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Buffer samples added per step (ER) or used for the reference gradient
    /// (A-GEM). Must be 0 exactly when the strategy is `Naive`.
    pub replay_minibatch: usize,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.03,
            epochs: 20,
            minibatch: 32,
            replay_minibatch: 0,
            strategy: Strategy::Naive,
            seed: 0,
        }
    }
}

impl TrainHyper {
    /// Checks the configuration-level invariants. `train_task` itself does
    /// not call this, so degenerate settings (like a zero learning rate) stay
    /// usable in tests; config ingestion is expected to validate.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be finite and > 0"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.minibatch < 1 {
            return Err(Error::config("minibatch", "must be at least 1"));
        }
        let naive = self.strategy == Strategy::Naive;
        if naive != (self.replay_minibatch == 0) {
            return Err(Error::config(
                "replay_minibatch",
                "must be 0 exactly when strategy is naive",
            ));
        }
        Ok(())
    }

    pub fn with_strategy(mut self, strategy: Strategy, replay_minibatch: usize) -> Self {
        self.strategy = strategy;
        self.replay_minibatch = if strategy == Strategy::Naive {
            0
        } else {
            replay_minibatch
        };
        self
    }
}

/// One affine output layer, `hidden → classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Head {
    fn zeros(hidden: usize, classes: usize) -> Self {
        Self {
            w: Array2::zeros((hidden, classes)),
            b: Array1::zeros(classes),
        }
    }

    pub fn class_count(&self) -> usize {
        self.b.len()
    }
}

/// Shared two-layer tanh trunk plus per-task heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinualModel {
    w1: Array2<f64>, // input_dim × hidden
    b1: Array1<f64>,
    w2: Array2<f64>, // hidden × hidden
    b2: Array1<f64>,
    heads: BTreeMap<usize, Head>,
    rng_seed: u64,
}

/// Fresh model with a seeded uniform fan-in trunk (each layer's weights and
/// biases drawn from U[-1/√fan_in, 1/√fan_in]) and no heads. Heads appear
/// zero-initialized when a task is first trained.
pub fn init_model(input_dim: usize, hidden: usize, seed: u64) -> ContinualModel {
    assert!(input_dim >= 1 && hidden >= 1, "degenerate model shape");
    let mut rng = rng::rng(rng::derive(seed, &[stream::INIT]));
    let mut layer = |fan_in: usize, rows: usize, cols: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let w = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..=bound));
        let b = Array1::from_shape_fn(cols, |_| rng.gen_range(-bound..=bound));
        (w, b)
    };
    let (w1, b1) = layer(input_dim, input_dim, hidden);
    let (w2, b2) = layer(hidden, hidden, hidden);
    ContinualModel {
        w1,
        b1,
        w2,
        b2,
        heads: BTreeMap::new(),
        rng_seed: seed,
    }
}

impl ContinualModel {
    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn head(&self, task_id: usize) -> Option<&Head> {
        self.heads.get(&task_id)
    }

    pub fn head_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.heads.keys().copied()
    }

    /// Adds a zero head for `task_id` if none exists yet.
    pub fn ensure_head(&mut self, task_id: usize, classes: usize) {
        let hidden = self.hidden();
        self.heads
            .entry(task_id)
            .or_insert_with(|| Head::zeros(hidden, classes));
    }

    fn check_input(&self, inputs: &Array2<f64>) -> Result<()> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "model input".into(),
                expected: self.input_dim(),
                actual: inputs.ncols(),
            });
        }
        Ok(())
    }

    fn require_head(&self, task_id: usize) -> Result<&Head> {
        self.heads
            .get(&task_id)
            .ok_or(Error::MissingHead { task_id })
    }

    /// Post-tanh activations of the second trunk layer, n × hidden.
    pub fn forward_features(&self, inputs: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_input(inputs)?;
        let a1 = (inputs.dot(&self.w1) + &self.b1).mapv(f64::tanh);
        Ok((a1.dot(&self.w2) + &self.b2).mapv(f64::tanh))
    }

    /// Raw head outputs, n × C_task.
    pub fn logits(&self, inputs: &Array2<f64>, task_id: usize) -> Result<Array2<f64>> {
        let head = self.require_head(task_id)?;
        let features = self.forward_features(inputs)?;
        Ok(features.dot(&head.w) + &head.b)
    }

    /// Softmax of the head's logits, row-stochastic n × C_task.
    pub fn predict_proba(&self, inputs: &Array2<f64>, task_id: usize) -> Result<Array2<f64>> {
        let mut logits = self.logits(inputs, task_id)?;
        for mut row in logits.rows_mut() {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|v| (v - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        Ok(logits)
    }

    /// Argmax class per row; ties go to the lowest class id.
    pub fn predict(&self, inputs: &Array2<f64>, task_id: usize) -> Result<Vec<usize>> {
        let logits = self.logits(inputs, task_id)?;
        Ok(logits
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }

    /// Fraction of rows predicted correctly.
    pub fn accuracy(&self, inputs: &Array2<f64>, labels: &[usize], task_id: usize) -> Result<f64> {
        let predictions = self.predict(inputs, task_id)?;
        let correct = predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| p == l)
            .count();
        Ok(correct as f64 / labels.len() as f64)
    }
}

/// Intermediate activations cached for backprop.
struct ForwardPass {
    a1: Array2<f64>,
    a2: Array2<f64>,
    logits: Array2<f64>,
}

fn forward_cached(model: &ContinualModel, x: &Array2<f64>, head: &Head) -> ForwardPass {
    let a1 = (x.dot(&model.w1) + &model.b1).mapv(f64::tanh);
    let a2 = (a1.dot(&model.w2) + &model.b2).mapv(f64::tanh);
    let logits = a2.dot(&head.w) + &head.b;
    ForwardPass { a1, a2, logits }
}

/// Mean cross-entropy of logits against labels, computed via log-sum-exp.
fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &label) in logits.rows().into_iter().zip(labels) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[label];
    }
    total / labels.len() as f64
}

/// Softmax rows of `logits` minus the one-hot labels, scaled by 1/weight_n.
/// This is dL/dlogits for the mean cross-entropy over `weight_n` rows.
fn logit_gradient(logits: &Array2<f64>, labels: &[usize], weight_n: f64) -> Array2<f64> {
    let mut g = Array2::zeros(logits.raw_dim());
    for (i, (row, &label)) in logits.rows().into_iter().zip(labels).enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (c, e) in exps.iter().enumerate() {
            g[[i, c]] = e / sum / weight_n;
        }
        g[[i, label]] -= 1.0 / weight_n;
    }
    g
}

/// Gradients for the trunk and one head.
#[derive(Debug, Clone)]
struct Gradients {
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
    head_w: Array2<f64>,
    head_b: Array1<f64>,
}

impl Gradients {
    fn zeros(model: &ContinualModel, head: &Head) -> Self {
        Self {
            w1: Array2::zeros(model.w1.raw_dim()),
            b1: Array1::zeros(model.b1.raw_dim()),
            w2: Array2::zeros(model.w2.raw_dim()),
            b2: Array1::zeros(model.b2.raw_dim()),
            head_w: Array2::zeros(head.w.raw_dim()),
            head_b: Array1::zeros(head.b.raw_dim()),
        }
    }

    fn flatten(&self) -> Array1<f64> {
        let mut out = Vec::with_capacity(
            self.w1.len()
                + self.b1.len()
                + self.w2.len()
                + self.b2.len()
                + self.head_w.len()
                + self.head_b.len(),
        );
        out.extend(self.w1.iter());
        out.extend(self.b1.iter());
        out.extend(self.w2.iter());
        out.extend(self.b2.iter());
        out.extend(self.head_w.iter());
        out.extend(self.head_b.iter());
        Array1::from_vec(out)
    }

    fn assign_from_flat(&mut self, flat: &Array1<f64>) {
        let mut it = flat.iter().copied();
        for block in [
            self.w1.iter_mut().collect::<Vec<_>>(),
            self.b1.iter_mut().collect(),
            self.w2.iter_mut().collect(),
            self.b2.iter_mut().collect(),
            self.head_w.iter_mut().collect(),
            self.head_b.iter_mut().collect(),
        ] {
            for slot in block {
                *slot = it.next().expect("flat gradient too short");
            }
        }
        debug_assert!(it.next().is_none(), "flat gradient too long");
    }
}

/// Backprop of dL/dlogits through trunk + head. Adds the head gradient into
/// `grads` and the trunk gradient into the shared trunk blocks.
fn backprop(
    model: &ContinualModel,
    x: &Array2<f64>,
    pass: &ForwardPass,
    dlogits: &Array2<f64>,
    head: &Head,
    grads: &mut Gradients,
    trunk_only: bool,
) {
    if !trunk_only {
        grads.head_w = &grads.head_w + &pass.a2.t().dot(dlogits);
        grads.head_b = &grads.head_b + &dlogits.sum_axis(Axis(0));
    }
    let da2 = dlogits.dot(&head.w.t());
    let dz2 = da2 * (1.0 - &pass.a2 * &pass.a2);
    grads.w2 = &grads.w2 + &pass.a1.t().dot(&dz2);
    grads.b2 = &grads.b2 + &dz2.sum_axis(Axis(0));
    let da1 = dz2.dot(&model.w2.t());
    let dz1 = da1 * (1.0 - &pass.a1 * &pass.a1);
    grads.w1 = &grads.w1 + &x.t().dot(&dz1);
    grads.b1 = &grads.b1 + &dz1.sum_axis(Axis(0));
}

/// Loss and gradient of the mean cross-entropy of (x, labels) under the head
/// for `task_id`.
fn loss_and_grad(
    model: &ContinualModel,
    x: &Array2<f64>,
    labels: &[usize],
    task_id: usize,
) -> Result<(f64, Gradients)> {
    let head = model.require_head(task_id)?;
    let pass = forward_cached(model, x, head);
    let loss = cross_entropy(&pass.logits, labels);
    let dlogits = logit_gradient(&pass.logits, labels, labels.len() as f64);
    let mut grads = Gradients::zeros(model, head);
    backprop(model, x, &pass, &dlogits, head, &mut grads, false);
    Ok((loss, grads))
}

fn apply_step(model: &mut ContinualModel, task_id: usize, grads: &Gradients, lr: f64) {
    model.w1.scaled_add(-lr, &grads.w1);
    model.b1.scaled_add(-lr, &grads.b1);
    model.w2.scaled_add(-lr, &grads.w2);
    model.b2.scaled_add(-lr, &grads.b2);
    let head = model.heads.get_mut(&task_id).expect("head exists");
    head.w.scaled_add(-lr, &grads.head_w);
    head.b.scaled_add(-lr, &grads.head_b);
}

/// Projects `g` away from conflict with `g_ref`.
///
/// If the gradients agree (`g·g_ref ≥ 0`) the input is returned unchanged,
/// bit for bit. Otherwise the component of `g` along `g_ref` is removed:
/// `g − (g·g_ref / g_ref·g_ref)·g_ref`, leaving the result orthogonal to the
/// reference direction.
pub fn agem_project(g: &Array1<f64>, g_ref: &Array1<f64>) -> Result<Array1<f64>> {
    if g.len() != g_ref.len() {
        return Err(Error::Dimension {
            context: "gradient projection".into(),
            expected: g.len(),
            actual: g_ref.len(),
        });
    }
    let dot = g.dot(g_ref);
    if dot >= 0.0 {
        return Ok(g.clone());
    }
    let scale = dot / g_ref.dot(g_ref);
    Ok(g - &(scale * g_ref))
}

/// Replay samples grouped per source task, preserving buffer order.
fn group_by_task<'a>(samples: &[&'a ReplayItem]) -> BTreeMap<usize, Vec<&'a ReplayItem>> {
    let mut groups: BTreeMap<usize, Vec<&ReplayItem>> = BTreeMap::new();
    for item in samples {
        groups.entry(item.task_id).or_default().push(item);
    }
    groups
}

fn stack_items(items: &[&ReplayItem]) -> (Array2<f64>, Vec<usize>) {
    let dim = items[0].input.len();
    let mut x = Array2::zeros((items.len(), dim));
    let mut labels = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        x.row_mut(i).assign(&item.input);
        labels.push(item.label);
    }
    (x, labels)
}

/// Trains one task on top of `model` and returns the updated model and
/// buffer; the inputs are untouched, so earlier snapshots stay valid.
///
/// Runs `hyper.epochs` passes of seeded-shuffled minibatch SGD on the task's
/// train split, creating a zero head for the task if needed. Strategy handling
/// per step is described on [`Strategy`]. After training, the task's train
/// rows are offered to the replay buffer under reservoir eviction.
pub fn train_task(
    model: &ContinualModel,
    task: &Task,
    hyper: &TrainHyper,
    buffer: &ReplayBuffer,
) -> Result<(ContinualModel, ReplayBuffer)> {
    let mut model = model.clone();
    model.check_input(task.train.inputs())?;
    model.ensure_head(task.task_id, task.class_count());

    let n = task.train.len();
    let mut shuffle_rng = rng::rng(rng::derive(
        hyper.seed,
        &[stream::SHUFFLE, task.task_id as u64],
    ));
    let mut replay_rng = rng::rng(rng::derive(
        hyper.seed,
        &[stream::REPLAY, task.task_id as u64],
    ));
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..hyper.epochs {
        indices.shuffle(&mut shuffle_rng);
        for (step, chunk) in indices.chunks(hyper.minibatch.max(1)).enumerate() {
            let x = task.train.inputs().select(Axis(0), chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| task.train.labels()[i]).collect();
            let (loss, mut grads) = loss_and_grad(&model, &x, &labels, task.task_id)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    task_id: task.task_id,
                    epoch,
                    step,
                });
            }

            let use_replay = hyper.strategy != Strategy::Naive
                && hyper.replay_minibatch > 0
                && !buffer.is_empty();
            match hyper.strategy {
                Strategy::Naive => {}
                Strategy::Er if use_replay => {
                    let samples = buffer.sample(hyper.replay_minibatch, &mut replay_rng);
                    let total = samples.len() as f64;
                    for (source_task, items) in group_by_task(&samples) {
                        let (rx, rlabels) = stack_items(&items);
                        let head = match model.head(source_task) {
                            Some(h) => h.clone(),
                            // Unreachable in practice: the buffer only holds
                            // rows of previously trained tasks.
                            None => continue,
                        };
                        let pass = forward_cached(&model, &rx, &head);
                        let replay_loss = cross_entropy(&pass.logits, &rlabels);
                        if !replay_loss.is_finite() {
                            return Err(Error::TrainingDiverged {
                                task_id: task.task_id,
                                epoch,
                                step,
                            });
                        }
                        // Mean over the whole replay batch: per-group rows
                        // weighted by 1/total so groups sum to the batch mean.
                        let dlogits = logit_gradient(&pass.logits, &rlabels, total);
                        let mut replay_grads = Gradients::zeros(&model, &head);
                        backprop(&model, &rx, &pass, &dlogits, &head, &mut replay_grads, false);
                        grads.w1 = &grads.w1 + &replay_grads.w1;
                        grads.b1 = &grads.b1 + &replay_grads.b1;
                        grads.w2 = &grads.w2 + &replay_grads.w2;
                        grads.b2 = &grads.b2 + &replay_grads.b2;
                        let head_mut = model.heads.get_mut(&source_task).expect("head exists");
                        head_mut.w.scaled_add(-hyper.learning_rate, &replay_grads.head_w);
                        head_mut.b.scaled_add(-hyper.learning_rate, &replay_grads.head_b);
                    }
                }
                Strategy::Agem if use_replay => {
                    let samples = buffer.sample(hyper.replay_minibatch, &mut replay_rng);
                    let total = samples.len() as f64;
                    let current_head = model.require_head(task.task_id)?.clone();
                    // Reference gradient over the memory minibatch, taken
                    // w.r.t. the trunk only: frozen heads are not part of the
                    // projected vector, so their block is zero.
                    let mut ref_grads = Gradients::zeros(&model, &current_head);
                    for (source_task, items) in group_by_task(&samples) {
                        let (rx, rlabels) = stack_items(&items);
                        let head = match model.head(source_task) {
                            Some(h) => h.clone(),
                            None => continue,
                        };
                        let pass = forward_cached(&model, &rx, &head);
                        let dlogits = logit_gradient(&pass.logits, &rlabels, total);
                        backprop(&model, &rx, &pass, &dlogits, &head, &mut ref_grads, true);
                    }
                    let flat = grads.flatten();
                    let flat_ref = ref_grads.flatten();
                    let projected = agem_project(&flat, &flat_ref)?;
                    grads.assign_from_flat(&projected);
                }
                _ => {}
            }

            apply_step(&mut model, task.task_id, &grads, hyper.learning_rate);
        }
    }

    let reservoir_seed = rng::derive(hyper.seed, &[stream::RESERVOIR, task.task_id as u64]);
    let rows = (0..n).map(|i| ReplayItem {
        input: task.train.inputs().row(i).to_owned(),
        label: task.train.labels()[i],
        task_id: task.task_id,
    });
    let buffer = buffer_insert_reservoir(buffer, rows, reservoir_seed);
    Ok((model, buffer))
}

/// Snapshots recorded after each completed task of a sequence.
#[derive(Debug, Clone)]
pub struct SnapshotSequence {
    snapshots: Vec<ContinualModel>,
}

impl SnapshotSequence {
    pub fn new() -> Self {
        Self {
            snapshots: Vec::new(),
        }
    }

    pub fn push(&mut self, model: ContinualModel) {
        self.snapshots.push(model);
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshot after the k-th task (0-based position in the sequence).
    pub fn after(&self, position: usize) -> Option<&ContinualModel> {
        self.snapshots.get(position)
    }

    pub fn last(&self) -> Option<&ContinualModel> {
        self.snapshots.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ContinualModel> {
        self.snapshots.iter()
    }
}

impl Default for SnapshotSequence {
    fn default() -> Self {
        Self::new()
    }
}

/// Trains `tasks` in order starting from `model`, recording a snapshot after
/// each task.
pub fn train_sequence(
    model: &ContinualModel,
    tasks: &[&Task],
    hyper: &TrainHyper,
    buffer: &ReplayBuffer,
) -> Result<(SnapshotSequence, ReplayBuffer)> {
    let mut snapshots = SnapshotSequence::new();
    let mut current = model.clone();
    let mut buffer = buffer.clone();
    for task in tasks {
        let (next, next_buffer) = train_task(&current, task, hyper, &buffer)?;
        snapshots.push(next.clone());
        current = next;
        buffer = next_buffer;
    }
    Ok((snapshots, buffer))
}

/// Maximum relative error between analytic gradients and central finite
/// differences of the loss, over every trunk and head parameter.
///
/// The finite-difference side perturbs one parameter at a time by ±`step` and
/// re-evaluates the loss through the forward pass only. Relative error is
/// `|analytic − numeric| / max(|analytic|, |numeric|, 1e-6)`; the floor keeps
/// round-off noise on near-zero gradients from registering as disagreement.
pub fn gradient_check(
    model: &ContinualModel,
    inputs: &Array2<f64>,
    labels: &[usize],
    task_id: usize,
    step: f64,
) -> Result<f64> {
    let (_, grads) = loss_and_grad(model, inputs, labels, task_id)?;
    let analytic = grads.flatten();
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    let loss_at = |m: &ContinualModel| -> Result<f64> {
        Ok(cross_entropy(&m.logits(inputs, task_id)?, labels))
    };
    for (index, &a) in analytic.iter().enumerate() {
        let original = *param_mut(&mut probe, task_id, index);
        *param_mut(&mut probe, task_id, index) = original + step;
        let plus = loss_at(&probe)?;
        *param_mut(&mut probe, task_id, index) = original - step;
        let minus = loss_at(&probe)?;
        *param_mut(&mut probe, task_id, index) = original;
        let numeric = (plus - minus) / (2.0 * step);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Mutable access to the flattened trunk + head parameter vector, in the same
/// order `Gradients::flatten` uses.
fn param_mut(model: &mut ContinualModel, task_id: usize, index: usize) -> &mut f64 {
    let sizes = [
        model.w1.len(),
        model.b1.len(),
        model.w2.len(),
        model.b2.len(),
    ];
    let mut offset = index;
    if offset < sizes[0] {
        return model.w1.as_slice_mut().unwrap().get_mut(offset).unwrap();
    }
    offset -= sizes[0];
    if offset < sizes[1] {
        return model.b1.as_slice_mut().unwrap().get_mut(offset).unwrap();
    }
    offset -= sizes[1];
    if offset < sizes[2] {
        return model.w2.as_slice_mut().unwrap().get_mut(offset).unwrap();
    }
    offset -= sizes[2];
    if offset < sizes[3] {
        return model.b2.as_slice_mut().unwrap().get_mut(offset).unwrap();
    }
    offset -= sizes[3];
    let head = model.heads.get_mut(&task_id).expect("head exists");
    if offset < head.w.len() {
        return head.w.as_slice_mut().unwrap().get_mut(offset).unwrap();
    }
    offset -= head.w.len();
    head.b.as_slice_mut().unwrap().get_mut(offset).unwrap()
}
