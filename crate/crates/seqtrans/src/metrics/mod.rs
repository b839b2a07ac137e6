//! Training-free transferability scores.
//!
//! Every backend answers the same question — how promising is a model's
//! representation for a labelled target set — without running any target
//! training. LogME, TransRate, and GBC consume trunk features; LEEP consumes
//! the class probabilities of a chosen source head.

mod gbc;
mod leep;
pub(crate) mod linalg;
mod logme;
mod transrate;

pub use gbc::gbc;
pub use leep::leep;
pub use logme::logme;
pub use transrate::transrate;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledSet;
use crate::error::{Error, Result};
use crate::learner::ContinualModel;

pub const DEFAULT_TRANSRATE_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
// Serialized names match `name()` and the CLI flag values.
pub enum MetricId {
    #[serde(rename = "logme")]
    LogMe,
    #[serde(rename = "leep")]
    Leep,
    #[serde(rename = "transrate")]
    TransRate,
    #[serde(rename = "gbc")]
    Gbc,
}

impl MetricId {
    pub const ALL: [MetricId; 4] = [
        MetricId::LogMe,
        MetricId::Leep,
        MetricId::TransRate,
        MetricId::Gbc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::LogMe => "logme",
            MetricId::Leep => "leep",
            MetricId::TransRate => "transrate",
            MetricId::Gbc => "gbc",
        }
    }
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logme" => Ok(MetricId::LogMe),
            "leep" => Ok(MetricId::Leep),
            "transrate" => Ok(MetricId::TransRate),
            "gbc" => Ok(MetricId::Gbc),
            other => Err(Error::config(
                "metric",
                format!("unknown metric `{other}` (expected logme, leep, transrate, or gbc)"),
            )),
        }
    }
}

/// One transferability measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferScore {
    pub value: f64,
    pub metric: MetricId,
}

/// Anything that can score a model snapshot against a target set. The
/// built-in backends implement this through [`MetricSpec`]; tests substitute
/// constant stubs.
pub trait TransferMetric {
    fn score(
        &self,
        model: &ContinualModel,
        target: &LabeledSet,
        source_task_id: usize,
    ) -> Result<f64>;

    fn name(&self) -> String;
}

/// A backend choice plus its tunables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub id: MetricId,
    pub transrate_eps: f64,
}

impl MetricSpec {
    pub fn new(id: MetricId) -> Self {
        Self {
            id,
            transrate_eps: DEFAULT_TRANSRATE_EPS,
        }
    }
}

impl TransferMetric for MetricSpec {
    fn score(
        &self,
        model: &ContinualModel,
        target: &LabeledSet,
        source_task_id: usize,
    ) -> Result<f64> {
        match self.id {
            MetricId::LogMe => {
                let features = model.forward_features(target.inputs())?;
                logme(&features, target.labels())
            }
            MetricId::Leep => {
                let probs = model.predict_proba(target.inputs(), source_task_id)?;
                leep(&probs, target.labels())
            }
            MetricId::TransRate => {
                let features = model.forward_features(target.inputs())?;
                transrate(&features, target.labels(), self.transrate_eps)
            }
            MetricId::Gbc => {
                let features = model.forward_features(target.inputs())?;
                gbc(&features, target.labels())
            }
        }
    }

    fn name(&self) -> String {
        self.id.name().to_string()
    }
}

/// Scores `target` under the default settings of `metric`.
///
/// LogME, TransRate, and GBC read the trunk features of `target.inputs` and
/// ignore `source_task_id`; LEEP reads the softmax probabilities of the head
/// for `source_task_id` (callers conventionally pass the model's most
/// recently trained task).
pub fn tr(
    metric: MetricId,
    model: &ContinualModel,
    target: &LabeledSet,
    source_task_id: usize,
) -> Result<TransferScore> {
    tr_with(&MetricSpec::new(metric), model, target, source_task_id)
}

/// As [`tr`], with explicit backend tunables.
pub fn tr_with(
    spec: &MetricSpec,
    model: &ContinualModel,
    target: &LabeledSet,
    source_task_id: usize,
) -> Result<TransferScore> {
    let value = spec.score(model, target, source_task_id)?;
    if !value.is_finite() {
        return Err(Error::Degenerate(format!(
            "{} produced a non-finite score",
            spec.name()
        )));
    }
    Ok(TransferScore {
        value,
        metric: spec.id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic_suite, LabeledSet, SuiteConfig};
    use crate::learner::{init_model, train_task, ReplayBuffer, TrainHyper};
    use ndarray::Axis;
    use rand::seq::SliceRandom;

    struct StubMetric(f64);

    impl TransferMetric for StubMetric {
        fn score(&self, _: &ContinualModel, _: &LabeledSet, _: usize) -> Result<f64> {
            Ok(self.0)
        }

        fn name(&self) -> String {
            "stub".into()
        }
    }

    fn trained_model_and_targets() -> (ContinualModel, LabeledSet, LabeledSet) {
        let batch = generate_synthetic_suite(&SuiteConfig {
            task_count: 2,
            classes_per_task: 3,
            dim: 6,
            samples_per_class: 40,
            similarity: 0.5,
            difficulty_spread: 0.5,
            eval_fraction: 0.2,
            seed: 17,
        })
        .unwrap();
        let model = init_model(6, 16, 0);
        let (model, _) = train_task(
            &model,
            &batch.tasks[0],
            &TrainHyper::default(),
            &ReplayBuffer::new(0),
        )
        .unwrap();

        // Near-duplicate of the source train split vs the same rows with
        // shuffled labels.
        let source = batch.tasks[0].train.clone();
        let mut shuffled_labels = source.labels().to_vec();
        shuffled_labels.shuffle(&mut crate::rng::rng(99));
        let shuffled = LabeledSet::new(
            source.inputs().clone(),
            shuffled_labels,
            source.class_count(),
        )
        .unwrap();
        (model, source, shuffled)
    }

    #[test]
    fn stub_metric_passes_through() {
        let (model, target, _) = trained_model_and_targets();
        let stub = StubMetric(4.25);
        assert_eq!(stub.score(&model, &target, 0).unwrap(), 4.25);
    }

    #[test]
    fn tr_is_pure() {
        let (model, target, _) = trained_model_and_targets();
        for metric in MetricId::ALL {
            let a = tr(metric, &model, &target, 0).unwrap();
            let b = tr(metric, &model, &target, 0).unwrap();
            assert_eq!(a, b, "{metric}");
        }
    }

    #[test]
    fn tr_matches_direct_backend_call() {
        let (model, target, _) = trained_model_and_targets();
        let features = model.forward_features(target.inputs()).unwrap();
        let direct = logme(&features, target.labels()).unwrap();
        let dispatched = tr(MetricId::LogMe, &model, &target, 0).unwrap();
        assert_eq!(dispatched.value, direct);
        assert_eq!(dispatched.metric, MetricId::LogMe);
    }

    #[test]
    fn leep_uses_the_requested_head() {
        let (model, target, _) = trained_model_and_targets();
        // Head 0 exists; head 7 does not.
        assert!(tr(MetricId::Leep, &model, &target, 0).is_ok());
        assert!(matches!(
            tr(MetricId::Leep, &model, &target, 7),
            Err(Error::MissingHead { task_id: 7 })
        ));
    }

    /// Every metric prefers the model's own source data over the same rows
    /// with destroyed label structure.
    #[test]
    fn ranking_sanity_across_all_metrics() {
        let (model, aligned, shuffled) = trained_model_and_targets();
        for metric in MetricId::ALL {
            let good = tr(metric, &model, &aligned, 0).unwrap().value;
            let bad = tr(metric, &model, &shuffled, 0).unwrap().value;
            assert!(good > bad, "{metric}: {good} !> {bad}");
        }
    }

    /// Joint row permutation leaves every metric unchanged to 1e-10.
    #[test]
    fn permutation_invariance_across_all_metrics() {
        let (model, target, _) = trained_model_and_targets();
        let n = target.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut crate::rng::rng(5));
        let permuted = LabeledSet::new(
            target.inputs().select(Axis(0), &perm),
            perm.iter().map(|&i| target.labels()[i]).collect(),
            target.class_count(),
        )
        .unwrap();
        for metric in MetricId::ALL {
            let a = tr(metric, &model, &target, 0).unwrap().value;
            let b = tr(metric, &model, &permuted, 0).unwrap().value;
            assert!((a - b).abs() < 1e-10, "{metric}: {a} vs {b}");
        }
    }

    #[test]
    fn metric_id_round_trips_through_strings() {
        for metric in MetricId::ALL {
            let parsed: MetricId = metric.name().parse().unwrap();
            assert_eq!(parsed, metric);
        }
        assert!("resnet".parse::<MetricId>().is_err());
    }
}
