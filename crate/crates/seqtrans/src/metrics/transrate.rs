//! TransRate: coding-rate gap between pooled and class-conditional features.

use ndarray::{Array2, Axis};

use super::linalg;
use crate::error::{Error, Result};

/// Coding-rate difference `R(Z) − Σ_c (n_c/n)·R(Z_c)`.
///
/// `Z` is the feature matrix centered over all rows; each `Z_c` is the rows
/// of class c re-centered on the class mean. The rate of a block with k rows
/// is
///
/// ```text
/// R = ½·ln det( I_h + h/(k·eps²)·ZᵀZ )
/// ```
///
/// The gap approximates the mutual information between features and labels
/// at distortion `eps`, so tighter class clusters inside a spread-out cloud
/// score higher. Non-negative up to factorization round-off.
pub fn transrate(features: &Array2<f64>, labels: &[usize], eps: f64) -> Result<f64> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "transrate labels".into(),
            expected: n,
            actual: labels.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidInput("transrate needs at least 2 rows".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("transrate_eps", "must be finite and > 0"));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }

    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let total = rate(&center(features), eps)?;
    let mut conditional = 0.0;
    for class in 0..classes {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if rows.is_empty() {
            continue;
        }
        let block = features.select(Axis(0), &rows);
        conditional += rows.len() as f64 / n as f64 * rate(&center(&block), eps)?;
    }
    Ok(total - conditional)
}

fn center(features: &Array2<f64>) -> Array2<f64> {
    let mean = features.mean_axis(Axis(0)).expect("non-empty");
    features - &mean
}

fn rate(z: &Array2<f64>, eps: f64) -> Result<f64> {
    let (k, h) = z.dim();
    let scale = h as f64 / (k as f64 * eps * eps);
    let gram = Array2::<f64>::eye(h) + scale * z.t().dot(z);
    Ok(0.5 * linalg::logdet_spd(&gram)?)
}
