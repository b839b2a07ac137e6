//! Gaussian Bhattacharyya coefficient (GBC) over class pairs.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

const VARIANCE_FLOOR: f64 = 1e-6;

/// Negative sum of pairwise Bhattacharyya coefficients between per-class
/// diagonal Gaussians fitted to the features.
///
/// Each class gets mean μ_c and per-dimension variance σ²_c (maximum
/// likelihood, floored at 1e-6). For a class pair the diagonal Bhattacharyya
/// distance is
///
/// ```text
/// D_B = Σ_j (μ_cj − μ_c'j)² / (8·σ̄²_j) + ½·ln( σ̄²_j / √(σ²_cj·σ²_c'j) )
/// ```
///
/// with σ̄²_j the average of the two variances, and the score is
/// `−Σ_{c<c'} exp(−D_B)`. Overlapping classes pull the score toward the
/// number of pairs (negated); well-separated ones let it approach 0.
pub fn gbc(features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "gbc labels".into(),
            expected: n,
            actual: labels.len(),
        });
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    if classes < 2 {
        return Err(Error::InvalidInput("gbc needs at least 2 classes".into()));
    }

    let mut moments = Vec::with_capacity(classes);
    for class in 0..classes {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if rows.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "class {class} has {} samples; gbc needs at least 2 per class",
                rows.len()
            )));
        }
        let block = features.select(Axis(0), &rows);
        let mean = block.mean_axis(Axis(0)).expect("non-empty");
        let centered = &block - &mean;
        let variance = centered
            .mapv(|v| v * v)
            .mean_axis(Axis(0))
            .expect("non-empty")
            .mapv(|v| v.max(VARIANCE_FLOOR));
        moments.push((mean, variance));
    }

    let mut score = 0.0;
    for a in 0..classes {
        for b in (a + 1)..classes {
            let (mu_a, var_a) = &moments[a];
            let (mu_b, var_b) = &moments[b];
            let mut distance = 0.0;
            for j in 0..features.ncols() {
                let pooled = 0.5 * (var_a[j] + var_b[j]);
                let gap = mu_a[j] - mu_b[j];
                distance += gap * gap / (8.0 * pooled)
                    + 0.5 * (pooled / (var_a[j] * var_b[j]).sqrt()).ln();
            }
            score -= (-distance).exp();
        }
    }
    Ok(score)
}
