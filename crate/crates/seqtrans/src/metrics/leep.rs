//! Log expected empirical prediction (LEEP) from source-head probabilities.

use ndarray::Array2;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-6;

/// LEEP of a row-stochastic source-probability matrix against target labels.
///
/// Builds the empirical joint `P̂(y, z) = (1/n)·Σᵢ probs[i, z]·1[yᵢ = y]`
/// between target labels y and source classes z, conditions it to `P̂(y|z)`,
/// and scores the resulting label distribution on each sample:
///
/// ```text
/// leep = (1/n)·Σᵢ ln( Σ_z P̂(yᵢ|z)·probs[i, z] )
/// ```
///
/// Source classes that never receive mass (`P̂(z) = 0`) are excluded from the
/// inner sum. The score is never positive: each inner sum is a probability.
pub fn leep(source_probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let n = source_probs.nrows();
    let z_count = source_probs.ncols();
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "leep labels".into(),
            expected: n,
            actual: labels.len(),
        });
    }
    if n == 0 || z_count == 0 {
        return Err(Error::InvalidInput("leep needs a non-empty matrix".into()));
    }
    for (i, row) in source_probs.rows().into_iter().enumerate() {
        if row.iter().any(|&p| !(0.0..=1.0 + ROW_SUM_TOL).contains(&p)) {
            return Err(Error::InvalidInput(format!(
                "row {i} of source probabilities has an entry outside [0, 1]"
            )));
        }
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "row {i} of source probabilities sums to {sum}, not 1"
            )));
        }
    }

    let y_count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut joint = Array2::<f64>::zeros((y_count, z_count));
    for (i, &y) in labels.iter().enumerate() {
        for z in 0..z_count {
            joint[[y, z]] += source_probs[[i, z]] / n as f64;
        }
    }
    let marginal_z: Vec<f64> = (0..z_count).map(|z| joint.column(z).sum()).collect();

    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let mut mixture = 0.0;
        for z in 0..z_count {
            if marginal_z[z] > 0.0 {
                mixture += joint[[y, z]] / marginal_z[z] * source_probs[[i, z]];
            }
        }
        if mixture <= 0.0 {
            return Err(Error::Degenerate(format!(
                "sample {i} has zero probability under the empirical conditional"
            )));
        }
        total += mixture.ln();
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn one_hot_indicators_score_zero() {
        let probs = array![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
        ];
        let labels = [0, 1, 2, 0];
        let score = leep(&probs, &labels).unwrap();
        assert!(score.abs() < 1e-12, "{score}");
    }

    #[test]
    fn uniform_rows_balanced_binary_is_minus_ln2() {
        let probs = Array2::from_elem((8, 4), 0.25);
        let labels = [0, 1, 0, 1, 0, 1, 0, 1];
        let score = leep(&probs, &labels).unwrap();
        assert!((score + std::f64::consts::LN_2).abs() < 1e-12, "{score}");
    }

    #[test]
    fn never_positive_on_random_inputs() {
        let mut rng = crate::rng::rng(5);
        for _ in 0..50 {
            let n = rng.gen_range(2..30);
            let z = rng.gen_range(2..6);
            let mut probs = Array2::from_shape_fn((n, z), |_| rng.gen_range(0.01..1.0));
            for mut row in probs.rows_mut() {
                let sum = row.sum();
                row.mapv_inplace(|v| v / sum);
            }
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let score = leep(&probs, &labels).unwrap();
            assert!(score <= 1e-12, "{score}");
        }
    }

    /// Direct textbook recomputation with plain loops and no shared helpers.
    #[test]
    fn matches_definitional_recomputation() {
        let mut rng = crate::rng::rng(11);
        let n = 30;
        let z_count = 4;
        let mut probs = Array2::from_shape_fn((n, z_count), |_| rng.gen_range(0.01..1.0));
        for mut row in probs.rows_mut() {
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();

        let fast = leep(&probs, &labels).unwrap();

        let y_count = 3;
        let mut joint = vec![vec![0.0; z_count]; y_count];
        for i in 0..n {
            for z in 0..z_count {
                joint[labels[i]][z] += probs[[i, z]];
            }
        }
        for row in &mut joint {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        let mut pz = vec![0.0; z_count];
        for z in 0..z_count {
            for row in &joint {
                pz[z] += row[z];
            }
        }
        let mut slow = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for z in 0..z_count {
                if pz[z] > 0.0 {
                    s += joint[labels[i]][z] / pz[z] * probs[[i, z]];
                }
            }
            slow += s.ln();
        }
        slow /= n as f64;

        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let probs = array![[0.5, 0.2], [0.5, 0.5]];
        assert!(leep(&probs, &[0, 1]).is_err());
        let negative = array![[1.2, -0.2], [0.5, 0.5]];
        assert!(leep(&negative, &[0, 1]).is_err());
    }

    #[test]
    fn dead_source_class_is_excluded() {
        // Third source class never receives mass; scores must still be finite.
        let probs = array![[0.7, 0.3, 0.0], [0.2, 0.8, 0.0], [0.6, 0.4, 0.0]];
        let labels = [0, 1, 0];
        let score = leep(&probs, &labels).unwrap();
        assert!(score.is_finite() && score <= 0.0);
    }
}
