//! Log marginal evidence (LogME) of features against labels.

use ndarray::{Array1, Array2};

use super::linalg;
use crate::error::{Error, Result};

const MAX_ITERS: usize = 100;
const EVIDENCE_TOL: f64 = 1e-3;

/// Mean over classes of the maximized per-sample Bayesian evidence of a
/// linear regression from `features` onto the one-vs-rest indicator of each
/// class.
///
/// For one class with targets y ∈ {0,1}ⁿ the model is y = F·w + ε with prior
/// w ~ N(0, α⁻¹I) and noise precision β. The log evidence
///
/// ```text
/// L(α, β) = ½·( n·ln β + h·ln α − n·ln 2π − β·‖F·m − y‖² − α·‖m‖²
///               − ln det(α·I + β·FᵀF) )
/// ```
///
/// (m the posterior mean) is maximized by the classic fixed point
/// α ← γ/‖m‖², β ← (n−γ)/‖F·m − y‖², γ = Σⱼ β·λⱼ/(α + β·λⱼ), starting from
/// α = β = 1 and stopping when the evidence moves less than 1e-3 or after 100
/// rounds. Everything is evaluated through the eigenvalues λⱼ of FᵀF, so each
/// iteration is O(h).
pub fn logme(features: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "logme labels".into(),
            expected: n,
            actual: labels.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidInput("logme needs at least 2 rows".into()));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    if classes < 2 {
        return Err(Error::InvalidInput("logme needs at least 2 classes".into()));
    }

    let gram = features.t().dot(features);
    let (eigenvalues, eigenvectors) = linalg::eigh(&gram)?;
    // Clamp tiny negative round-off so α + β·λ stays positive.
    let eigenvalues = eigenvalues.mapv(|v| v.max(0.0));

    let mut total = 0.0;
    for class in 0..classes {
        let y = Array1::from_iter(labels.iter().map(|&l| f64::from(u8::from(l == class))));
        let fty = features.t().dot(&y);
        let c = eigenvectors.t().dot(&fty);
        let y_norm2 = y.dot(&y);
        total += evidence_fixed_point(n as f64, &eigenvalues, &c, y_norm2) / n as f64;
    }
    Ok(total / classes as f64)
}

/// Runs the α/β fixed point and returns the best evidence seen.
fn evidence_fixed_point(n: f64, lambda: &Array1<f64>, c: &Array1<f64>, y_norm2: f64) -> f64 {
    let h = lambda.len() as f64;
    let evidence = |alpha: f64, beta: f64| -> f64 {
        let mut logdet = 0.0;
        let mut m_norm2 = 0.0;
        let mut residual = y_norm2;
        for (&l, &cj) in lambda.iter().zip(c) {
            let denom = alpha + beta * l;
            logdet += denom.ln();
            let mj = beta * cj / denom;
            m_norm2 += mj * mj;
            residual += -2.0 * beta * cj * cj / denom + l * mj * mj;
        }
        0.5 * (n * beta.ln() + h * alpha.ln()
            - n * (2.0 * std::f64::consts::PI).ln()
            - beta * residual.max(0.0)
            - alpha * m_norm2
            - logdet)
    };

    let mut alpha: f64 = 1.0;
    let mut beta: f64 = 1.0;
    let mut best = evidence(alpha, beta);
    let mut previous = best;
    for _ in 0..MAX_ITERS {
        let mut gamma = 0.0;
        let mut m_norm2 = 0.0;
        let mut residual = y_norm2;
        for (&l, &cj) in lambda.iter().zip(c) {
            let denom = alpha + beta * l;
            let mj = beta * cj / denom;
            gamma += beta * l / denom;
            m_norm2 += mj * mj;
            residual += -2.0 * beta * cj * cj / denom + l * mj * mj;
        }
        let residual = residual.max(0.0);
        let next_alpha = (gamma / m_norm2).clamp(1e-12, 1e12);
        let next_beta = ((n - gamma) / residual).clamp(1e-12, 1e12);
        if !next_alpha.is_finite() || !next_beta.is_finite() {
            break;
        }
        alpha = next_alpha;
        beta = next_beta;
        let current = evidence(alpha, beta);
        if !current.is_finite() {
            break;
        }
        best = best.max(current);
        if (current - previous).abs() < EVIDENCE_TOL {
            break;
        }
        previous = current;
    }
    best
}
