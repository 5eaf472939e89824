//! Tukey ladder-of-powers normalization.
//!
//! Searches a fixed grid of exponents for the power transform whose output
//! scores highest on the Shapiro-Wilk W statistic. The transform keeps the
//! sign convention that preserves order: x^l for l > 0, ln x for l = 0,
//! -(x^l) for l < 0.

use crate::stats::shapiro_wilk_w;

use super::CharsError;

/// Outcome of the grid search. When the input has too few distinct values
/// to score, `lambda` is 1, the data is returned untransformed, and
/// `degenerate` is set so callers can warn instead of aborting a pipeline.
#[derive(Debug, Clone)]
pub struct TukeyResult {
    pub lambda: f64,
    pub transformed: Vec<Option<f64>>,
    pub degenerate: bool,
}

/// The order-preserving power transform for a single value.
pub fn tukey_transform(x: f64, lambda: f64) -> f64 {
    if lambda > 0.0 {
        x.powf(lambda)
    } else if lambda == 0.0 {
        x.ln()
    } else {
        -x.powf(lambda)
    }
}

/// Grid search over lambda in {-3.00, -2.95, ..., 3.00}, maximizing the
/// Shapiro-Wilk W of the transformed usable values. Ties break toward the
/// lambda closest to 1. Missing positions are preserved.
pub fn tukey_normalize(values: &[Option<f64>]) -> Result<TukeyResult, CharsError> {
    let usable: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    for &x in &usable {
        if x <= 0.0 {
            return Err(CharsError::NonPositiveValue(x));
        }
    }
    let mut distinct = usable.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Ok(TukeyResult {
            lambda: 1.0,
            transformed: values.to_vec(),
            degenerate: true,
        });
    }

    let mut best_lambda = 1.0f64;
    let mut best_w = f64::NEG_INFINITY;
    for step in -60..=60 {
        let lambda = step as f64 * 0.05;
        let transformed: Vec<f64> = usable.iter().map(|&x| tukey_transform(x, lambda)).collect();
        let w = match shapiro_wilk_w(&transformed) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let better = w > best_w
            || (w == best_w && (lambda - 1.0).abs() < (best_lambda - 1.0).abs());
        if better {
            best_w = w;
            best_lambda = lambda;
        }
    }

    let transformed = values
        .iter()
        .map(|v| v.map(|x| tukey_transform(x, best_lambda)))
        .collect();
    Ok(TukeyResult {
        lambda: best_lambda,
        transformed,
        degenerate: false,
    })
}
