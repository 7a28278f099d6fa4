use serde::{Deserialize, Serialize};

use crate::linalg::{descending_order, ensure_finite, ensure_square, max_off_diagonal, Matrix};
use crate::{Error, Result};

/// Diagonal-dominance summary of a Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `max_{i != j} |K_ij|`.
    pub tau: f64,
    pub lambda_min_diag: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub is_dominant: bool,
    /// Diagonal entries sorted descending.
    pub diag_sorted: Vec<f64>,
    /// Permutation with `diag_sorted[k] = K[order[k], order[k]]`. The data itself is never reordered.
    pub order: Vec<usize>,
    /// Whether the diagonal is already non-increasing in input order.
    pub diag_in_order: bool,
}

pub fn dominance_report(k: &Matrix, threshold: f64) -> Result<DominanceReport> {
    let n = ensure_square(k)?;
    ensure_finite(k, "Gram matrix")?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let diag: Vec<f64> = k.diagonal().iter().copied().collect();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveDiagonal { index, value });
    }
    let tau = max_off_diagonal(k);
    let order = descending_order(&diag);
    let diag_sorted: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let lambda_min_diag = diag_sorted[n - 1];
    let ratio = tau / lambda_min_diag;
    Ok(DominanceReport {
        tau,
        lambda_min_diag,
        ratio,
        threshold,
        is_dominant: ratio <= threshold,
        diag_in_order: diag.windows(2).all(|w| w[0] >= w[1]),
        diag_sorted,
        order,
    })
}
