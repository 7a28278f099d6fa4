use serde::{Deserialize, Serialize};

use super::eig_sym;
use crate::linalg::{descending_order, ensure_square, Matrix};
use crate::{Error, Result};

/// Interval `[center - radius, center + radius]` for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GershgorinDisc {
    pub center: f64,
    pub radius: f64,
}

impl GershgorinDisc {
    /// Distance from `x` to the disc (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        ((x - self.center).abs() - self.radius).max(0.0)
    }
}

pub fn gershgorin_discs(a: &Matrix) -> Result<Vec<GershgorinDisc>> {
    let n = ensure_square(a)?;
    Ok((0..n)
        .map(|i| GershgorinDisc {
            center: a[(i, i)],
            radius: (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum(),
        })
        .collect())
}

/// Largest distance from an eigenvalue of `a` to the union of its discs.
pub fn gershgorin_excess(a: &Matrix) -> Result<f64> {
    let discs = gershgorin_discs(a)?;
    let eig = eig_sym(a)?;
    Ok(eig
        .gammas
        .iter()
        .map(|&g| discs.iter().map(|d| d.distance(g)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// Whether every eigenvalue lies in the union of discs, allowing `1e-9 ||A||_2` for solver error.
pub fn eigenvalues_within_discs(a: &Matrix) -> Result<bool> {
    let norm = eig_sym(a)?.spectral_norm();
    Ok(gershgorin_excess(a)? <= 1e-9 * norm)
}

/// Per-index intervals `[lambda_i - n tau, lambda_i + n tau]` for a descending diagonal.
pub fn eigen_interval_from_dominance(diag: &[f64], tau: f64, n: usize) -> Result<Vec<[f64; 2]>> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    if let Some(index) = diag.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::UnsortedDiagonal { index: index + 1 });
    }
    let r = n as f64 * tau;
    Ok(diag.iter().map(|&l| [l - r, l + r]).collect())
}

/// Outcome of comparing the spectrum of `K` against the dominance intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub gamma1: f64,
    pub upper: f64,
    pub gamma_n: f64,
    pub lower: f64,
    /// `(j, gamma_{j-1} - gamma_j)` for every `j` whose intervals are separated from `j - 1`'s.
    pub separations: Vec<(usize, f64)>,
    pub passed: bool,
}

/// Checks `gamma_1 <= lambda_1 + n tau`, `gamma_n >= lambda_n - n tau`, and
/// `gamma_{j-1} > gamma_j` wherever `lambda_j + n tau < lambda_{j-1} - n tau`.
/// Indices in `separations` are 0-based positions in the sorted order.
pub fn check_eigen_intervals(k: &Matrix) -> Result<IntervalCheck> {
    let n = ensure_square(k)?;
    let eig = eig_sym(k)?;
    let diag: Vec<f64> = k.diagonal().iter().copied().collect();
    let sorted: Vec<f64> = descending_order(&diag).into_iter().map(|i| diag[i]).collect();
    let tau = crate::linalg::max_off_diagonal(k);
    let intervals = eigen_interval_from_dominance(&sorted, tau, n)?;
    let slack = 1e-9 * eig.spectral_norm();
    let separations: Vec<(usize, f64)> = (1..n)
        .filter(|&j| intervals[j][1] < intervals[j - 1][0])
        .map(|j| (j, eig.gammas[j - 1] - eig.gammas[j]))
        .collect();
    let upper = intervals[0][1];
    let lower = intervals[n - 1][0];
    let passed = eig.gamma1() <= upper + slack
        && eig.gamma_n() >= lower - slack
        && separations.iter().all(|&(_, gap)| gap > 0.0);
    Ok(IntervalCheck {
        gamma1: eig.gamma1(),
        upper,
        gamma_n: eig.gamma_n(),
        lower,
        separations,
        passed,
    })
}
