use crate::linalg::{ensure_finite, ensure_square, solve_gaussian, Matrix, Vector};
use crate::spectral::{eig_sym, EigenDecomposition};
use crate::{Error, Result};

const CONDITION_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

/// Minimum-norm interpolant coefficients `K^{-1} y`.
///
/// Requires `gamma_n > 1e-10 gamma_1`; the solution is rejected if
/// `||K alpha - y|| > 1e-8 ||y||`.
pub fn closed_form_solution(k: &Matrix, y: &Vector) -> Result<Vector> {
    let eig = checked_eigen(k)?;
    solve_checked(k, y, &eig)
}

fn checked_eigen(k: &Matrix) -> Result<EigenDecomposition> {
    ensure_square(k)?;
    ensure_finite(k, "Gram matrix")?;
    let eig = eig_sym(k)?;
    let ratio = eig.gamma_n() / eig.gamma1();
    if !(eig.gamma1() > 0.0 && ratio > CONDITION_TOL) {
        return Err(Error::IllConditioned { ratio });
    }
    Ok(eig)
}

fn solve_checked(k: &Matrix, y: &Vector, eig: &EigenDecomposition) -> Result<Vector> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let alpha = solve_gaussian(k, y)?;
    let residual = (k * &alpha - y).norm();
    if residual > RESIDUAL_TOL * y.norm() {
        return Err(Error::IllConditioned {
            ratio: eig.gamma_n() / eig.gamma1(),
        });
    }
    Ok(alpha)
}

/// A kernel least-squares instance with its interpolant and spectrum precomputed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub k: Matrix,
    pub y: Vector,
    pub alpha_hat: Vector,
    pub eig: EigenDecomposition,
}

impl Problem {
    pub fn new(k: Matrix, y: Vector) -> Result<Self> {
        if y.len() != k.nrows() {
            return Err(Error::DimensionMismatch {
                expected: k.nrows(),
                found: y.len(),
            });
        }
        let eig = checked_eigen(&k)?;
        let alpha_hat = solve_checked(&k, &y, &eig)?;
        Ok(Problem { k, y, alpha_hat, eig })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `(1/2n) ||K alpha - y||^2`.
    pub fn train_loss(&self, alpha: &Vector) -> f64 {
        (&self.k * alpha - &self.y).norm_squared() / (2.0 * self.n() as f64)
    }
}

fn check_shapes(alpha: &Vector, k: &Matrix, y: &Vector) -> Result<usize> {
    let n = ensure_square(k)?;
    for len in [alpha.len(), y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok(n)
}

/// `alpha - eta (K_i^T alpha - y_i) K_i` for the 0-based sample index `i`.
pub fn sgd_step(alpha: &Vector, k: &Matrix, y: &Vector, i: usize, eta: f64) -> Result<Vector> {
    let n = check_shapes(alpha, k, y)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let col = k.column(i);
    let r = col.dot(alpha) - y[i];
    Ok(alpha - col * (eta * r))
}

/// `alpha - (eta/n) K^T (K alpha - y)`.
pub fn gd_step(alpha: &Vector, k: &Matrix, y: &Vector, eta: f64) -> Result<Vector> {
    let n = check_shapes(alpha, k, y)?;
    let r = k * alpha - y;
    Ok(alpha - k.tr_mul(&r) * (eta / n as f64))
}
