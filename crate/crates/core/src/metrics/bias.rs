use serde::{Deserialize, Serialize};

use crate::kernels::KernelSpec;
use crate::linalg::{ensure_square, Matrix, Vector};
use crate::spectral::{eig_sym, EigenDecomposition};
use crate::{Error, Result};

/// Which direction a Rayleigh quotient is taken along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// The error vector `b` itself.
    #[default]
    Error,
    /// The loss gradient direction `K^2 b`.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasMeasurement {
    /// `||K b||^2 / ||b||^2`.
    pub rq: f64,
    /// `||K b|| / ||b||`.
    pub rq_ratio: f64,
    /// `rq / gamma_1^2`.
    pub rrq: f64,
    pub gamma1: f64,
    pub gamma_n: f64,
}

pub fn bias_measurement(eig: &EigenDecomposition, k: &Matrix, b: &Vector) -> Result<BiasMeasurement> {
    bias_measurement_with(eig, k, b, BiasMode::Error)
}

pub fn bias_measurement_with(eig: &EigenDecomposition, k: &Matrix, b: &Vector, mode: BiasMode) -> Result<BiasMeasurement> {
    let n = ensure_square(k)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let dir = match mode {
        BiasMode::Error => b.clone(),
        BiasMode::Gradient => k * (k * b),
    };
    let d_sq = dir.norm_squared();
    if d_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let rq = (k * &dir).norm_squared() / d_sq;
    let gamma1 = eig.gamma1();
    Ok(BiasMeasurement {
        rq,
        rq_ratio: rq.sqrt(),
        rrq: rq / (gamma1 * gamma1),
        gamma1,
        gamma_n: eig.gamma_n(),
    })
}

/// `b^T K b`.
pub fn estimation_error(k: &Matrix, b: &Vector) -> Result<f64> {
    let n = ensure_square(k)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    Ok(b.dot(&(k * b)))
}

/// Smallest `b^T K b` over `{b : (1/2n) ||K b||^2 = a}`: `2 n a / gamma_1`.
pub fn delta_star(a: f64, n: usize, gamma1: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
    }
    if !(gamma1 > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma1 must be positive, got {gamma1}")));
    }
    Ok(2.0 * n as f64 * a / gamma1)
}

/// Training loss, estimation error and their level-set comparison at one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationRecord {
    /// `(1/2n) ||K b||^2`.
    pub train_loss: f64,
    pub est_error: f64,
    pub delta_star: f64,
    /// `(gamma_1 / gamma_n)(1 - eps')`.
    pub m_bound: f64,
    pub pred_mse: Option<f64>,
}

impl GeneralizationRecord {
    pub fn new(k: &Matrix, eig: &EigenDecomposition, b: &Vector, epsilon_prime: f64, pred_mse: Option<f64>) -> Result<Self> {
        let n = ensure_square(k)?;
        let kb = k * b;
        let train_loss = kb.norm_squared() / (2.0 * n as f64);
        Ok(GeneralizationRecord {
            train_loss,
            est_error: b.dot(&kb),
            delta_star: delta_star(train_loss, n, eig.gamma1())?,
            m_bound: eig.gamma1() / eig.gamma_n() * (1.0 - epsilon_prime),
            pred_mse,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetBound {
    /// `a / rho_1`.
    pub bound: f64,
    /// Largest eigenvalue of `A^T A`.
    pub rho1: f64,
    /// Unit top eigenvector of `A^T A`.
    pub direction: Vec<f64>,
}

impl LevelSetBound {
    /// The level-set point `sqrt(a / rho_1) * direction` attaining the bound.
    pub fn argmin(&self) -> Vector {
        let s = (self.bound).sqrt();
        Vector::from_iterator(self.direction.len(), self.direction.iter().map(|v| v * s))
    }
}

/// Lower bound `a / ||A^T A||_2` on `||v||^2` over `{v : ||A v||^2 = a}`.
pub fn quad_levelset_bound(a_mat: &Matrix, a: f64) -> Result<LevelSetBound> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
    }
    if a_mat.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter("A must be nonzero".into()));
    }
    let eig = eig_sym(&a_mat.tr_mul(a_mat))?;
    let rho1 = eig.gamma1();
    Ok(LevelSetBound {
        bound: a / rho1,
        rho1,
        direction: eig.vector(0).iter().copied().collect(),
    })
}

/// Mean squared error of `f(x) = sum_j alpha_j K(x, x_j)` on the test rows.
pub fn prediction_error(spec: &KernelSpec, x_train: &Matrix, alpha: &Vector, x_test: &Matrix, y_test: &Vector) -> Result<f64> {
    if x_test.nrows() == 0 {
        return Err(Error::InvalidParameter("empty test set".into()));
    }
    if y_test.len() != x_test.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x_test.nrows(),
            found: y_test.len(),
        });
    }
    if alpha.len() != x_train.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x_train.nrows(),
            found: alpha.len(),
        });
    }
    let cross = spec.cross_gram(x_test, x_train)?;
    Ok(prediction_error_from_cross(&cross, alpha, y_test))
}

/// As [`prediction_error`], with the test-by-train kernel block precomputed.
pub fn prediction_error_from_cross(cross: &Matrix, alpha: &Vector, y_test: &Vector) -> f64 {
    (cross * alpha - y_test).norm_squared() / y_test.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(v.to_vec()))
    }

    #[test]
    fn eigenvector_quotients() {
        let k = diag(&[3.0, 2.0, 0.5]);
        let eig = eig_sym(&k).unwrap();
        let top = bias_measurement(&eig, &k, &eig.vector(0)).unwrap();
        assert_eq!((top.rq, top.rrq), (9.0, 1.0));
        let bottom = bias_measurement(&eig, &k, &eig.vector(2)).unwrap();
        assert_eq!(bottom.rq, 0.25);
        assert!(matches!(bias_measurement(&eig, &k, &Vector::zeros(3)), Err(Error::ZeroVector)));
    }

    #[test]
    fn gradient_mode_sharpens_alignment() {
        let k = diag(&[2.0, 1.0]);
        let eig = eig_sym(&k).unwrap();
        let b = Vector::from_vec(vec![1.0, 1.0]);
        let e = bias_measurement(&eig, &k, &b).unwrap();
        let g = bias_measurement_with(&eig, &k, &b, BiasMode::Gradient).unwrap();
        // K^2 b = (4, 1): rq = (64 + 1) / 17.
        assert!((g.rq - 65.0 / 17.0).abs() < 1e-14);
        assert!(g.rq > e.rq);
    }

    #[test]
    fn estimation_error_examples() {
        let b = Vector::from_vec(vec![1.0, -2.0]);
        assert_eq!(estimation_error(&Matrix::identity(2, 2), &b).unwrap(), 5.0);
        let k = diag(&[4.0, 1.0]);
        let eig = eig_sym(&k).unwrap();
        assert_eq!(estimation_error(&k, &eig.vector(0)).unwrap(), 4.0);
    }

    #[test]
    fn delta_star_examples() {
        assert_eq!(delta_star(1.0, 10, 5.0).unwrap(), 4.0);
        assert_eq!(delta_star(0.0, 10, 5.0).unwrap(), 0.0);
        assert!(delta_star(-1.0, 10, 5.0).is_err());
        // K = diag(2,1), a = 0.25, n = 2: b = e1 / 2 sits on the level set.
        let k = diag(&[2.0, 1.0]);
        let b = Vector::from_vec(vec![0.5, 0.0]);
        assert_eq!((&k * &b).norm_squared() / 4.0, 0.25);
        assert_eq!(estimation_error(&k, &b).unwrap(), 0.5);
        assert_eq!(delta_star(0.25, 2, 2.0).unwrap(), 0.5);
    }

    #[test]
    fn levelset_examples() {
        let r = quad_levelset_bound(&diag(&[2.0, 1.0]), 4.0).unwrap();
        assert_eq!(r.bound, 1.0);
        assert_eq!(r.direction, vec![1.0, 0.0]);
        let r = quad_levelset_bound(&Matrix::identity(3, 3), 3.0).unwrap();
        assert_eq!(r.bound, 3.0);
        assert_eq!(r.direction, vec![1.0, 0.0, 0.0]);
        assert!(quad_levelset_bound(&Matrix::zeros(2, 2), 1.0).is_err());
    }

    #[test]
    fn prediction_error_examples() {
        let spec = KernelSpec::Bilinear;
        let x = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let y = Vector::from_vec(vec![1.0, -1.0]);
        let alpha_hat = Vector::from_vec(vec![1.0, -0.25]);
        assert_eq!(prediction_error(&spec, &x, &alpha_hat, &x, &y).unwrap(), 0.0);
        assert_eq!(prediction_error(&spec, &x, &Vector::zeros(2), &x, &y).unwrap(), 1.0);
        assert!(prediction_error(&spec, &x, &alpha_hat, &Matrix::zeros(0, 2), &Vector::zeros(0)).is_err());
    }
}
