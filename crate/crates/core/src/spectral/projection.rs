use super::eig_sym;
use crate::linalg::{descending_order, ensure_finite, ensure_square, Matrix, Vector};
use crate::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// Orthogonal projections onto `span{K_j : j != lead}` (`pm1`) and its complement (`p1`).
///
/// `lead` is the column with the largest diagonal entry (first index on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    pub p1: Matrix,
    pub pm1: Matrix,
    pub lead: usize,
}

impl ProjectionPair {
    /// `(||P_1 b||, ||P_{-1} b||)`.
    pub fn split_norms(&self, b: &Vector) -> (f64, f64) {
        ((&self.p1 * b).norm(), (&self.pm1 * b).norm())
    }
}

/// Index of the first largest diagonal entry.
pub fn lead_index(k: &Matrix) -> usize {
    let diag: Vec<f64> = k.diagonal().iter().copied().collect();
    descending_order(&diag)[0]
}

pub fn projection_pair(k: &Matrix) -> Result<ProjectionPair> {
    let n = ensure_square(k)?;
    ensure_finite(k, "matrix")?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let lead = lead_index(k);
    let others: Vec<usize> = (0..n).filter(|&j| j != lead).collect();
    let rest = k.select_columns(&others);

    let k_norm = eig_sym(&(k.transpose() * k))?.gamma1().max(0.0).sqrt();
    if !others.is_empty() {
        let gram = rest.transpose() * &rest;
        let sigma_min = eig_sym(&gram)?.gamma_n().max(0.0).sqrt();
        if !(sigma_min > RANK_TOL * k_norm) {
            return Err(Error::RankDeficient { sigma_min });
        }
    }

    // Modified Gram-Schmidt, two passes per column.
    let mut q: Vec<Vector> = Vec::with_capacity(others.len());
    for j in 0..rest.ncols() {
        let original = rest.column(j).into_owned();
        let mut v = original.clone();
        for _ in 0..2 {
            for u in &q {
                let proj = u.dot(&v);
                v.axpy(-proj, u, 1.0);
            }
        }
        let norm = v.norm();
        if !(norm > RANK_TOL * original.norm()) {
            return Err(Error::RankDeficient { sigma_min: norm });
        }
        q.push(v / norm);
    }

    let mut pm1 = Matrix::zeros(n, n);
    for u in &q {
        pm1.ger(1.0, u, u, 1.0);
    }
    let pm1 = (&pm1 + pm1.transpose()) * 0.5;
    let p1 = Matrix::identity(n, n) - &pm1;
    Ok(ProjectionPair { p1, pm1, lead })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_projects_on_axes() {
        let k = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 2.0, 1.0]));
        let pp = projection_pair(&k).unwrap();
        assert_eq!(pp.lead, 0);
        assert!((&pp.pm1 - Matrix::from_diagonal(&Vector::from_vec(vec![0.0, 1.0, 1.0]))).norm() < 1e-15);
        assert!((&pp.p1 - Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0, 0.0]))).norm() < 1e-15);
    }

    #[test]
    fn lead_follows_largest_diagonal() {
        let k = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0, 2.0]));
        let pp = projection_pair(&k).unwrap();
        assert_eq!(pp.lead, 1);
        assert!((pp.p1[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complementary_idempotent_and_absorbing() {
        let k = Matrix::from_row_slice(3, 3, &[1.0, 0.02, -0.01, 0.02, 0.8, 0.03, -0.01, 0.03, 0.6]);
        let pp = projection_pair(&k).unwrap();
        let eye = Matrix::identity(3, 3);
        assert!((&pp.p1 + &pp.pm1 - &eye).norm() < 1e-10);
        assert!((&pp.p1 * &pp.pm1).norm() < 1e-10);
        assert!((&pp.p1 * &pp.p1 - &pp.p1).norm() < 1e-10);
        for i in 1..3 {
            assert!((&pp.p1 * k.column(i)).norm() < 1e-10);
        }
        assert!((pp.p1.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_deficiency_detected() {
        let k = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(projection_pair(&k), Err(Error::RankDeficient { .. })));
    }
}
