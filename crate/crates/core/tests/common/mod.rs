#![allow(dead_code)]

use dirbias_core::linalg::{Matrix, Vector};
use dirbias_core::rng::Pcg64;

pub fn random_symmetric(rng: &mut Pcg64, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.standard_normal();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Symmetric matrix with diagonal in `[0.5, 1.5]` and off-diagonals at most `ratio * min diag`.
pub fn random_dominant(rng: &mut Pcg64, n: usize, ratio: f64) -> Matrix {
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = rng.uniform(0.5, 1.5);
    }
    let min_diag = k.diagonal().min();
    let bound = ratio * min_diag;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.uniform(-bound, bound);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Dominant matrix with the given diagonal.
pub fn dominant_with_diag(rng: &mut Pcg64, diag: &[f64], offdiag: f64) -> Matrix {
    let n = diag.len();
    let mut k = Matrix::from_diagonal(&Vector::from_vec(diag.to_vec()));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.uniform(-offdiag, offdiag);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub fn random_vector(rng: &mut Pcg64, n: usize) -> Vector {
    Vector::from_vec(rng.normal_vec(n))
}
