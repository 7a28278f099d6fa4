use crate::linalg::{descending_order, ensure_finite, ensure_square, max_asymmetry, max_off_diagonal, Matrix, Vector};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub gammas: Vector,
    /// Column `i` is the unit eigenvector for `gammas[i]`.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    pub fn gamma1(&self) -> f64 {
        self.gammas[0]
    }

    pub fn gamma_n(&self) -> f64 {
        self.gammas[self.n() - 1]
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.vectors.column(i).into_owned()
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.gammas.iter().fold(0.0_f64, |m, g| m.max(g.abs()))
    }

    /// `G diag(gammas) G^T`.
    pub fn reconstruct(&self) -> Matrix {
        let scaled = &self.vectors * Matrix::from_diagonal(&self.gammas);
        scaled * self.vectors.transpose()
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps until the largest off-diagonal magnitude is at most `1e-14 ||K||_F`.
/// Eigenvalues come back in descending order (stable for ties) and every
/// eigenvector has its largest-magnitude entry nonnegative.
pub fn eig_sym(k: &Matrix) -> Result<EigenDecomposition> {
    let n = ensure_square(k)?;
    ensure_finite(k, "matrix")?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = k.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let asym = max_asymmetry(k);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetric { max_asymmetry: asym });
    }

    let mut a = (k + k.transpose()) * 0.5;
    let mut v = Matrix::identity(n, n);
    let target = OFF_DIAGONAL_TOL * a.norm();

    let mut converged = max_off_diagonal(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: max_off_diagonal(&a),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = max_off_diagonal(&a) <= target;
    }

    let diag: Vec<f64> = a.diagonal().iter().copied().collect();
    let order = descending_order(&diag);
    let gammas = Vector::from_iterator(n, order.iter().map(|&i| diag[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        let mut lead = 0;
        for i in 1..n {
            // Near-equal magnitudes count as ties so rounding cannot flip the choice.
            if col[i].abs() > col[lead].abs() * (1.0 + 1e-12) {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { gammas, vectors })
}

/// One Jacobi rotation zeroing `a[(p, q)]`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let g = a[(r, p)];
        let h = a[(r, q)];
        let rp = c * g - s * h;
        let rq = s * g + c * h;
        a[(r, p)] = rp;
        a[(p, r)] = rp;
        a[(r, q)] = rq;
        a[(q, r)] = rq;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        let g = v[(r, p)];
        let h = v[(r, q)];
        v[(r, p)] = c * g - s * h;
        v[(r, q)] = s * g + c * h;
    }
}
