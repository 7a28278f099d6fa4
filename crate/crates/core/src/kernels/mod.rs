//! Kernel functions, Gram matrices, synthetic data and diagonal-dominance analysis.

mod data;
mod dominance;

pub use data::{sample_sphere_data, simulate_sine_regression, sine_target, tau_bound_check, tau_threshold, DataSet, DataSetMeta};
pub use dominance::{dominance_report, DominanceReport};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Kernel family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `<x, x'>`
    Bilinear,
    /// `(<x, x'> + c)^m`
    Polynomial { c: f64, m: u32 },
    /// `exp(-gamma |x - x'|^2)`
    Rbf { gamma: f64 },
    /// `exp(-|x - x'|^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `exp(-|x - x'| / sigma)`
    Laplace { sigma: f64 },
    /// `tanh(alpha <x, x'> + c)`
    Sigmoid { alpha: f64, c: f64 },
    /// `int_0^1 (s - u)_+ (t - u)_+ du` on scalars in `[0, 1]`.
    CubicSpline,
}

impl KernelSpec {
    /// The polynomial kernel used by the synthetic sine-regression study.
    pub const fn default_polynomial() -> Self {
        KernelSpec::Polynomial { c: 0.01, m: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            KernelSpec::Bilinear | KernelSpec::CubicSpline => Ok(()),
            KernelSpec::Polynomial { c, m } => {
                if m == 0 {
                    return Err(Error::InvalidParameter("polynomial degree must be >= 1".into()));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidParameter("polynomial offset must be finite".into()));
                }
                Ok(())
            }
            KernelSpec::Rbf { gamma } => positive("gamma", gamma),
            KernelSpec::Gaussian { sigma } | KernelSpec::Laplace { sigma } => positive("sigma", sigma),
            KernelSpec::Sigmoid { alpha, c } => {
                positive("alpha", alpha)?;
                if c.is_finite() && c >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("sigmoid offset must be >= 0, got {c}")))
                }
            }
        }
    }

    /// Evaluate the kernel on a pair of points.
    ///
    /// Every family is computed through a symmetric primitive (inner product,
    /// squared distance or min/max), so `eval(a, b) == eval(b, a)` bit for bit.
    pub fn eval(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        if x1.len() != x2.len() {
            return Err(Error::DimensionMismatch {
                expected: x1.len(),
                found: x2.len(),
            });
        }
        if !x1.iter().chain(x2).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("kernel input"));
        }
        let value = match *self {
            KernelSpec::Bilinear => dot(x1, x2),
            KernelSpec::Polynomial { c, m } => (dot(x1, x2) + c).powi(m as i32),
            KernelSpec::Rbf { gamma } => (-gamma * sq_dist(x1, x2)).exp(),
            KernelSpec::Gaussian { sigma } => (-sq_dist(x1, x2) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Laplace { sigma } => (-sq_dist(x1, x2).sqrt() / sigma).exp(),
            KernelSpec::Sigmoid { alpha, c } => (alpha * dot(x1, x2) + c).tanh(),
            KernelSpec::CubicSpline => {
                if x1.len() != 1 {
                    return Err(Error::OutOfDomain(format!(
                        "cubic spline kernel takes scalar inputs, got dimension {}",
                        x1.len()
                    )));
                }
                let (s, t) = (x1[0], x2[0]);
                if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
                    return Err(Error::OutOfDomain(format!(
                        "cubic spline inputs must lie in [0, 1], got ({s}, {t})"
                    )));
                }
                cubic_spline(s, t)
            }
        };
        Ok(value)
    }

    /// Upper bound on `|K(x_i, x_j)|` for unit-norm inputs with `|<x_i, x_j>| <= tau_tilde`.
    ///
    /// * Bilinear: `tau_tilde`.
    /// * Polynomial `g(u) = (u + c)^m`: second-order Taylor bound
    ///   `|g(0)| + g'(0) tau_tilde + (L/2) tau_tilde^2` with `L = m(m-1)(1+|c|)^(m-2)`,
    ///   the maximum of `|g''|` on `[-1, 1]`.
    /// * Sigmoid: `tanh(alpha tau_tilde + c)`.
    /// * RBF and Gaussian: `exp(-2 gamma (1 - tau_tilde))`, i.e. `tau_tilde^(2 c0 (1 - tau_tilde))`
    ///   with `gamma = -c0 ln tau_tilde`.
    /// * Laplace: `exp(-sqrt(2 (1 - tau_tilde)) / sigma)`.
    pub fn predicted_offdiag_bound(&self, tau_tilde: f64) -> Result<f64> {
        if !(tau_tilde > 0.0 && tau_tilde < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_tilde must lie in (0, 1), got {tau_tilde}"
            )));
        }
        self.validate()?;
        let bound = match *self {
            KernelSpec::Bilinear => tau_tilde,
            KernelSpec::Polynomial { c, m } => {
                let m_f = m as f64;
                let g0 = c.abs().powi(m as i32);
                let dg0 = m_f * c.abs().powi(m as i32 - 1);
                let smoothness = if m >= 2 {
                    m_f * (m_f - 1.0) * (1.0 + c.abs()).powi(m as i32 - 2)
                } else {
                    0.0
                };
                g0 + dg0 * tau_tilde + 0.5 * smoothness * tau_tilde * tau_tilde
            }
            KernelSpec::Sigmoid { alpha, c } => (alpha * tau_tilde + c).tanh(),
            KernelSpec::Rbf { gamma } => rbf_offdiag_bound(gamma, tau_tilde),
            KernelSpec::Gaussian { sigma } => rbf_offdiag_bound(1.0 / (2.0 * sigma * sigma), tau_tilde),
            KernelSpec::Laplace { sigma } => (-(2.0 * (1.0 - tau_tilde)).sqrt() / sigma).exp(),
            KernelSpec::CubicSpline => {
                return Err(Error::InvalidParameter(
                    "no off-diagonal bound for the cubic spline kernel".into(),
                ))
            }
        };
        Ok(bound)
    }

    /// Gram matrix `K(X, X)` over the rows of `x`.
    ///
    /// Only the upper triangle is evaluated; the lower triangle is a mirror.
    pub fn gram_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let n = x.nrows();
        if n < 2 {
            return Err(Error::InvalidParameter(format!("Gram matrix needs n >= 2 rows, got {n}")));
        }
        self.validate()?;
        let rows = row_vectors(x);
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(&rows[i], &rows[j])?;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross-kernel block `K(A, B)` with one row per row of `a`.
    pub fn cross_gram(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        self.validate()?;
        let ra = row_vectors(a);
        let rb = row_vectors(b);
        let mut k = Matrix::zeros(ra.len(), rb.len());
        for (i, xa) in ra.iter().enumerate() {
            for (j, xb) in rb.iter().enumerate() {
                k[(i, j)] = self.eval(xa, xb)?;
            }
        }
        Ok(k)
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn eval_kernel(spec: &KernelSpec, x1: &[f64], x2: &[f64]) -> Result<f64> {
    spec.eval(x1, x2)
}

/// Free-function form of [`KernelSpec::gram_matrix`].
pub fn gram_matrix(spec: &KernelSpec, x: &Matrix) -> Result<Matrix> {
    spec.gram_matrix(x)
}

/// Free-function form of [`KernelSpec::predicted_offdiag_bound`].
pub fn predicted_offdiag_bound(spec: &KernelSpec, tau_tilde: f64) -> Result<f64> {
    spec.predicted_offdiag_bound(tau_tilde)
}

fn rbf_offdiag_bound(gamma: f64, tau_tilde: f64) -> f64 {
    // |x_i - x_j|^2 = 2 - 2<x_i, x_j> >= 2 (1 - tau_tilde) on the unit sphere.
    (-2.0 * gamma * (1.0 - tau_tilde)).exp()
}

/// Closed form of `int_0^1 (s-u)_+ (t-u)_+ du`: with `a = min, b = max`,
/// `a^2 b / 2 - a^3 / 6`.
fn cubic_spline(s: f64, t: f64) -> f64 {
    let (a, b) = if s <= t { (s, t) } else { (t, s) };
    a * a * b / 2.0 - a * a * a / 6.0
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn row_vectors(x: &Matrix) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| x.row(i).iter().copied().collect())
        .collect()
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Bilinear => write!(f, "bilinear"),
            KernelSpec::Polynomial { c, m } => write!(f, "polynomial:{c}:{m}"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf:{gamma}"),
            KernelSpec::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            KernelSpec::Laplace { sigma } => write!(f, "laplace:{sigma}"),
            KernelSpec::Sigmoid { alpha, c } => write!(f, "sigmoid:{alpha}:{c}"),
            KernelSpec::CubicSpline => write!(f, "cubic-spline"),
        }
    }
}

/// Parses the compact `family[:param...]` form produced by `Display`,
/// e.g. `polynomial:0.01:2` or `gaussian:0.5`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params: Vec<&str> = parts.collect();
        let num = |idx: usize| -> Result<f64> {
            params
                .get(idx)
                .ok_or_else(|| Error::InvalidParameter(format!("kernel '{s}' is missing parameter {}", idx + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("kernel '{s}': {e}")))
        };
        let expect = |count: usize| -> Result<()> {
            if params.len() == count {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "kernel '{family}' takes {count} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let spec = match family.as_str() {
            "bilinear" | "linear" => {
                expect(0)?;
                KernelSpec::Bilinear
            }
            "polynomial" | "poly" => {
                expect(2)?;
                let m = params[1]
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidParameter(format!("polynomial degree: {e}")))?;
                KernelSpec::Polynomial { c: num(0)?, m }
            }
            "rbf" => {
                expect(1)?;
                KernelSpec::Rbf { gamma: num(0)? }
            }
            "gaussian" => {
                expect(1)?;
                KernelSpec::Gaussian { sigma: num(0)? }
            }
            "laplace" => {
                expect(1)?;
                KernelSpec::Laplace { sigma: num(0)? }
            }
            "sigmoid" | "tanh" => {
                expect(2)?;
                KernelSpec::Sigmoid {
                    alpha: num(0)?,
                    c: num(1)?,
                }
            }
            "cubic-spline" | "cubic_spline" | "spline" => {
                expect(0)?;
                KernelSpec::CubicSpline
            }
            _ => {
                return Err(Error::Unknown {
                    kind: "kernel family",
                    name: family,
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn polynomial_unit_inner_product() {
        let k = KernelSpec::default_polynomial();
        let x = [0.6, 0.8];
        assert!((k.eval(&x, &x).unwrap() - 1.0201).abs() < 1e-15);
    }

    #[test]
    fn bilinear_orthogonal_is_zero() {
        assert_eq!(KernelSpec::Bilinear.eval(&[1.0, 0.0, 2.0], &[0.0, 3.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_and_laplace_self_similarity() {
        let x = [0.3, -1.2, 4.0];
        assert_eq!(KernelSpec::Gaussian { sigma: 0.7 }.eval(&x, &x).unwrap(), 1.0);
        assert_eq!(KernelSpec::Laplace { sigma: 0.7 }.eval(&x, &x).unwrap(), 1.0);
        assert_eq!(KernelSpec::Rbf { gamma: 3.0 }.eval(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn cubic_spline_matches_quadrature() {
        let spline = KernelSpec::CubicSpline;
        let v = spline.eval(&[1.0], &[1.0]).unwrap();
        let oracle = simpson(|u| (1.0 - u) * (1.0 - u), 0.0, 1.0, 1000);
        assert!((oracle - 1.0 / 3.0).abs() < 1e-12);
        assert!((v - oracle).abs() < 1e-12);

        for &(s, t) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1), (0.0, 0.4), (1.0, 0.35)] {
            let integrand = |u: f64| (s - u).max(0.0) * (t - u).max(0.0);
            // Split at the kink so Simpson's rule stays exact for the cubic pieces.
            let kink = f64::min(s, t);
            let oracle = simpson(integrand, 0.0, kink, 200) + simpson(integrand, kink, 1.0, 200);
            let got = spline.eval(&[s], &[t]).unwrap();
            assert!((got - oracle).abs() < 1e-12, "({s},{t}): {got} vs {oracle}");
        }
    }

    #[test]
    fn cubic_spline_domain_errors() {
        assert!(matches!(KernelSpec::CubicSpline.eval(&[1.2], &[0.5]), Err(Error::OutOfDomain(_))));
        assert!(matches!(KernelSpec::CubicSpline.eval(&[-0.1], &[0.5]), Err(Error::OutOfDomain(_))));
        assert!(matches!(
            KernelSpec::CubicSpline.eval(&[0.1, 0.2], &[0.5, 0.3]),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(
            KernelSpec::Bilinear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(KernelSpec::Bilinear.eval(&[f64::NAN], &[1.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelSpec::Polynomial { c: 0.0, m: 0 }.validate().is_err());
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Gaussian { sigma: -1.0 }.validate().is_err());
        assert!(KernelSpec::Sigmoid { alpha: 1.0, c: -0.5 }.validate().is_err());
        assert!(KernelSpec::Sigmoid { alpha: 1.0, c: 0.0 }.validate().is_ok());
    }

    #[test]
    fn gram_of_identity_rows() {
        let x = Matrix::identity(2, 2);
        assert_eq!(KernelSpec::Bilinear.gram_matrix(&x).unwrap(), Matrix::identity(2, 2));
        assert!(KernelSpec::Bilinear.gram_matrix(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn gram_entries_match_pairwise_eval() {
        let x = Matrix::from_row_slice(3, 2, &[0.1, 0.9, -0.4, 0.3, 0.7, 0.7]);
        let spec = KernelSpec::default_polynomial();
        let k = spec.gram_matrix(&x).unwrap();
        let rows = row_vectors(&x);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[(i, j)], spec.eval(&rows[i], &rows[j]).unwrap());
            }
        }
        let g = KernelSpec::Gaussian { sigma: 1.0 }.gram_matrix(&x).unwrap();
        assert!((0..3).all(|i| g[(i, i)] == 1.0));
    }

    #[test]
    fn offdiag_bound_examples() {
        assert_eq!(KernelSpec::Bilinear.predicted_offdiag_bound(0.05).unwrap(), 0.05);
        let sig = KernelSpec::Sigmoid { alpha: 3.0, c: 0.1 };
        assert_eq!(sig.predicted_offdiag_bound(0.2).unwrap(), (3.0f64 * 0.2 + 0.1).tanh());
        // gamma = -c0 ln(tau) with c0 = 1; oracle tau^(2 c0 (1 - tau)).
        let tau: f64 = 0.1;
        let rbf = KernelSpec::Rbf { gamma: -tau.ln() };
        let oracle = tau.powf(2.0 * (1.0 - tau));
        let got = rbf.predicted_offdiag_bound(tau).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 0.015849).abs() < 1e-6);
        assert!(KernelSpec::CubicSpline.predicted_offdiag_bound(0.1).is_err());
        assert!(KernelSpec::Bilinear.predicted_offdiag_bound(1.0).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for spec in [
            KernelSpec::Bilinear,
            KernelSpec::default_polynomial(),
            KernelSpec::Rbf { gamma: 2.5 },
            KernelSpec::Gaussian { sigma: 0.3 },
            KernelSpec::Laplace { sigma: 1.0 },
            KernelSpec::Sigmoid { alpha: 2.0, c: 0.0 },
            KernelSpec::CubicSpline,
        ] {
            assert_eq!(spec.to_string().parse::<KernelSpec>().unwrap(), spec);
        }
        assert!("quartic:1".parse::<KernelSpec>().is_err());
        assert!("polynomial:0.1".parse::<KernelSpec>().is_err());
    }
}
