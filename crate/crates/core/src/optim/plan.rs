use serde::{Deserialize, Serialize};

use crate::linalg::{descending_order, ensure_finite, ensure_square, max_off_diagonal, Matrix};
use crate::spectral::{eig_sym, ProjectionPair};
use crate::{Error, Result};

/// Dominance-derived constants at their smallest admissible values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub n: usize,
    pub tau: f64,
    /// Diagonal sorted descending.
    pub lambda: Vec<f64>,
    /// Eigenvalues of `K`, descending.
    pub gammas: Vec<f64>,
    /// `lambda_n - n tau`.
    pub c1: f64,
    /// `lambda_1 + n tau`.
    pub c2: f64,
    /// `c2 / c1^2`.
    pub c3: f64,
    /// `(lambda_1 + sqrt(n) tau)(2 lambda_1 + (n-2) tau) c3`.
    pub c4: f64,
    /// `c3^2 [2 lambda_1 + (n-2) tau]^2 sqrt(n) tau + c4`.
    pub c5: f64,
    /// `None` when its defining fraction is undefined or has a nonpositive denominator.
    pub c6: Option<f64>,
    /// `sqrt(n) tau + c4`.
    pub c7: f64,
    /// `lambda_n^2 - (2 lambda_1 + (n-2) tau) n tau`.
    pub minor_gap: f64,
}

impl TheoryConstants {
    pub fn from_matrix(k: &Matrix) -> Result<Self> {
        let n = ensure_square(k)?;
        ensure_finite(k, "Gram matrix")?;
        if n < 2 {
            return Err(Error::InvalidParameter("need n >= 2".into()));
        }
        let diag: Vec<f64> = k.diagonal().iter().copied().collect();
        if let Some((index, &value)) = diag.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::NonPositiveDiagonal { index, value });
        }
        let lambda: Vec<f64> = descending_order(&diag).into_iter().map(|i| diag[i]).collect();
        let gammas = eig_sym(k)?.gammas.iter().copied().collect();
        Self::from_parts(lambda, max_off_diagonal(k), gammas)
    }

    pub fn from_parts(lambda: Vec<f64>, tau: f64, gammas: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        let nf = n as f64;
        let rn = nf.sqrt();
        let (l1, l2, ln) = (lambda[0], lambda[1], lambda[n - 1]);
        let c1 = ln - nf * tau;
        if c1 <= 0.0 {
            return Err(Error::WeakDominance { c1 });
        }
        let c2 = l1 + nf * tau;
        let c3 = c2 / (c1 * c1);
        let a = 2.0 * l1 + (nf - 2.0) * tau;
        let c4 = (l1 + rn * tau) * a * c3;
        let c5 = c3 * c3 * a * a * rn * tau + c4;
        let minor_gap = ln * ln - a * nf * tau;
        let c6 = if minor_gap > 0.0 {
            let denom = 1.0 - c4 * rn * tau / minor_gap;
            let num = rn * tau - c4 * c4 * tau / rn / minor_gap + l2 * l2 * c4 / minor_gap;
            (denom > 0.0).then(|| num / denom)
        } else {
            None
        };
        let c7 = rn * tau + c4;
        Ok(TheoryConstants {
            n,
            tau,
            lambda,
            gammas,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            minor_gap,
        })
    }
}

/// Step-size ranges under which the directional-bias guarantees apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `(2/(lambda_1^2 - c5 sqrt(n) tau), 2/(lambda_2^2 + c6 sqrt(n) tau))`; meaningful only when `eta1_nonempty`.
    pub eta1_interval: (f64, f64),
    pub eta1_nonempty: bool,
    pub empty_reason: Option<String>,
    /// `1/(lambda_1^2 + c7 sqrt(n) tau)`.
    pub eta2_max: f64,
    /// `n/(lambda_1 + n tau)^2`.
    pub eta_gd_max: f64,
    /// `lambda_n^2 > (2 lambda_1 + (n-2) tau) n tau + c4 sqrt(n) tau`.
    pub minor_separation: bool,
    pub constants: TheoryConstants,
}

/// Step-size feasibility for two-stage SGD and single-stage GD on `K`.
pub fn plan_step_sizes(k: &Matrix) -> Result<Feasibility> {
    Ok(feasibility_from_constants(TheoryConstants::from_matrix(k)?))
}

pub fn feasibility_from_constants(c: TheoryConstants) -> Feasibility {
    let nf = c.n as f64;
    let rt = nf.sqrt() * c.tau;
    let (l1, l2) = (c.lambda[0], c.lambda[1]);
    let lo_den = l1 * l1 - c.c5 * rt;
    let mut empty_reason = None;
    let (lo, hi) = match c.c6 {
        Some(c6) => {
            let hi_den = l2 * l2 + c6 * rt;
            if lo_den <= 0.0 {
                empty_reason = Some(format!("lambda_1^2 - c5 sqrt(n) tau = {lo_den} is not positive"));
            } else if hi_den >= lo_den {
                empty_reason = Some(format!(
                    "no spectral separation: lambda_2^2 + c6 sqrt(n) tau = {hi_den} >= lambda_1^2 - c5 sqrt(n) tau = {lo_den}"
                ));
            }
            (2.0 / lo_den, 2.0 / hi_den)
        }
        None => {
            empty_reason = Some("c6 is undefined for this matrix".into());
            (2.0 / lo_den, f64::NAN)
        }
    };
    let a = 2.0 * l1 + (nf - 2.0) * c.tau;
    let ln = c.lambda[c.n - 1];
    Feasibility {
        eta1_interval: (lo, hi),
        eta1_nonempty: empty_reason.is_none(),
        empty_reason,
        eta2_max: 1.0 / (l1 * l1 + c.c7 * rt),
        eta_gd_max: nf / (l1 + nf * c.tau).powi(2),
        minor_separation: ln * ln > a * nf * c.tau + c.c4 * rt,
        constants: c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sgd,
    Gd,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Sgd => "sgd",
            Method::Gd => "gd",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Method::Sgd),
            "gd" => Ok(Method::Gd),
            _ => Err(Error::Unknown {
                kind: "method",
                name: s.into(),
            }),
        }
    }
}

/// A constant step size held for `steps` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub eta: f64,
    pub steps: usize,
}

/// Piecewise-constant step schedule for one optimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub method: Method,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub theorem_compliant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Feasibility>,
}

impl StepPlan {
    pub fn single_stage(method: Method, eta: f64, k: usize) -> Self {
        StepPlan {
            method,
            stages: vec![Stage { eta, steps: k }],
            theorem_compliant: false,
            feasibility: None,
        }
    }

    /// `eta1` for steps `1..=k1`, then `eta2` up to step `k2` (total).
    pub fn two_stage(method: Method, eta1: f64, k1: usize, eta2: f64, k2: usize) -> Result<Self> {
        if k2 < k1 {
            return Err(Error::InvalidParameter(format!("k2 = {k2} must be >= k1 = {k1}")));
        }
        Ok(StepPlan {
            method,
            stages: vec![Stage { eta: eta1, steps: k1 }, Stage { eta: eta2, steps: k2 - k1 }],
            theorem_compliant: false,
            feasibility: None,
        })
    }

    /// Two-stage SGD chosen from the feasibility record: `eta1` at the midpoint of
    /// its interval and `eta2 = min(0.9 eta2_max, n / ((k2 - k1) lambda_1^2))`,
    /// which keeps the second stage's total step budget comparable to one epoch
    /// of the dominant direction.
    pub fn planned_two_stage(feasibility: &Feasibility, k1: usize, k2: usize) -> Result<Self> {
        if !feasibility.eta1_nonempty {
            return Err(Error::Infeasible(
                feasibility.empty_reason.clone().unwrap_or_else(|| "empty stage-1 interval".into()),
            ));
        }
        let (lo, hi) = feasibility.eta1_interval;
        let eta1 = 0.5 * (lo + hi);
        let c = &feasibility.constants;
        let l1 = c.lambda[0];
        let mut eta2 = 0.9 * feasibility.eta2_max;
        if k2 > k1 {
            eta2 = eta2.min(c.n as f64 / ((k2 - k1) as f64 * l1 * l1));
        }
        let mut plan = Self::two_stage(Method::Sgd, eta1, k1, eta2, k2)?;
        plan.theorem_compliant = true;
        plan.feasibility = Some(feasibility.clone());
        Ok(plan)
    }

    /// Single-stage GD at `fraction` of the feasible maximum.
    pub fn planned_gd(feasibility: &Feasibility, fraction: f64, k: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("fraction must lie in (0, 1), got {fraction}")));
        }
        let mut plan = Self::single_stage(Method::Gd, fraction * feasibility.eta_gd_max, k);
        plan.theorem_compliant = true;
        plan.feasibility = Some(feasibility.clone());
        Ok(plan)
    }

    pub fn total_steps(&self) -> usize {
        self.stages.iter().map(|s| s.steps).sum()
    }

    /// Step size used at 1-based step `t`.
    pub fn eta_at(&self, t: usize) -> Option<f64> {
        let mut end = 0;
        for s in &self.stages {
            end += s.steps;
            if t <= end && t >= 1 {
                return Some(s.eta);
            }
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidParameter("plan has no stages".into()));
        }
        if let Some(s) = self.stages.iter().find(|s| !(s.eta.is_finite() && s.eta > 0.0)) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {}", s.eta)));
        }
        if !self.theorem_compliant {
            return Ok(());
        }
        let Some(f) = &self.feasibility else {
            return Ok(());
        };
        self.check_against(f)
    }

    /// Check the step sizes against a feasibility record.
    pub fn check_against(&self, f: &Feasibility) -> Result<()> {
        match (self.method, self.stages.as_slice()) {
            (Method::Sgd, [first, rest @ ..]) => {
                if !f.eta1_nonempty {
                    return Err(Error::Infeasible(f.empty_reason.clone().unwrap_or_default()));
                }
                let (lo, hi) = f.eta1_interval;
                if !(first.eta > lo && first.eta < hi) {
                    return Err(Error::Infeasible(format!("eta1 = {} outside ({lo}, {hi})", first.eta)));
                }
                if let Some(s) = rest.iter().find(|s| s.eta >= f.eta2_max) {
                    return Err(Error::Infeasible(format!("eta2 = {} not below {}", s.eta, f.eta2_max)));
                }
                Ok(())
            }
            (Method::Gd, stages) => match stages.iter().find(|s| s.eta >= f.eta_gd_max) {
                Some(s) => Err(Error::Infeasible(format!("GD eta = {} not below {}", s.eta, f.eta_gd_max))),
                None => Ok(()),
            },
            (Method::Sgd, []) => Err(Error::InvalidParameter("plan has no stages".into())),
        }
    }
}

/// Per-step contraction and coupling factors for a given step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// `(n-1)/n + (1/n) |1 - eta ||P_1 K_lead||^2|`.
    pub q1: f64,
    /// Trajectory-free upper bound on the minor-component factor.
    pub q_minus1_bound: f64,
    /// `c4 eta tau / sqrt(n)`.
    pub xi: f64,
}

/// Evaluate the one-step factors. The minor-component factor depends on
/// `||K P_{-1} b|| / ||P_{-1} b||`; it is replaced by whichever end of that
/// ratio's admissible range maximises the factor, so the value returned is an
/// upper bound regardless of the sign of `eta^2 (lambda_2^2 + (n-1) tau^2) - 2 eta`.
pub fn step_diagnostics(k: &Matrix, eta: f64, projections: &ProjectionPair) -> Result<StepDiagnostics> {
    let c = TheoryConstants::from_matrix(k)?;
    let nf = c.n as f64;
    let (l1, l2, ln) = (c.lambda[0], c.lambda[1], c.lambda[c.n - 1]);
    let tau = c.tau;
    let lead = k.column(projections.lead).into_owned();
    let major_sq = (&projections.p1 * lead).norm_squared();
    let q1 = (nf - 1.0) / nf + (1.0 - eta * major_sq).abs() / nf;
    let bracket = eta * eta * (l2 * l2 + (nf - 1.0) * tau * tau) - 2.0 * eta;
    let a = 2.0 * l1 + (nf - 2.0) * tau;
    let ratio_sq = if bracket <= 0.0 {
        (ln * ln - a * nf * tau).max(0.0)
    } else {
        l2 * l2 + (2.0 * l1 + (nf - 1.0) * tau) * nf * tau
    };
    let q_minus1_bound = (1.0 + ratio_sq / nf * bracket).max(0.0).sqrt();
    let xi = c.c4 * eta * tau / nf.sqrt();
    Ok(StepDiagnostics { q1, q_minus1_bound, xi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::spectral::projection_pair;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(v.to_vec()))
    }

    #[test]
    fn uncoupled_constants_collapse() {
        let f = plan_step_sizes(&diag(&[2.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(f.eta1_nonempty);
        assert_eq!(f.eta1_interval, (0.5, 2.0));
        assert_eq!(f.eta2_max, 0.25);
        assert_eq!(f.eta_gd_max, 1.0);
        // c4 = lambda_1 * 2 lambda_1 * lambda_1 / lambda_n^2 survives at tau = 0 but only ever multiplies tau.
        assert_eq!(f.constants.c4, 16.0);
    }

    #[test]
    fn identity_has_no_stage_one_interval() {
        let f = plan_step_sizes(&Matrix::identity(3, 3)).unwrap();
        assert!(!f.eta1_nonempty);
        assert!(f.empty_reason.unwrap().contains("separation"));
    }

    #[test]
    fn weak_dominance_is_an_error() {
        let k = Matrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        assert!(matches!(plan_step_sizes(&k), Err(Error::WeakDominance { .. })));
    }

    #[test]
    fn plan_validation() {
        let f = plan_step_sizes(&diag(&[2.0, 1.0, 1.0])).unwrap();
        let mut p = StepPlan::two_stage(Method::Sgd, 1.0, 10, 0.1, 20).unwrap();
        p.theorem_compliant = true;
        p.feasibility = Some(f.clone());
        assert!(p.validate().is_ok());
        p.stages[0].eta = 3.0;
        assert!(matches!(p.validate(), Err(Error::Infeasible(_))));
        assert!(StepPlan::two_stage(Method::Sgd, 1.0, 10, 0.1, 5).is_err());
        assert!(StepPlan::single_stage(Method::Gd, -1.0, 3).validate().is_err());
        let planned = StepPlan::planned_two_stage(&f, 50, 1050).unwrap();
        assert!(planned.validate().is_ok());
        assert_eq!(planned.total_steps(), 1050);
    }

    #[test]
    fn eta_lookup_by_step() {
        let p = StepPlan::two_stage(Method::Sgd, 0.1, 2, 0.01, 5).unwrap();
        let etas: Vec<Option<f64>> = (0..=6).map(|t| p.eta_at(t)).collect();
        assert_eq!(etas, vec![None, Some(0.1), Some(0.1), Some(0.01), Some(0.01), Some(0.01), None]);
    }

    #[test]
    fn diagnostics_without_coupling() {
        let k = diag(&[2.0, 1.0, 1.0, 1.0]);
        let pp = projection_pair(&k).unwrap();
        let d = step_diagnostics(&k, 1.0, &pp).unwrap();
        assert_eq!(d.q1, 0.75 + 3.0 / 4.0);
        assert_eq!(d.xi, 0.0);
        // Stage-1 step: the major component expands while the minor one contracts.
        assert!(d.q1 > 1.0 && d.q_minus1_bound < 1.0);
        let d2 = step_diagnostics(&k, 0.2, &pp).unwrap();
        assert!(d2.q1 < 1.0);
    }

    #[test]
    fn method_round_trip() {
        assert_eq!("SGD".parse::<Method>().unwrap(), Method::Sgd);
        assert_eq!(Method::Gd.to_string(), "gd");
        assert!("adam".parse::<Method>().is_err());
    }
}
