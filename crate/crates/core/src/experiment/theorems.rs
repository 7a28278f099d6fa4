use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Vector};
use crate::metrics::delta_star;
use crate::optim::{plan_step_sizes, run_schedule, run_schedule_every, Feasibility, Problem, StepPlan};
use crate::rng::{split_seed, Pcg64};
use crate::spectral::{projection_pair, EigenDecomposition};
use crate::{Error, Result};

/// Parameters of the synthetic directional-bias checks. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremSuiteConfig {
    pub n: usize,
    /// Diagonal is `[top, middle, ..., middle, bottom]`.
    pub diag_top: f64,
    pub diag_middle: f64,
    pub diag_bottom: f64,
    /// Off-diagonal entries are drawn uniformly from `[-offdiag, offdiag]`.
    pub offdiag: f64,
    pub instance_seed: u64,
    pub sgd_seed: u64,
    pub sgd_runs: usize,
    pub k1: usize,
    pub k2: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    /// GD step as a fraction of the feasible maximum.
    pub gd_fraction: f64,
}

impl Default for TheoremSuiteConfig {
    fn default() -> Self {
        TheoremSuiteConfig {
            n: 10,
            diag_top: 1.0,
            diag_middle: 0.9,
            diag_bottom: 0.5,
            offdiag: 1e-4,
            instance_seed: 2024,
            sgd_seed: 7,
            sgd_runs: 200,
            k1: 50,
            k2: 1050,
            epsilon: 0.1,
            epsilon_prime: 0.01,
            gd_fraction: 0.9,
        }
    }
}

/// Dominant symmetric `K` with the configured diagonal and a standard-normal response.
pub fn theorem_instance(cfg: &TheoremSuiteConfig) -> Result<(Matrix, Vector)> {
    if cfg.n < 3 {
        return Err(Error::InvalidParameter("theorem instance needs n >= 3".into()));
    }
    if !(cfg.offdiag >= 0.0) {
        return Err(Error::InvalidParameter("offdiag must be >= 0".into()));
    }
    let n = cfg.n;
    let mut rng = Pcg64::seed_from_u64(split_seed(cfg.instance_seed, 0));
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = match i {
            0 => cfg.diag_top,
            i if i == n - 1 => cfg.diag_bottom,
            _ => cfg.diag_middle,
        };
        for j in (i + 1)..n {
            let v = rng.uniform(-cfg.offdiag, cfg.offdiag);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let mut rng = Pcg64::seed_from_u64(split_seed(cfg.instance_seed, 1));
    let y = Vector::from_vec(rng.normal_vec(n));
    Ok((k, y))
}

/// Smallest GD step count after which `||K b_k|| / ||b_k|| <= sqrt(1 + eps') gamma_n`,
/// from the eigenbasis recursion `w_k^i = (1 - eta gamma_i^2 / n)^k w_0^i`.
///
/// Uses the sufficient condition `gamma_1^2 q^{2k} sum_{i<n} (w_0^i)^2 <= eps' gamma_n^2 q_n^{2k} (w_0^n)^2`
/// where `q = max_{i<n} |q_i|`.
pub fn gd_steps_for_alignment(eig: &EigenDecomposition, b0: &Vector, eta: f64, epsilon_prime: f64) -> Result<usize> {
    let n = eig.n();
    let nf = n as f64;
    let w0 = eig.vectors.tr_mul(b0);
    let q: Vec<f64> = eig.gammas.iter().map(|g| (1.0 - eta * g * g / nf).abs()).collect();
    let q_minor = q[..n - 1].iter().copied().fold(0.0, f64::max);
    let q_last = q[n - 1];
    let minor_sq: f64 = w0.iter().take(n - 1).map(|w| w * w).sum();
    let last_sq = w0[n - 1] * w0[n - 1];
    if minor_sq == 0.0 {
        return Ok(0);
    }
    if last_sq == 0.0 || q_minor >= q_last {
        return Err(Error::Infeasible(
            "bottom eigen-direction does not decay slowest; alignment is not reachable".into(),
        ));
    }
    let (g1, gn) = (eig.gamma1(), eig.gamma_n());
    let arg = gn * gn * epsilon_prime * last_sq / (g1 * g1 * minor_sq);
    if arg >= 1.0 {
        return Ok(0);
    }
    Ok((0.5 * arg.ln() / (q_minor / q_last).ln()).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremEntry {
    pub name: String,
    pub passed: bool,
    pub description: String,
    pub values: BTreeMap<String, f64>,
}

impl TheoremEntry {
    fn new(name: &str, passed: bool, description: &str, values: &[(&str, f64)]) -> Self {
        TheoremEntry {
            name: name.into(),
            passed,
            description: description.into(),
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub config: TheoremSuiteConfig,
    pub lambda_sorted: Vec<f64>,
    pub tau: f64,
    pub gammas: Vec<f64>,
    pub feasibility: Feasibility,
    pub gd_plan: StepPlan,
    pub sgd_plan: StepPlan,
    pub entries: Vec<TheoremEntry>,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&TheoremEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

struct SgdFinal {
    kb_norm: f64,
    b_norm: f64,
    sqrt_est: f64,
    kb_sq: f64,
    pm1_0: f64,
    pm1_k1: f64,
    p1_0: f64,
    p1_k1: f64,
}

/// Run the GD alignment, SGD alignment, stage-1 contraction and generalization
/// comparisons on the synthetic dominant instance.
pub fn theorem_suite(cfg: &TheoremSuiteConfig) -> Result<TheoremReport> {
    if cfg.sgd_runs == 0 {
        return Err(Error::InvalidParameter("sgd_runs must be >= 1".into()));
    }
    let (k, y) = theorem_instance(cfg)?;
    let problem = Problem::new(k, y)?;
    let n = problem.n();
    let nf = n as f64;
    let feasibility = plan_step_sizes(&problem.k)?;
    let projections = projection_pair(&problem.k)?;
    let (g1, gn) = (problem.eig.gamma1(), problem.eig.gamma_n());
    let alpha0 = Vector::zeros(n);
    let b0 = &alpha0 - &problem.alpha_hat;
    let mut entries = Vec::new();

    // GD aligns with the bottom eigenvector.
    let gd_eta = cfg.gd_fraction * feasibility.eta_gd_max;
    let gd_k = gd_steps_for_alignment(&problem.eig, &b0, gd_eta, cfg.epsilon_prime)?;
    let gd_plan = StepPlan::planned_gd(&feasibility, cfg.gd_fraction, gd_k)?;
    let gd = run_schedule(&problem, &alpha0, &gd_plan, 0, None)?;
    let gd_last = gd.last();
    let gd_kb = &problem.k * &gd_last.b;
    let gd_ratio = gd_kb.norm() / gd_last.b.norm();
    let upper = (1.0 + cfg.epsilon_prime).sqrt() * gn;
    // Rounding allowance on the lower end, where the ratio can sit at gamma_n exactly.
    let gd_ok = gd_ratio >= gn * (1.0 - 1e-12) && gd_ratio <= upper;
    entries.push(TheoremEntry::new(
        "gd_bottom_alignment",
        gd_ok,
        "gamma_n <= ||K b_k|| / ||b_k|| <= sqrt(1 + eps') gamma_n for GD",
        &[
            ("ratio", gd_ratio),
            ("gamma_n", gn),
            ("upper", upper),
            ("eta", gd_eta),
            ("k", gd_k as f64),
        ],
    ));

    // Two-stage SGD aligns with the top eigenvector in expectation.
    let sgd_plan = StepPlan::planned_two_stage(&feasibility, cfg.k1, cfg.k2)?;
    let finals: Vec<SgdFinal> = (0..cfg.sgd_runs)
        .into_par_iter()
        .map(|run| {
            let every = cfg.k1.max(1);
            let tr = run_schedule_every(
                &problem,
                &alpha0,
                &sgd_plan,
                split_seed(cfg.sgd_seed, run as u64),
                Some(&projections),
                every,
            )?;
            let at_k1 = tr.steps.iter().find(|s| s.t == cfg.k1).unwrap_or(&tr.steps[0]);
            let last = tr.last();
            let kb = &problem.k * &last.b;
            Ok(SgdFinal {
                kb_norm: kb.norm(),
                b_norm: last.b.norm(),
                sqrt_est: last.est_error.max(0.0).sqrt(),
                kb_sq: kb.norm_squared(),
                pm1_0: tr.steps[0].pm1_norm.unwrap_or(f64::NAN),
                pm1_k1: at_k1.pm1_norm.unwrap_or(f64::NAN),
                p1_0: tr.steps[0].p1_norm.unwrap_or(f64::NAN),
                p1_k1: at_k1.p1_norm.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;
    let mean = |f: &dyn Fn(&SgdFinal) -> f64| finals.iter().map(f).sum::<f64>() / finals.len() as f64;
    let mean_kb = mean(&|f| f.kb_norm);
    let mean_b = mean(&|f| f.b_norm);
    let e_ratio = mean_kb / mean_b;
    let lower = (1.0 - 2.0 * cfg.epsilon) * g1;
    entries.push(TheoremEntry::new(
        "sgd_top_alignment",
        e_ratio >= lower,
        "mean ||K b_k2|| / mean ||b_k2|| >= (1 - 2 eps) gamma_1 for two-stage SGD",
        &[
            ("e_ratio", e_ratio),
            ("lower", lower),
            ("gamma_1", g1),
            ("e_ratio_over_gamma_1", e_ratio / g1),
            ("eta1", sgd_plan.stages[0].eta),
            ("eta2", sgd_plan.stages[1].eta),
            ("runs", finals.len() as f64),
        ],
    ));

    let b_0 = mean(&|f| f.pm1_0);
    let b_k1 = mean(&|f| f.pm1_k1);
    entries.push(TheoremEntry::new(
        "stage1_minor_contraction",
        b_k1 < b_0,
        "mean ||P_-1 b_k1|| < mean ||P_-1 b_0|| after the moderate-step stage",
        &[
            ("b_0", b_0),
            ("b_k1", b_k1),
            ("a_0", mean(&|f| f.p1_0)),
            ("a_k1", mean(&|f| f.p1_k1)),
        ],
    ));

    // Generalization: SGD sits near the level-set optimum, GD is a factor of about gamma_1/gamma_n away.
    let a_sgd = mean_kb * mean_kb / (2.0 * nf);
    let a_sgd_sq = mean(&|f| f.kb_sq) / (2.0 * nf);
    let ds_sgd = delta_star(a_sgd, n, g1)?;
    let ds_sgd_sq = delta_star(a_sgd_sq, n, g1)?;
    let mean_sqrt_est = mean(&|f| f.sqrt_est);
    let sgd_bound = (1.0 + 4.0 * cfg.epsilon) * ds_sgd.sqrt();
    entries.push(TheoremEntry::new(
        "sgd_near_optimal_estimation",
        mean_sqrt_est <= sgd_bound,
        "mean Delta^(1/2)(SGD) <= (1 + 4 eps) (Delta*_a)^(1/2), a = (mean ||K b||)^2 / 2n",
        &[
            ("mean_sqrt_delta", mean_sqrt_est),
            ("bound", sgd_bound),
            ("a", a_sgd),
            ("delta_star", ds_sgd),
            ("a_mean_square", a_sgd_sq),
            ("bound_mean_square", (1.0 + 4.0 * cfg.epsilon) * ds_sgd_sq.sqrt()),
        ],
    ));

    let a_gd = gd_kb.norm_squared() / (2.0 * nf);
    let ds_gd = delta_star(a_gd, n, g1)?;
    let m_bound = g1 / gn * (1.0 - cfg.epsilon_prime);
    entries.push(TheoremEntry::new(
        "gd_suboptimal_estimation",
        gd_last.est_error >= m_bound * ds_gd,
        "Delta(GD) >= (gamma_1 / gamma_n)(1 - eps') Delta*_a",
        &[
            ("delta", gd_last.est_error),
            ("bound", m_bound * ds_gd),
            ("a", a_gd),
            ("delta_star", ds_gd),
            ("m", m_bound),
        ],
    ));

    Ok(TheoremReport {
        config: cfg.clone(),
        lambda_sorted: feasibility.constants.lambda.clone(),
        tau: feasibility.constants.tau,
        gammas: problem.eig.gammas.iter().copied().collect(),
        feasibility,
        gd_plan,
        sgd_plan,
        entries,
    })
}
