use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{Method, Problem, StepPlan};
use crate::linalg::Vector;
use crate::rng::Pcg64;
use crate::spectral::ProjectionPair;
use crate::{Error, Result};

/// `||b_t||` above this multiple of `||b_0||` aborts a run.
pub const DIVERGENCE_FACTOR: f64 = 1e8;

/// Metrics of one recorded iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub alpha: Vector,
    /// `alpha - alpha_hat`.
    pub b: Vector,
    /// `||K b||^2 / ||b||^2`, absent when `b = 0`.
    pub rq: Option<f64>,
    pub p1_norm: Option<f64>,
    pub pm1_norm: Option<f64>,
    /// `(1/2n) ||K b||^2`, the training loss of an interpolating problem.
    pub train_loss: f64,
    /// `b^T K b`.
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    pub seed: u64,
    pub plan: StepPlan,
}

impl Trajectory {
    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("trajectory always holds t = 0")
    }

    /// CSV with a leading `# {json}` line describing the plan and seed.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            seed: u64,
            plan: &'a StepPlan,
        }
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# {}", serde_json::to_string(&Header { seed: self.seed, plan: &self.plan })?)?;
        let n = self.steps.first().map_or(0, |s| s.alpha.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["t", "rq", "train_loss", "est_error", "p1_norm", "pm1_norm"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=n).map(|i| format!("alpha_{i}")));
        header.extend((1..=n).map(|i| format!("b_{i}")));
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.steps {
            let mut rec = vec![
                s.t.to_string(),
                opt(s.rq),
                s.train_loss.to_string(),
                s.est_error.to_string(),
                opt(s.p1_norm),
                opt(s.pm1_norm),
            ];
            rec.extend(s.alpha.iter().map(|v| v.to_string()));
            rec.extend(s.b.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn record(problem: &Problem, t: usize, b: &Vector, projections: Option<&ProjectionPair>) -> StepRecord {
    let kb = &problem.k * b;
    let kb_sq = kb.norm_squared();
    let b_sq = b.norm_squared();
    let (p1_norm, pm1_norm) = match projections {
        Some(pp) => {
            let (a, c) = pp.split_norms(b);
            (Some(a), Some(c))
        }
        None => (None, None),
    };
    StepRecord {
        t,
        alpha: &problem.alpha_hat + b,
        b: b.clone(),
        rq: (b_sq > 0.0).then(|| kb_sq / b_sq),
        p1_norm,
        pm1_norm,
        train_loss: kb_sq / (2.0 * problem.n() as f64),
        est_error: b.dot(&kb),
    }
}

/// Run `plan` from `alpha0`, recording every step.
pub fn run_schedule(
    problem: &Problem,
    alpha0: &Vector,
    plan: &StepPlan,
    seed: u64,
    projections: Option<&ProjectionPair>,
) -> Result<Trajectory> {
    run_schedule_every(problem, alpha0, plan, seed, projections, 1)
}

/// Run `plan` from `alpha0`, recording `t = 0`, every `record_every`-th step and the final step.
///
/// SGD draws one index per step, uniformly with replacement, from a generator
/// seeded with `seed`. Residuals are evaluated as `K (alpha - alpha_hat)`, so
/// `alpha_hat` is an exact fixed point.
pub fn run_schedule_every(
    problem: &Problem,
    alpha0: &Vector,
    plan: &StepPlan,
    seed: u64,
    projections: Option<&ProjectionPair>,
    record_every: usize,
) -> Result<Trajectory> {
    plan.validate()?;
    let n = problem.n();
    if alpha0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: alpha0.len(),
        });
    }
    if alpha0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("alpha0"));
    }
    if record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be >= 1".into()));
    }
    let k = &problem.k;
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut b = alpha0 - &problem.alpha_hat;
    let limit = DIVERGENCE_FACTOR * b.norm();
    let total = plan.total_steps();
    let mut steps = vec![record(problem, 0, &b, projections)];
    let mut t = 0;
    for stage in &plan.stages {
        for _ in 0..stage.steps {
            t += 1;
            match plan.method {
                Method::Sgd => {
                    let i = rng.index(n);
                    let col = k.column(i);
                    let r = col.dot(&b);
                    b.axpy(-stage.eta * r, &col, 1.0);
                }
                Method::Gd => {
                    let g = k.tr_mul(&(k * &b));
                    b.axpy(-stage.eta / n as f64, &g, 1.0);
                }
            }
            let norm = b.norm();
            if !norm.is_finite() || norm > limit {
                return Err(Error::Diverged { step: t, norm });
            }
            if t % record_every == 0 || t == total {
                steps.push(record(problem, t, &b, projections));
            }
        }
    }
    Ok(Trajectory {
        steps,
        seed,
        plan: plan.clone(),
    })
}
