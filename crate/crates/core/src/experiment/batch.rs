use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SchemeConfig};
use crate::kernels::simulate_sine_regression;
use crate::linalg::{Matrix, Vector};
use crate::metrics::{prediction_error_from_cross, wilcoxon_signed_rank, Alternative, WilcoxonResult};
use crate::optim::{plan_step_sizes, run_schedule_every, Problem};
use crate::rng::split_seed;
use crate::spectral::projection_pair;
use crate::{Error, Result};

const TRAIN_STREAM: u64 = 0;
const TEST_STREAM: u64 = 1;

/// Seed-stream id for a scheme's index draws, derived from its name (FNV-1a).
fn scheme_stream(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Median, mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Aggregate {
                median: f64::NAN,
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Aggregate { median, mean, sd }
    }
}

/// Final-iterate values of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFinal {
    pub seed: u64,
    pub rq: Option<f64>,
    pub rrq: Option<f64>,
    pub pred_mse: f64,
    pub train_loss: f64,
    pub est_error: f64,
    /// `||K b||`.
    pub kb_norm: f64,
    /// `||b||`.
    pub b_norm: f64,
    pub gamma1: f64,
    pub gamma_n: f64,
}

/// Per-step means of `||P_1 b_t||` and `||P_{-1} b_t||` across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCurves {
    pub t: Vec<usize>,
    pub a_t: Vec<f64>,
    pub b_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub name: String,
    pub steps: usize,
    pub per_seed: Vec<SeedFinal>,
    pub final_rq: Aggregate,
    pub final_rrq: Aggregate,
    pub final_pred_mse: Aggregate,
    pub final_train_loss: Aggregate,
    pub final_est_error: Aggregate,
    /// `mean ||K b|| / mean ||b||` over seeds.
    pub e_ratio: f64,
    pub curves: Option<ProjectionCurves>,
}

impl SchemeSummary {
    /// Aggregate per-seed finals (without projection curves).
    pub fn from_finals(name: &str, steps: usize, per_seed: Vec<SeedFinal>) -> Self {
        let collect = |f: &dyn Fn(&SeedFinal) -> Option<f64>| -> Vec<f64> { per_seed.iter().filter_map(f).collect() };
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let kb = collect(&|s| Some(s.kb_norm));
        let b = collect(&|s| Some(s.b_norm));
        SchemeSummary {
            name: name.into(),
            steps,
            final_rq: Aggregate::of(&collect(&|s| s.rq)),
            final_rrq: Aggregate::of(&collect(&|s| s.rrq)),
            final_pred_mse: Aggregate::of(&collect(&|s| Some(s.pred_mse))),
            final_train_loss: Aggregate::of(&collect(&|s| Some(s.train_loss))),
            final_est_error: Aggregate::of(&collect(&|s| Some(s.est_error))),
            e_ratio: mean(&kb) / mean(&b),
            curves: None,
            per_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FinalRq,
    FinalRrq,
    FinalPredMse,
    FinalTrainLoss,
    FinalEstError,
}

impl Metric {
    pub fn value(&self, s: &SeedFinal) -> Option<f64> {
        match self {
            Metric::FinalRq => s.rq,
            Metric::FinalRrq => s.rrq,
            Metric::FinalPredMse => Some(s.pred_mse),
            Metric::FinalTrainLoss => Some(s.train_loss),
            Metric::FinalEstError => Some(s.est_error),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::FinalRq => "rq",
            Metric::FinalRrq => "rrq",
            Metric::FinalPredMse => "pred_mse",
            Metric::FinalTrainLoss => "train_loss",
            Metric::FinalEstError => "est_error",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("final_").replace('-', "_").as_str() {
            "rq" => Ok(Metric::FinalRq),
            "rrq" => Ok(Metric::FinalRrq),
            "pred_mse" => Ok(Metric::FinalPredMse),
            "train_loss" => Ok(Metric::FinalTrainLoss),
            "est_error" => Ok(Metric::FinalEstError),
            _ => Err(Error::Unknown {
                kind: "metric",
                name: s.into(),
            }),
        }
    }
}

/// One-sided comparison of two schemes on a per-seed metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scheme_a: String,
    pub scheme_b: String,
    pub metric: Metric,
    pub result: Option<WilcoxonResult>,
    /// Set when the test is undefined or the sample is small.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub seeds: Vec<u64>,
    pub schemes: Vec<SchemeSummary>,
    /// For every scheme pair `(a, b)`: RQ with alternative `greater`, prediction MSE with `less`.
    pub pairwise: Vec<Comparison>,
}

impl BatchSummary {
    pub fn scheme(&self, name: &str) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.name == name)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
    }
}

/// Pair per-seed values of `metric` for schemes `a` and `b` and run the signed-rank test.
pub fn compare_schemes(
    summary: &BatchSummary,
    metric: Metric,
    a: &str,
    b: &str,
    alternative: Alternative,
) -> Result<(WilcoxonResult, Option<String>)> {
    let find = |name: &str| {
        summary.scheme(name).ok_or_else(|| Error::Unknown {
            kind: "scheme",
            name: name.into(),
        })
    };
    let (sa, sb) = (find(a)?, find(b)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for fa in &sa.per_seed {
        let Some(fb) = sb.per_seed.iter().find(|f| f.seed == fa.seed) else {
            continue;
        };
        if let (Some(x), Some(y)) = (metric.value(fa), metric.value(fb)) {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidParameter(format!("schemes '{a}' and '{b}' share no seeds with this metric")));
    }
    let warning = (xs.len() < 5).then(|| format!("only {} paired seeds; at least 5 recommended", xs.len()));
    Ok((wilcoxon_signed_rank(&xs, &ys, alternative)?, warning))
}

struct RunOutput {
    finals: SeedFinal,
    t: Vec<usize>,
    p1: Option<Vec<f64>>,
    pm1: Option<Vec<f64>>,
}

const CSV_HEADER: [&str; 8] = ["t", "rq", "rrq", "train_loss", "est_error", "pred_mse", "p1_norm", "pm1_norm"];

fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<RunOutput>> {
    let d = &config.data;
    let train = simulate_sine_regression(d.n, d.p, d.noise_sd, split_seed(seed, TRAIN_STREAM), d.sq_norm_range)?;
    let test = simulate_sine_regression(d.n_test, d.p, d.noise_sd, split_seed(seed, TEST_STREAM), d.sq_norm_range)?;
    let k = config.kernel.gram_matrix(&train.x)?;
    let cross: Matrix = config.kernel.cross_gram(&test.x, &train.x)?;
    let y_test: &Vector = test.response()?;
    let problem = Problem::new(k, train.response()?.clone())?;
    let projections = projection_pair(&problem.k).ok();
    let gamma1 = problem.eig.gamma1();
    let gamma_n = problem.eig.gamma_n();
    let alpha0 = Vector::zeros(d.n);

    let mut outputs = Vec::with_capacity(config.schemes.len());
    for scheme in &config.schemes {
        let mut plan = scheme.plan();
        if scheme.theorem_compliant {
            let feasibility = plan_step_sizes(&problem.k)?;
            plan.check_against(&feasibility)?;
            plan.feasibility = Some(feasibility);
        }
        let traj = run_schedule_every(
            &problem,
            &alpha0,
            &plan,
            split_seed(seed, scheme_stream(&scheme.name)),
            projections.as_ref(),
            config.record_every,
        )?;
        let pred: Vec<f64> = traj
            .steps
            .iter()
            .map(|s| prediction_error_from_cross(&cross, &s.alpha, y_test))
            .collect();
        if let Some(dir) = &config.output_dir {
            write_run_csv(&dir.join(format!("seed{seed}_{}.csv", scheme.name)), &traj.steps, &pred, gamma1)?;
        }
        let last = traj.last();
        let kb_norm = (&problem.k * &last.b).norm();
        outputs.push(RunOutput {
            finals: SeedFinal {
                seed,
                rq: last.rq,
                rrq: last.rq.map(|r| r / (gamma1 * gamma1)),
                pred_mse: *pred.last().expect("nonempty"),
                train_loss: last.train_loss,
                est_error: last.est_error,
                kb_norm,
                b_norm: last.b.norm(),
                gamma1,
                gamma_n,
            },
            t: traj.steps.iter().map(|s| s.t).collect(),
            p1: projections.as_ref().map(|_| traj.steps.iter().map(|s| s.p1_norm.unwrap_or(f64::NAN)).collect()),
            pm1: projections.as_ref().map(|_| traj.steps.iter().map(|s| s.pm1_norm.unwrap_or(f64::NAN)).collect()),
        });
    }
    Ok(outputs)
}

fn write_run_csv(path: &Path, steps: &[crate::optim::StepRecord], pred: &[f64], gamma1: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (s, p) in steps.iter().zip(pred) {
        w.write_record([
            s.t.to_string(),
            opt(s.rq),
            opt(s.rq.map(|r| r / (gamma1 * gamma1))),
            s.train_loss.to_string(),
            s.est_error.to_string(),
            p.to_string(),
            opt(s.p1_norm),
            opt(s.pm1_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Run every scheme on every seed's freshly generated train/test data.
///
/// Seeds run in parallel; each seed's data and index streams depend only on
/// that seed (and the scheme name), so results do not depend on scheduling.
/// With `output_dir` set, writes `seed{seed}_{scheme}.csv` per run and `batch.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<BatchSummary> {
    config.validate()?;
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
    }
    let per_seed: Vec<Vec<RunOutput>> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<_>>()?;

    let schemes: Vec<SchemeSummary> = config
        .schemes
        .iter()
        .enumerate()
        .map(|(j, scheme)| summarise_scheme(scheme, per_seed.iter().map(|runs| &runs[j]).collect()))
        .collect();

    let mut summary = BatchSummary {
        seeds: config.seeds.clone(),
        schemes,
        pairwise: Vec::new(),
    };
    summary.pairwise = pairwise(&summary);
    if let Some(dir) = &config.output_dir {
        summary.write_json(dir.join("batch.json"))?;
    }
    Ok(summary)
}

fn summarise_scheme(scheme: &SchemeConfig, runs: Vec<&RunOutput>) -> SchemeSummary {
    let mut s = SchemeSummary::from_finals(&scheme.name, scheme.total_steps(), runs.iter().map(|r| r.finals.clone()).collect());
    if runs.iter().all(|r| r.p1.is_some()) {
        let len = runs[0].t.len();
        let count = runs.len() as f64;
        let mean_at = |get: &dyn Fn(&RunOutput) -> &Vec<f64>, i: usize| runs.iter().map(|r| get(r)[i]).sum::<f64>() / count;
        s.curves = Some(ProjectionCurves {
            t: runs[0].t.clone(),
            a_t: (0..len).map(|i| mean_at(&|r| r.p1.as_ref().unwrap(), i)).collect(),
            b_t: (0..len).map(|i| mean_at(&|r| r.pm1.as_ref().unwrap(), i)).collect(),
        });
    }
    s
}

fn pairwise(summary: &BatchSummary) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (i, a) in summary.schemes.iter().enumerate() {
        for b in &summary.schemes[i + 1..] {
            for (metric, alt) in [(Metric::FinalRq, Alternative::Greater), (Metric::FinalPredMse, Alternative::Less)] {
                let (result, note) = match compare_schemes(summary, metric, &a.name, &b.name, alt) {
                    Ok((r, warn)) => (Some(r), warn),
                    Err(e) => (None, Some(e.to_string())),
                };
                out.push(Comparison {
                    scheme_a: a.name.clone(),
                    scheme_b: b.name.clone(),
                    metric,
                    result,
                    note,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_statistics() {
        let a = Aggregate::of(&[3.0, 1.0, 2.0, 4.0]);
        assert_eq!(a.median, 2.5);
        assert_eq!(a.mean, 2.5);
        assert!((a.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Aggregate::of(&[7.0]).sd, 0.0);
    }

    #[test]
    fn metric_names() {
        assert_eq!("rq".parse::<Metric>().unwrap(), Metric::FinalRq);
        assert_eq!("final_pred_mse".parse::<Metric>().unwrap(), Metric::FinalPredMse);
        assert_eq!("est-error".parse::<Metric>().unwrap(), Metric::FinalEstError);
        assert!("loss".parse::<Metric>().is_err());
    }

    #[test]
    fn scheme_streams_differ() {
        assert_ne!(scheme_stream("sgd-moderate"), scheme_stream("sgd-small"));
    }
}
