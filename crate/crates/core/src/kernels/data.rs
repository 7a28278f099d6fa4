//! Synthetic data generators and dataset (de)serialisation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Vector};
use crate::rng::{split_seed, Pcg64};
use crate::{Error, Result};

pub const SPHERE_GENERATOR: &str = "sphere";
pub const SINE_GENERATOR: &str = "sine-regression";

/// Provenance written next to a dataset as a JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSetMeta {
    pub seed: u64,
    pub generator_id: String,
    pub n: usize,
    pub p: usize,
    pub noise_sd: Option<f64>,
    pub sq_norm_range: Option<[f64; 2]>,
}

/// Design matrix (one row per observation) with an optional response.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub x: Matrix,
    pub y: Option<Vector>,
    pub meta: DataSetMeta,
}

impl DataSet {
    pub fn new(x: Matrix, y: Option<Vector>, meta: DataSetMeta) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidParameter("dataset must have at least one row and column".into()));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if let Some(y) = &y {
            if y.len() != x.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: x.nrows(),
                    found: y.len(),
                });
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("response"));
            }
        }
        Ok(DataSet { x, y, meta })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Response vector; errors for X-only datasets.
    pub fn response(&self) -> Result<&Vector> {
        self.y
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("dataset has no response column".into()))
    }

    /// Write `X` row-major with `y` as the final column (when present).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let mut header: Vec<String> = (1..=self.p()).map(|j| format!("x{j}")).collect();
        if self.y.is_some() {
            header.push("y".into());
        }
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut record: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            if let Some(y) = &self.y {
                record.push(y[i].to_string());
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &self.meta)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Read a CSV written by [`DataSet::write_csv`] together with its JSON sidecar.
    pub fn read(csv_path: impl AsRef<Path>, sidecar_path: impl AsRef<Path>) -> Result<Self> {
        let meta: DataSetMeta = serde_json::from_reader(BufReader::new(File::open(sidecar_path)?))?;
        let mut r = csv::Reader::from_reader(BufReader::new(File::open(csv_path)?));
        let has_y = r.headers()?.iter().next_back() == Some("y");
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidParameter(format!("bad number '{s}': {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let p = if has_y { width.saturating_sub(1) } else { width };
        let mut x = Matrix::zeros(n, p);
        let mut y = Vector::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            for j in 0..p {
                x[(i, j)] = row[j];
            }
            if has_y {
                y[i] = row[p];
            }
        }
        DataSet::new(x, has_y.then_some(y), meta)
    }
}

fn check_range(range: [f64; 2]) -> Result<()> {
    let [lo, hi] = range;
    if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "squared-norm range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )))
    }
}

/// One row: Gaussian direction, rescaled to a squared norm drawn uniformly from `range`.
fn sample_row(rng: &mut Pcg64, d: usize, range: [f64; 2], out: &mut [f64]) {
    let mut sq = 0.0;
    for v in out.iter_mut().take(d) {
        *v = rng.standard_normal();
        sq += *v * *v;
    }
    let target = if range[0] == range[1] {
        range[0]
    } else {
        rng.uniform(range[0], range[1])
    };
    let scale = (target / sq).sqrt();
    for v in out.iter_mut().take(d) {
        *v *= scale;
    }
}

fn sample_rows(rng: &mut Pcg64, n: usize, d: usize, range: [f64; 2]) -> Matrix {
    let mut x = Matrix::zeros(n, d);
    let mut row = vec![0.0; d];
    for i in 0..n {
        sample_row(rng, d, range, &mut row);
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    x
}

/// `n` points with uniformly random directions in `R^d` and squared norms uniform on `sq_norm_range`.
pub fn sample_sphere_data(n: usize, d: usize, seed: u64, sq_norm_range: [f64; 2]) -> Result<DataSet> {
    check_range(sq_norm_range)?;
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be positive".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let x = sample_rows(&mut rng, n, d, sq_norm_range);
    DataSet::new(
        x,
        None,
        DataSetMeta {
            seed,
            generator_id: SPHERE_GENERATOR.into(),
            n,
            p: d,
            noise_sd: None,
            sq_norm_range: Some(sq_norm_range),
        },
    )
}

/// Noise-free regression target `sum_j sin(x_j)`.
pub fn sine_target(row: &[f64]) -> f64 {
    row.iter().map(|v| v.sin()).sum()
}

/// Synthetic sine regression: Gaussian rows rescaled into `sq_norm_range`,
/// then `y_i = sum_j sin(x_ij) + N(0, noise_sd^2)` on the rescaled rows.
pub fn simulate_sine_regression(
    n: usize,
    p: usize,
    noise_sd: f64,
    seed: u64,
    sq_norm_range: [f64; 2],
) -> Result<DataSet> {
    check_range(sq_norm_range)?;
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter("n and p must be positive".into()));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let x = sample_rows(&mut rng, n, p, sq_norm_range);
    let y = Vector::from_iterator(
        n,
        (0..n).map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            sine_target(&row)
        }),
    );
    let y = y.map(|v| v + noise_sd * rng.standard_normal());
    DataSet::new(
        x,
        Some(y),
        DataSetMeta {
            seed,
            generator_id: SINE_GENERATOR.into(),
            n,
            p,
            noise_sd: Some(noise_sd),
            sq_norm_range: Some(sq_norm_range),
        },
    )
}

/// Inner-product threshold `sqrt(4 ln(2 n^2 / delta) / d)`.
pub fn tau_threshold(n: usize, d: usize, delta: f64) -> f64 {
    (4.0 * (2.0 * (n * n) as f64 / delta).ln() / d as f64).sqrt()
}

/// Outcome of a Monte Carlo check of the unit-sphere inner-product tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauBoundCheck {
    pub threshold: f64,
    pub trials: usize,
    pub failures: usize,
    pub rate: f64,
}

/// Fraction of trials in which `max_{i != j} |<x_i, x_j>|` for `n` uniform unit
/// vectors in `R^d` reaches [`tau_threshold`]. Trials use independent seed streams
/// and run in parallel.
pub fn tau_bound_check(n: usize, d: usize, delta: f64, trials: usize, seed: u64) -> Result<TauBoundCheck> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2 points".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let required = 4.0 * (2.0 * (n * n) as f64 / delta).ln();
    if (d as f64) < required * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} is below 4 ln(2n^2/delta) = {required:.4}"
        )));
    }
    let threshold = tau_threshold(n, d, delta);
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = Pcg64::seed_from_u64(split_seed(seed, trial as u64));
            let x = sample_rows(&mut rng, n, d, [1.0, 1.0]);
            max_abs_inner(&x) >= threshold
        })
        .count();
    Ok(TauBoundCheck {
        threshold,
        trials,
        failures,
        rate: failures as f64 / trials as f64,
    })
}

/// `max_{i != j} |<x_i, x_j>|` over the rows of `x`.
pub(crate) fn max_abs_inner(x: &Matrix) -> f64 {
    let g = x * x.transpose();
    crate::linalg::max_off_diagonal(&g)
}
