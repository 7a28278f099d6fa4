use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Samples at or below this size get exact p-values under [`PValueMethod::Auto`].
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    /// `x` tends to exceed `y`.
    Greater,
    /// `x` tends to fall below `y`.
    Less,
}

impl std::str::FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            _ => Err(Error::Unknown {
                kind: "alternative",
                name: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    /// Exact up to [`EXACT_LIMIT`] nonzero differences, normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    /// Nonzero differences used.
    pub n_used: usize,
    pub zeros_dropped: usize,
    /// `exact` or `normal`.
    pub method: PValueMethod,
    pub zero_handling: String,
    pub tie_handling: String,
}

/// One-sided Wilcoxon signed-rank test on `x - y`.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(x, y, alternative, PValueMethod::Auto)
}

pub fn wilcoxon_signed_rank_with(x: &[f64], y: &[f64], alternative: Alternative, method: PValueMethod) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("paired differences"));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let m = nonzero.len();
    if m == 0 {
        return Err(Error::UndefinedTest("all paired differences are zero".into()));
    }
    let (doubled_ranks, tie_sizes) = doubled_average_ranks(&nonzero);
    let w2: u64 = nonzero
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let statistic = w2 as f64 / 2.0;
    let use_exact = match method {
        PValueMethod::Auto => m <= EXACT_LIMIT,
        PValueMethod::Exact => true,
        PValueMethod::Normal => false,
    };
    let p_value = if use_exact {
        exact_p(&doubled_ranks, w2, alternative)
    } else {
        normal_p(m, &tie_sizes, statistic, alternative)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        alternative,
        n_used: m,
        zeros_dropped: diffs.len() - m,
        method: if use_exact { PValueMethod::Exact } else { PValueMethod::Normal },
        zero_handling: "reduced-sample".into(),
        tie_handling: "average-ranks".into(),
    })
}

/// Twice the average rank of each `|d|` (always an integer), plus the tie-group sizes.
fn doubled_average_ranks(d: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0u64; d.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && d[idx[end]].abs() == d[idx[start]].abs() {
            end += 1;
        }
        // Ranks start+1..=end; twice their mean is start + end + 1.
        let doubled = (start + end + 1) as u64;
        for &i in &idx[start..end] {
            ranks[i] = doubled;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Exact tail probability over all `2^m` equally likely sign assignments,
/// counted by a subset-sum recursion on the doubled ranks.
fn exact_p(doubled_ranks: &[u64], observed: u64, alternative: Alternative) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all: f64 = counts.iter().sum();
    let tail: f64 = match alternative {
        Alternative::Greater => counts[observed as usize..].iter().sum(),
        Alternative::Less => counts[..=observed as usize].iter().sum(),
    };
    tail / all
}

fn normal_p(m: usize, tie_sizes: &[usize], w: f64, alternative: Alternative) -> f64 {
    let mf = m as f64;
    let mean = mf * (mf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let sd = (mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term).sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    match alternative {
        Alternative::Greater => std_normal.sf((w - mean - 0.5) / sd),
        Alternative::Less => std_normal.cdf((w - mean + 0.5) / sd),
    }
}
