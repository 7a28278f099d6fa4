use std::collections::HashSet;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kernels::KernelSpec;
use crate::optim::{Method, Stage, StepPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub n: usize,
    pub p: usize,
    pub noise_sd: f64,
    pub sq_norm_range: [f64; 2],
    pub n_test: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            n: 10,
            p: 100,
            noise_sd: 0.1,
            sq_norm_range: [0.49, 1.0],
            n_test: 5,
        }
    }
}

/// A named optimiser schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub name: String,
    pub method: Method,
    pub stages: Vec<Stage>,
    /// Require the step sizes to fall inside the planner's feasible ranges for each instance.
    #[serde(default)]
    pub theorem_compliant: bool,
}

impl SchemeConfig {
    pub fn new(name: &str, method: Method, stages: &[(f64, usize)]) -> Self {
        SchemeConfig {
            name: name.into(),
            method,
            stages: stages.iter().map(|&(eta, steps)| Stage { eta, steps }).collect(),
            theorem_compliant: false,
        }
    }

    pub fn plan(&self) -> StepPlan {
        StepPlan {
            method: self.method,
            stages: self.stages.clone(),
            theorem_compliant: self.theorem_compliant,
            feasibility: None,
        }
    }

    pub fn total_steps(&self) -> usize {
        self.stages.iter().map(|s| s.steps).sum()
    }
}

/// `name:method:eta x steps,eta x steps[,...]`, e.g. `sgd-moderate:sgd:0.1x50,0.01x1000`.
/// A trailing `:compliant` sets `theorem_compliant`.
impl FromStr for SchemeConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse scheme '{s}' (expected name:method:ETAxSTEPS,...)"));
        let parts: Vec<&str> = s.split(':').collect();
        let (name, method, stages, compliant) = match parts.as_slice() {
            [name, method, stages] => (name, method, stages, false),
            [name, method, stages, "compliant"] => (name, method, stages, true),
            _ => return Err(bad()),
        };
        if name.is_empty() {
            return Err(bad());
        }
        let stages = stages
            .split(',')
            .map(|st| {
                let (eta, steps) = st.split_once('x').ok_or_else(bad)?;
                Ok(Stage {
                    eta: eta.trim().parse().map_err(|_| bad())?,
                    steps: steps.trim().parse().map_err(|_| bad())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SchemeConfig {
            name: name.to_string(),
            method: method.parse()?,
            stages,
            theorem_compliant: compliant,
        })
    }
}

impl std::fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let stages: Vec<String> = self.stages.iter().map(|s| format!("{}x{}", s.eta, s.steps)).collect();
        write!(f, "{}:{}:{}", self.name, self.method, stages.join(","))?;
        if self.theorem_compliant {
            f.write_str(":compliant")?;
        }
        Ok(())
    }
}

/// Parse `a..b` (half-open) or a comma-separated list of seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |e: String| Error::InvalidParameter(format!("cannot parse seeds '{s}': {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let b: u64 = b.trim().parse().map_err(|e| bad(format!("{e}")))?;
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|e| bad(format!("{e}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub kernel: KernelSpec,
    pub schemes: Vec<SchemeConfig>,
    pub seeds: Vec<u64>,
    pub record_every: usize,
    /// Where per-run CSVs and `batch.json` go; nothing is written when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Synthetic sine regression with four schedules: moderate and small steps for SGD and GD.
    pub fn sine_study_default() -> Self {
        ExperimentConfig {
            data: DataConfig::default(),
            kernel: KernelSpec::default_polynomial(),
            schemes: vec![
                SchemeConfig::new("sgd-moderate", Method::Sgd, &[(0.1, 50), (0.01, 1000)]),
                SchemeConfig::new("gd-moderate", Method::Gd, &[(0.5, 50), (0.05, 1000)]),
                SchemeConfig::new("sgd-small", Method::Sgd, &[(0.01, 1050)]),
                SchemeConfig::new("gd-small", Method::Gd, &[(0.05, 1050)]),
            ],
            seeds: (0..20).collect(),
            record_every: 1,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if d.n < 2 || d.p == 0 || d.n_test == 0 {
            return Err(Error::InvalidParameter("need n >= 2, p >= 1 and n_test >= 1".into()));
        }
        self.kernel.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(Error::InvalidParameter("seeds must be distinct".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("no schemes configured".into()));
        }
        let mut names = HashSet::new();
        for s in &self.schemes {
            if !names.insert(s.name.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate scheme name '{}'", s.name)));
            }
            s.plan().validate()?;
        }
        Ok(())
    }
}
