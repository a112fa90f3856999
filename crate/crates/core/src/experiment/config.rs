//! Scenario configuration files (TOML).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::measurement::{design_for_source, random_gaussian_kernel, MeasurementKernel};
use crate::montecarlo::SnrGrid;
use crate::source::{rotation_for_seed, ClassModel, GmmSource};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Random {
        m: usize,
        seed: u64,
        #[serde(default = "default_true")]
        normalized: bool,
    },
    Designed {
        m: usize,
    },
    /// Rows given inline.
    Explicit {
        rows: Vec<Vec<f64>>,
    },
}

impl KernelConfig {
    pub fn m(&self) -> usize {
        match self {
            Self::Random { m, .. } | Self::Designed { m } => *m,
            Self::Explicit { rows } => rows.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrConfig {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    /// Defaults to uniform when every class omits it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors are the columns of a seeded random orthogonal matrix; the
    /// identity when absent. Classes sharing a seed share eigenvectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub dim: usize,
    pub trials: u64,
    pub seed: u64,
    pub kernel: KernelConfig,
    pub snr: SnrConfig,
    pub classes: Vec<ClassConfig>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Which kernel family a run should use, overriding the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Random,
    Designed,
}

/// Command-line style overrides applied on top of a config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<usize>,
    pub kernel: Option<KernelChoice>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub snr: Option<SnrConfig>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Checks everything that can be checked without building matrices, then
    /// builds the source once so its own validation runs too.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(config_err("dim must be at least 1"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.kernel.m() == 0 {
            return Err(config_err("kernel must have at least one measurement"));
        }
        if let KernelConfig::Explicit { rows } = &self.kernel {
            if rows.iter().any(|r| r.len() != self.dim) {
                return Err(config_err(format!("explicit kernel rows must have length {}", self.dim)));
            }
        }
        self.snr_grid()?;
        if self.classes.len() < 2 {
            return Err(config_err("at least two classes are required"));
        }
        let with_prior = self.classes.iter().filter(|c| c.prior.is_some()).count();
        if with_prior != 0 && with_prior != self.classes.len() {
            return Err(config_err("give a prior for every class or for none"));
        }
        for (c, class) in self.classes.iter().enumerate() {
            if class.eigenvalues.len() != self.dim {
                return Err(config_err(format!(
                    "class {} has {} eigenvalues, dim is {}",
                    c + 1,
                    class.eigenvalues.len(),
                    self.dim
                )));
            }
            if class.mean.as_ref().is_some_and(|m| m.len() != self.dim) {
                return Err(config_err(format!("class {} mean has the wrong length", c + 1)));
            }
        }
        self.build_source().map_err(|e| config_err(e.to_string()))?;
        Ok(())
    }

    pub fn snr_grid(&self) -> Result<SnrGrid> {
        SnrGrid::range(self.snr.start_db, self.snr.stop_db, self.snr.step_db).map_err(|e| config_err(e.to_string()))
    }

    pub fn build_source(&self) -> Result<GmmSource> {
        let uniform = 1.0 / self.classes.len() as f64;
        let classes = self
            .classes
            .iter()
            .map(|c| {
                let mean = c.mean.as_ref().map_or_else(|| Vector::zeros(self.dim), |m| Vector::from_column_slice(m));
                let rotation = c.rotation_seed.map(|s| rotation_for_seed(self.dim, s)).transpose()?;
                ClassModel::from_eigenvalues(c.prior.unwrap_or(uniform), mean, &c.eigenvalues, rotation.as_ref())
            })
            .collect::<Result<_>>()?;
        GmmSource::new(classes)
    }

    pub fn build_kernel(&self, src: &GmmSource) -> Result<MeasurementKernel> {
        match &self.kernel {
            KernelConfig::Random { m, seed, normalized } => random_gaussian_kernel(*m, self.dim, *seed, *normalized),
            KernelConfig::Designed { m } => design_for_source(src, *m),
            KernelConfig::Explicit { rows } => MeasurementKernel::explicit(Mat::from_row_iterator(
                rows.len(),
                self.dim,
                rows.iter().flatten().copied(),
            )),
        }
    }

    /// Applies overrides and revalidates. Switching to a random kernel keeps the
    /// configured kernel seed if there is one and otherwise uses the run seed.
    pub fn with_overrides(&self, o: &Overrides) -> Result<Self> {
        let mut cfg = self.clone();
        let m = o.m.unwrap_or_else(|| self.kernel.m());
        let kernel_seed = match &self.kernel {
            KernelConfig::Random { seed, .. } => *seed,
            _ => self.seed,
        };
        let normalized = match &self.kernel {
            KernelConfig::Random { normalized, .. } => *normalized,
            _ => true,
        };
        cfg.kernel = match (o.kernel, &self.kernel) {
            (Some(KernelChoice::Random), _) | (None, KernelConfig::Random { .. }) => {
                KernelConfig::Random { m, seed: kernel_seed, normalized }
            }
            (Some(KernelChoice::Designed), _) | (None, KernelConfig::Designed { .. }) => KernelConfig::Designed { m },
            (None, KernelConfig::Explicit { rows }) => {
                if o.m.is_some_and(|m| m != rows.len()) {
                    return Err(config_err("cannot change M of an explicit kernel"));
                }
                self.kernel.clone()
            }
        };
        if let Some(t) = o.trials {
            cfg.trials = t;
        }
        if let Some(s) = o.seed {
            cfg.seed = s;
        }
        if let Some(snr) = o.snr {
            cfg.snr = snr;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `A:B:STEP` into an SNR range.
pub fn parse_snr_range(text: &str) -> Result<SnrConfig> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, s] = parts.as_slice() else {
        return Err(config_err(format!("SNR range `{text}` is not of the form A:B:STEP")));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| config_err(format!("`{x}` is not a number")));
    let snr = SnrConfig { start_db: num(a)?, stop_db: num(b)?, step_db: num(s)? };
    SnrGrid::range(snr.start_db, snr.stop_db, snr.step_db).map_err(|e| config_err(e.to_string()))?;
    Ok(snr)
}
