use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::ParametricModel;
use crate::copulas::{CopulaSpec, DependenceRegime};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BuildSet,
    Geometry,
    Portfolio,
    Queue,
    GuaranteeLab,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::BuildSet => "build_set",
            ExperimentKind::Geometry => "geometry",
            ExperimentKind::Portfolio => "portfolio",
            ExperimentKind::Queue => "queue",
            ExperimentKind::GuaranteeLab => "guarantee_lab",
        }
    }
}

/// Regimes selectable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Independent,
    /// Tail-positive with the independence copula as lower bound on `[0, 1]^d`.
    TailPositiveProduct,
    CentralDomain,
    NoAssumption,
}

impl RegimeName {
    pub const ALL: [RegimeName; 4] =
        [RegimeName::Independent, RegimeName::TailPositiveProduct, RegimeName::CentralDomain, RegimeName::NoAssumption];

    pub fn regime(&self, d: usize) -> DependenceRegime {
        match self {
            RegimeName::Independent => DependenceRegime::Independent,
            RegimeName::TailPositiveProduct => {
                DependenceRegime::TailPositive { lower: CopulaSpec::Independence { dim: d }, beta: 0.0 }
            }
            RegimeName::CentralDomain => DependenceRegime::CentralDomain,
            RegimeName::NoAssumption => DependenceRegime::NoAssumption,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegimeName::Independent => "independent",
            RegimeName::TailPositiveProduct => "tail_positive_product",
            RegimeName::CentralDomain => "central_domain",
            RegimeName::NoAssumption => "no_assumption",
        }
    }
}

/// Data-generating model of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    /// `d` independent two-point assets with `θ_i = (1 + i/(d+1))/2`,
    /// fitted with Beta pseudo-counts `(prior_up, prior_down)`.
    TwoPointAssets {
        #[serde(default = "default_assets")]
        d: usize,
        #[serde(default = "default_prior")]
        prior_up: f64,
        #[serde(default = "default_prior")]
        prior_down: f64,
    },
    /// Exponential services and Poisson interarrivals, both given by their means.
    Queue {
        #[serde(default = "default_service")]
        service_mean: f64,
        #[serde(default = "default_interarrival")]
        interarrival_mean: f64,
        #[serde(default = "default_customers")]
        customers: usize,
    },
    /// Observed returns with one marginal model per column.
    ReturnsCsv {
        path: PathBuf,
        #[serde(default = "default_marginal")]
        marginal: ParametricModel,
    },
}

fn default_assets() -> usize {
    20
}
fn default_prior() -> f64 {
    2.0
}
fn default_service() -> f64 {
    2.0
}
fn default_interarrival() -> f64 {
    3.05
}
fn default_customers() -> usize {
    10
}
fn default_marginal() -> ParametricModel {
    ParametricModel::Normal
}
fn default_regimes() -> Vec<RegimeName> {
    vec![RegimeName::Independent, RegimeName::NoAssumption]
}
fn default_mc_draws() -> usize {
    1_000_000
}
fn default_eval_draws() -> usize {
    100_000
}
fn default_oos() -> usize {
    50
}
fn default_directions() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelConfig,
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub eps: f64,
    pub eps_bar: f64,
    pub alpha: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<RegimeName>,
    /// Draws for the true percentile of a solved portfolio.
    #[serde(default = "default_mc_draws")]
    pub mc_draws: usize,
    /// Draws for true-law checks (queue median, chance-constraint frequency).
    #[serde(default = "default_eval_draws")]
    pub eval_draws: usize,
    /// Fresh draws for the out-of-sample worst-case return.
    #[serde(default = "default_oos")]
    pub out_of_sample: usize,
    /// Sampled unit directions for Hausdorff distances between non-box sets.
    #[serde(default = "default_directions")]
    pub directions: usize,
}

impl ExperimentConfig {
    /// Defaults that reproduce the standard runs of each experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let assets = ModelConfig::TwoPointAssets { d: 20, prior_up: 2.0, prior_down: 2.0 };
        let base = ExperimentConfig {
            experiment: kind,
            model: assets,
            sizes: vec![500, 2000],
            repeats: 100,
            eps: 0.1,
            eps_bar: 0.5,
            alpha: 0.1,
            seed: 20_240_601,
            out_dir: PathBuf::from("out").join(kind.name()),
            regimes: default_regimes(),
            mc_draws: default_mc_draws(),
            eval_draws: default_eval_draws(),
            out_of_sample: default_oos(),
            directions: default_directions(),
        };
        match kind {
            ExperimentKind::Geometry => ExperimentConfig { sizes: vec![10, 50, 500], repeats: 1, ..base },
            ExperimentKind::Portfolio => base,
            ExperimentKind::Queue => ExperimentConfig {
                model: ModelConfig::Queue { service_mean: 2.0, interarrival_mean: 3.05, customers: 10 },
                sizes: vec![100, 1000, 10_000],
                ..base
            },
            ExperimentKind::GuaranteeLab => ExperimentConfig {
                sizes: vec![100, 1000, 10_000],
                repeats: 50,
                regimes: vec![RegimeName::Independent],
                ..base
            },
            ExperimentKind::BuildSet => ExperimentConfig {
                sizes: vec![500],
                repeats: 1,
                regimes: vec![RegimeName::Independent],
                ..base
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|n| *n < 2) {
            return bad("sizes must be a nonempty list of sample sizes >= 2".into());
        }
        for (name, v) in [("eps", self.eps), ("eps_bar", self.eps_bar), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.regimes.is_empty() {
            return bad("at least one regime is required".into());
        }
        if self.mc_draws == 0 || self.eval_draws == 0 || self.out_of_sample == 0 || self.directions == 0 {
            return bad("draw counts must be positive".into());
        }
        match &self.model {
            ModelConfig::TwoPointAssets { d, prior_up, prior_down } => {
                if *d == 0 || !(*prior_up > 0.0 && *prior_down > 0.0) {
                    return bad("two-point assets need d >= 1 and positive pseudo-counts".into());
                }
            }
            ModelConfig::Queue { service_mean, interarrival_mean, customers } => {
                if !(*service_mean > 0.0 && *interarrival_mean > 0.0) || *customers < 2 {
                    return bad("queue needs positive means and at least two customers".into());
                }
            }
            ModelConfig::ReturnsCsv { marginal, .. } => {
                if matches!(marginal, ParametricModel::TwoPointAsset { .. }) {
                    return bad("returns files are fitted with continuous marginals".into());
                }
            }
        }
        let queue_model = matches!(self.model, ModelConfig::Queue { .. });
        if (self.experiment == ExperimentKind::Queue) != queue_model {
            return bad(format!("experiment {} does not accept this model", self.experiment.name()));
        }
        if matches!(self.model, ModelConfig::ReturnsCsv { .. }) && self.experiment != ExperimentKind::BuildSet {
            return bad("returns files are only accepted by build_set".into());
        }
        Ok(())
    }
}
