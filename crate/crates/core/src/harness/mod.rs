//! Experiment configuration, data ingestion, runners and output files.

pub mod config;
pub mod data;
pub mod experiments;
pub mod lab;
pub mod output;

use std::path::PathBuf;

pub use config::{ExperimentConfig, ExperimentKind, ModelConfig, RegimeName};
pub use data::{ingest_returns_csv, ReturnsData};
pub use experiments::{run_build_set, run_portfolio_experiment, run_queue_experiment, run_set_geometry};
pub use lab::{run_guarantee_lab, GuaranteeReport};

use crate::error::{Error, Result};

/// Runs the configured experiment and writes its CSV files and manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let t = |name: &str, table: output::Table| (name.to_string(), table);
    let mut inputs = Vec::new();
    let (tables, files) = match cfg.experiment {
        ExperimentKind::Geometry => {
            let r = run_set_geometry(cfg)?;
            (vec![t("geometry", r.table)], vec![])
        }
        ExperimentKind::Portfolio => {
            let r = run_portfolio_experiment(cfg)?;
            (vec![t("table", r.table), t("runs", r.runs)], vec![])
        }
        ExperimentKind::Queue => {
            let r = run_queue_experiment(cfg)?;
            (vec![t("table", r.table), t("bands", r.bands), t("validity", r.validity), t("runs", r.runs)], vec![])
        }
        ExperimentKind::GuaranteeLab => {
            let r = run_guarantee_lab(cfg)?;
            (vec![t("summary", r.summary_table()), t("runs", r.runs_table())], vec![])
        }
        ExperimentKind::BuildSet => {
            if let ModelConfig::ReturnsCsv { path, .. } = &cfg.model {
                inputs.push(path.clone());
            }
            let r = run_build_set(cfg)?;
            let files = r
                .sets
                .iter()
                .map(|(reg, set)| {
                    let bytes = serde_json::to_vec_pretty(set).map_err(|e| Error::Data(e.to_string()))?;
                    Ok((format!("set_{}.json", reg.label()), bytes))
                })
                .collect::<Result<Vec<_>>>()?;
            (vec![t("intervals", r.table)], files)
        }
    };
    output::write_outputs(cfg, &tables, &files, &inputs)
}
