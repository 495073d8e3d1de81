use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{draw_assets, sample_asset_columns};
use super::experiments::{fit_columns, regime_box, run_grid, run_source, true_box, two_point_setup};
use super::output::{num, Table};
use crate::error::Result;
use crate::robust_solver::{monte_carlo_returns, solve_portfolio};
use crate::uncertainty_sets::hausdorff_boxes;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuaranteeRecord {
    pub seed: u64,
    pub run: usize,
    pub n: usize,
    /// Every true parameter lies in its credible interval.
    pub covered: bool,
    /// Estimated `P(ξᵀx* >= v_in)` under the true law.
    pub p_hat: f64,
    pub implied: bool,
    pub v_in: f64,
    pub hausdorff: f64,
    /// Euclidean diameter of the parameter box.
    pub diameter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuaranteeSummary {
    pub n: usize,
    pub runs: usize,
    pub coverage: f64,
    pub implication: f64,
    pub median_hausdorff: f64,
    pub median_diameter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub seed: u64,
    pub summaries: Vec<GuaranteeSummary>,
    pub records: Vec<GuaranteeRecord>,
}

impl GuaranteeReport {
    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&["seed", "n", "runs", "coverage", "implication", "median_hausdorff", "median_diameter"]);
        for s in &self.summaries {
            t.push(vec![
                self.seed.to_string(),
                s.n.to_string(),
                s.runs.to_string(),
                num(s.coverage),
                num(s.implication),
                num(s.median_hausdorff),
                num(s.median_diameter),
            ]);
        }
        t
    }

    pub fn runs_table(&self) -> Table {
        let mut t = Table::new(&["seed", "run", "n", "covered", "p_hat", "implied", "v_in", "hausdorff", "diameter"]);
        for r in &self.records {
            t.push(vec![
                r.seed.to_string(),
                r.run.to_string(),
                r.n.to_string(),
                r.covered.to_string(),
                num(r.p_hat),
                r.implied.to_string(),
                num(r.v_in),
                num(r.hausdorff),
                num(r.diameter),
            ]);
        }
        t
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per run: credible coverage of the true parameters, whether the solved
/// portfolio meets the chance constraint under the true law, and the
/// distance between the built box and the box at the true parameters.
/// Uses the first configured regime.
pub fn run_guarantee_lab(cfg: &ExperimentConfig) -> Result<GuaranteeReport> {
    let (model, thetas) = two_point_setup(cfg)?;
    let regime = cfg.regimes[0];
    let truth = true_box(regime, &model, &thetas, cfg.eps)?;
    let truth_iv = truth.intervals().unwrap_or_default().to_vec();
    let records = run_grid(cfg)
        .into_par_iter()
        .map(|(n, run)| {
            let src = run_source(cfg.seed, n, run);
            let cols = sample_asset_columns(&thetas, n, &src.child(0));
            let fits = fit_columns(&model, &cols)?;
            let (set, specs) = regime_box(regime, &model, &fits, cfg.alpha, cfg.eps)?;
            let covered = specs.iter().zip(&thetas).all(|(s, t)| s.params[0].contains(*t, 0.0));
            let diameter = specs.iter().map(|s| s.params[0].width().powi(2)).sum::<f64>().sqrt();
            let sol = solve_portfolio(&set)?;
            let active: Vec<usize> = (0..thetas.len()).filter(|&i| sol.weights[i] > 1e-12).collect();
            let th: Vec<f64> = active.iter().map(|&i| thetas[i]).collect();
            let w: Vec<f64> = active.iter().map(|&i| sol.weights[i]).collect();
            let returns = monte_carlo_returns(|rng| draw_assets(&th, rng), &w, cfg.eval_draws, &src.child(3))?;
            let tol = 1e-12 * (1.0 + sol.v_in.abs());
            let p_hat = returns.iter().filter(|r| **r >= sol.v_in - tol).count() as f64 / returns.len() as f64;
            let hausdorff = hausdorff_boxes(set.intervals().unwrap_or_default(), &truth_iv);
            Ok(GuaranteeRecord {
                seed: cfg.seed,
                run,
                n,
                covered,
                p_hat,
                implied: p_hat >= 1.0 - cfg.eps,
                v_in: sol.v_in,
                hausdorff,
                diameter,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = cfg
        .sizes
        .iter()
        .map(|&n| {
            let sel: Vec<&GuaranteeRecord> = records.iter().filter(|r| r.n == n).collect();
            let k = sel.len() as f64;
            let mut h: Vec<f64> = sel.iter().map(|r| r.hausdorff).collect();
            let mut dm: Vec<f64> = sel.iter().map(|r| r.diameter).collect();
            GuaranteeSummary {
                n,
                runs: sel.len(),
                coverage: sel.iter().filter(|r| r.covered).count() as f64 / k,
                implication: sel.iter().filter(|r| r.implied).count() as f64 / k,
                median_hausdorff: median(&mut h),
                median_diameter: median(&mut dm),
            }
        })
        .collect();
    info!("guarantee lab: {} runs", records.len());
    Ok(GuaranteeReport { seed: cfg.seed, summaries, records })
}
