use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelConfig, RegimeName};
use super::data::{asset_thetas, draw_assets, ingest_returns_csv, sample_asset_columns};
use super::output::{num, Table};
use crate::bayes::{intervals_from_summary, split_alpha, Interval, ParametricModel, PosteriorSummary};
use crate::distributions::{ParametricFamily, RandomSource};
use crate::error::{Error, Result};
use crate::queueing::{bayes_waiting_bound, kingman_from_samples, simulate_queue, QueueModel};
use crate::robust_solver::{deviation_metrics, lower_order_statistic, monte_carlo_percentile, solve_portfolio};
use crate::uncertainty_sets::{build_coordinate_box, MarginalSpec, UncertaintySet};

/// Stream of run `run` at sample size `n`; children 0, 1, 2, ... split it
/// further by purpose.
pub fn run_source(seed: u64, n: usize, run: usize) -> RandomSource {
    RandomSource::new(seed, ((n as u64) << 32) | run as u64)
}

/// All `(size, run)` pairs of a config, in output order.
pub(crate) fn run_grid(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.sizes.iter().flat_map(|&n| (0..cfg.repeats).map(move |r| (n, r))).collect()
}

pub(crate) fn two_point_setup(cfg: &ExperimentConfig) -> Result<(ParametricModel, Vec<f64>)> {
    match &cfg.model {
        ModelConfig::TwoPointAssets { d, prior_up, prior_down } => {
            Ok((ParametricModel::two_point(*prior_up, *prior_down), asset_thetas(*d)))
        }
        _ => Err(Error::Config(format!("experiment {} needs the two-point asset model", cfg.experiment.name()))),
    }
}

/// Laplace fit of each column.
pub fn fit_columns(model: &ParametricModel, columns: &[Vec<f64>]) -> Result<Vec<PosteriorSummary>> {
    columns.iter().map(|c| model.fit(c)).collect()
}

/// Coordinate box for a regime from per-column fits, with the credibility
/// level split across coordinates by the regime's rule.
pub fn regime_box(
    regime: RegimeName,
    model: &ParametricModel,
    fits: &[PosteriorSummary],
    alpha: f64,
    eps: f64,
) -> Result<(UncertaintySet, Vec<MarginalSpec>)> {
    let d = fits.len();
    let reg = regime.regime(d);
    let a = split_alpha(alpha, d, reg.split_rule())?;
    let specs = fits
        .iter()
        .map(|s| MarginalSpec::new(model.clone(), intervals_from_summary(s, &model.domain(), a)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((build_coordinate_box(&reg, &specs, eps)?, specs))
}

/// The same construction at known parameters.
pub fn true_box(regime: RegimeName, model: &ParametricModel, thetas: &[f64], eps: f64) -> Result<UncertaintySet> {
    let specs = thetas.iter().map(|t| MarginalSpec::point(model.clone(), &[*t])).collect::<Result<Vec<_>>>()?;
    build_coordinate_box(&regime.regime(thetas.len()), &specs, eps)
}

fn sorted_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

// ---------------------------------------------------------------------------
// Set geometry

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryRecord {
    pub seed: u64,
    pub run: usize,
    pub n: usize,
    pub regime: RegimeName,
    pub intervals: Vec<Interval>,
    pub true_intervals: Vec<Interval>,
}

pub struct GeometryResult {
    pub records: Vec<GeometryRecord>,
    pub table: Table,
}

/// Boxes per regime, sample size and run; the table keeps the first and last
/// coordinates next to the boxes at the true parameters.
pub fn run_set_geometry(cfg: &ExperimentConfig) -> Result<GeometryResult> {
    let (model, thetas) = two_point_setup(cfg)?;
    let d = thetas.len();
    let truth = cfg
        .regimes
        .iter()
        .map(|r| Ok((*r, true_box(*r, &model, &thetas, cfg.eps)?)))
        .collect::<Result<Vec<_>>>()?;
    let per_run = run_grid(cfg)
        .into_par_iter()
        .map(|(n, run)| {
            let src = run_source(cfg.seed, n, run);
            let cols = sample_asset_columns(&thetas, n, &src.child(0));
            let fits = fit_columns(&model, &cols)?;
            truth
                .iter()
                .map(|(r, t)| {
                    let (set, _) = regime_box(*r, &model, &fits, cfg.alpha, cfg.eps)?;
                    Ok(GeometryRecord {
                        seed: cfg.seed,
                        run,
                        n,
                        regime: *r,
                        intervals: set.intervals().unwrap_or_default().to_vec(),
                        true_intervals: t.intervals().unwrap_or_default().to_vec(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<GeometryRecord> = per_run.into_iter().flatten().collect();
    let mut table = Table::new(&["seed", "run", "n", "regime", "coordinate", "theta_true", "lo", "hi", "true_lo", "true_hi"]);
    for r in &records {
        for k in [0, d - 1] {
            table.push(vec![
                r.seed.to_string(),
                r.run.to_string(),
                r.n.to_string(),
                r.regime.label().into(),
                (k + 1).to_string(),
                num(thetas[k]),
                num(r.intervals[k].lo),
                num(r.intervals[k].hi),
                num(r.true_intervals[k].lo),
                num(r.true_intervals[k].hi),
            ]);
        }
    }
    info!("geometry: {} boxes", records.len());
    Ok(GeometryResult { records, table })
}

// ---------------------------------------------------------------------------
// Portfolio

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioRecord {
    pub seed: u64,
    pub run: usize,
    pub n: usize,
    pub regime: RegimeName,
    pub weights: Vec<f64>,
    pub v_in: f64,
    pub v_out: f64,
    pub r_star: f64,
}

pub struct PortfolioResult {
    pub records: Vec<PortfolioRecord>,
    pub table: Table,
    pub runs: Table,
}

/// True `ε`-percentile of `ξᵀx`: exact for a single asset, Monte Carlo over
/// the assets with nonzero weight otherwise.
pub fn true_percentile(thetas: &[f64], x: &[f64], eps: f64, draws: usize, src: &RandomSource) -> Result<f64> {
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 1e-12).collect();
    if let [i] = active[..] {
        return Ok(x[i] * ParametricFamily::two_point(thetas[i])?.lower_var(eps)?);
    }
    let th: Vec<f64> = active.iter().map(|&i| thetas[i]).collect();
    let w: Vec<f64> = active.iter().map(|&i| x[i]).collect();
    monte_carlo_percentile(|rng| draw_assets(&th, rng), &w, eps, draws, src)
}

pub fn run_portfolio_experiment(cfg: &ExperimentConfig) -> Result<PortfolioResult> {
    let (model, thetas) = two_point_setup(cfg)?;
    let per_run = run_grid(cfg)
        .into_par_iter()
        .map(|(n, run)| {
            let src = run_source(cfg.seed, n, run);
            let cols = sample_asset_columns(&thetas, n, &src.child(0));
            let fits = fit_columns(&model, &cols)?;
            let fresh = sample_asset_columns(&thetas, cfg.out_of_sample, &src.child(1));
            cfg.regimes
                .iter()
                .map(|r| {
                    let (set, _) = regime_box(*r, &model, &fits, cfg.alpha, cfg.eps)?;
                    let sol = solve_portfolio(&set)?;
                    let returns: Vec<f64> = (0..cfg.out_of_sample)
                        .map(|k| fresh.iter().zip(&sol.weights).map(|(c, w)| c[k] * w).sum())
                        .collect();
                    let v_out = lower_order_statistic(&returns, cfg.eps)?;
                    let r_star = true_percentile(&thetas, &sol.weights, cfg.eps, cfg.mc_draws, &src.child(2))?;
                    Ok(PortfolioRecord { seed: cfg.seed, run, n, regime: *r, weights: sol.weights, v_in: sol.v_in, v_out, r_star })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<PortfolioRecord> = per_run.into_iter().flatten().collect();

    let mut runs = Table::new(&["seed", "run", "n", "regime", "top_asset", "v_in", "v_out", "r_star", "d", "rel_d"]);
    for r in &records {
        let top = (0..r.weights.len()).max_by(|&a, &b| r.weights[a].total_cmp(&r.weights[b]).then(b.cmp(&a))).unwrap_or(0);
        let (dev, rel) = deviation_metrics(r.v_in, r.r_star);
        runs.push(vec![
            r.seed.to_string(),
            r.run.to_string(),
            r.n.to_string(),
            r.regime.label().into(),
            (top + 1).to_string(),
            num(r.v_in),
            num(r.v_out),
            num(r.r_star),
            num(dev),
            rel.map(num).unwrap_or_else(|_| "nan".into()),
        ]);
    }
    let mut table = Table::new(&["seed", "method", "n", "runs", "v_in", "v_out"]);
    for regime in &cfg.regimes {
        for &n in &cfg.sizes {
            let sel: Vec<&PortfolioRecord> = records.iter().filter(|r| r.regime == *regime && r.n == n).collect();
            let k = sel.len() as f64;
            table.push(vec![
                cfg.seed.to_string(),
                regime.label().into(),
                n.to_string(),
                sel.len().to_string(),
                num(sel.iter().map(|r| r.v_in).sum::<f64>() / k),
                num(sel.iter().map(|r| r.v_out).sum::<f64>() / k),
            ]);
        }
    }
    info!("portfolio: {} solves", records.len());
    Ok(PortfolioResult { records, table, runs })
}

// ---------------------------------------------------------------------------
// Queue

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueueRecord {
    pub seed: u64,
    pub run: usize,
    pub n: usize,
    pub bayes: f64,
    pub kingman: f64,
}

pub struct QueueResult {
    pub records: Vec<QueueRecord>,
    /// Median of the last customer's wait under the true model.
    pub true_median: f64,
    pub table: Table,
    pub bands: Table,
    pub validity: Table,
    pub runs: Table,
}

pub fn queue_model(cfg: &ExperimentConfig) -> Result<QueueModel> {
    match cfg.model {
        ModelConfig::Queue { service_mean, interarrival_mean, customers } => {
            let m = QueueModel { service_mean, interarrival_mean, customers, eps_bar: cfg.eps_bar };
            m.validate()?;
            Ok(m)
        }
        _ => Err(Error::Config("queue experiment needs the queue model".into())),
    }
}

pub fn run_queue_experiment(cfg: &ExperimentConfig) -> Result<QueueResult> {
    let model = queue_model(cfg)?;
    let service = model.service()?;
    let inter = model.interarrival()?;
    let records = run_grid(cfg)
        .into_par_iter()
        .map(|(n, run)| {
            let src = run_source(cfg.seed, n, run);
            let x = service.sample(n, &src.child(0))?;
            let t = inter.sample(n, &src.child(1))?;
            let bayes = bayes_waiting_bound(&model, &x, &t, cfg.alpha)?.value;
            let kingman = kingman_from_samples(&x, &t, cfg.eps_bar)?.value;
            Ok(QueueRecord { seed: cfg.seed, run, n, bayes, kingman })
        })
        .collect::<Result<Vec<_>>>()?;
    let waits = simulate_queue(&model, cfg.eval_draws, &RandomSource::new(cfg.seed, u64::MAX))?;
    let true_median = lower_order_statistic(&waits, 1.0 - cfg.eps_bar)?;

    let mut table = Table::new(&["seed", "method", "n", "runs", "q10", "mean", "q90", "sd"]);
    let mut bands = Table::new(&["seed", "n", "runs", "method", "mean", "q10", "q90"]);
    let mut validity = Table::new(&["seed", "n", "runs", "method", "true_quantile", "coverage"]);
    for (label, pick) in [("bayes_box", 0usize), ("kingman", 1)] {
        for &n in &cfg.sizes {
            let vals: Vec<f64> =
                records.iter().filter(|r| r.n == n).map(|r| if pick == 0 { r.bayes } else { r.kingman }).collect();
            let (mean, sd) = sorted_sd(&vals);
            let q10 = lower_order_statistic(&vals, 0.1)?;
            let q90 = lower_order_statistic(&vals, 0.9)?;
            let cover = vals.iter().filter(|v| **v >= true_median).count() as f64 / vals.len() as f64;
            let (seed, runs) = (cfg.seed.to_string(), vals.len().to_string());
            table.push(vec![seed.clone(), label.into(), n.to_string(), runs.clone(), num(q10), num(mean), num(q90), num(sd)]);
            bands.push(vec![seed.clone(), n.to_string(), runs.clone(), label.into(), num(mean), num(q10), num(q90)]);
            validity.push(vec![seed, n.to_string(), runs, label.into(), num(true_median), num(cover)]);
        }
    }
    let mut runs = Table::new(&["seed", "run", "n", "bayes_box", "kingman"]);
    for r in &records {
        runs.push(vec![r.seed.to_string(), r.run.to_string(), r.n.to_string(), num(r.bayes), num(r.kingman)]);
    }
    info!("queue: {} resamples, true quantile {true_median}", records.len());
    Ok(QueueResult { records, true_median, table, bands, validity, runs })
}

// ---------------------------------------------------------------------------
// Single set construction

pub struct BuildSetResult {
    pub sets: Vec<(RegimeName, UncertaintySet)>,
    pub names: Vec<String>,
    pub table: Table,
}

/// Boxes per configured regime from a returns file or from one synthetic
/// sample of the asset model at the first configured size.
pub fn run_build_set(cfg: &ExperimentConfig) -> Result<BuildSetResult> {
    let (model, names, cols) = match &cfg.model {
        ModelConfig::ReturnsCsv { path, marginal } => {
            let data = ingest_returns_csv(path)?;
            let cols: Vec<Vec<f64>> = (0..data.dim()).map(|k| data.column(k)).collect();
            (marginal.clone(), data.names, cols)
        }
        ModelConfig::TwoPointAssets { .. } => {
            let (model, thetas) = two_point_setup(cfg)?;
            let n = cfg.sizes[0];
            let cols = sample_asset_columns(&thetas, n, &run_source(cfg.seed, n, 0).child(0));
            let names = (1..=thetas.len()).map(|i| format!("asset_{i}")).collect();
            (model, names, cols)
        }
        ModelConfig::Queue { .. } => return Err(Error::Config("build_set does not accept the queue model".into())),
    };
    let fits = fit_columns(&model, &cols)?;
    let n = cols.first().map_or(0, Vec::len);
    let mut table = Table::new(&["seed", "run", "n", "regime", "coordinate", "name", "level", "lo", "hi"]);
    let mut sets = Vec::new();
    for r in &cfg.regimes {
        let (set, _) = regime_box(*r, &model, &fits, cfg.alpha, cfg.eps)?;
        if let (Some(ivs), crate::uncertainty_sets::SetKind::CoordinateBox { levels, .. }) = (set.intervals(), &set.kind) {
            for (k, iv) in ivs.iter().enumerate() {
                table.push(vec![
                    cfg.seed.to_string(),
                    "0".into(),
                    n.to_string(),
                    r.label().into(),
                    (k + 1).to_string(),
                    names[k].clone(),
                    num(levels[k]),
                    num(iv.lo),
                    num(iv.hi),
                ]);
            }
        }
        sets.push((*r, set));
    }
    Ok(BuildSetResult { sets, names, table })
}
