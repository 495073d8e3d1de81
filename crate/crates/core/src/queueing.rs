//! Single-server queue: waiting times by the double max or the Lindley
//! recursion, a credible-interval bound on a waiting-time quantile, and
//! Kingman's bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{marginal_credible_interval, Interval, ParametricModel};
use crate::distributions::{ParametricFamily, RandomSource};
use crate::error::{Error, Result};

/// Exponential service times with mean `service_mean`, Poisson interarrival
/// times with mean `interarrival_mean`, `customers` arrivals, budget `eps_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueModel {
    pub service_mean: f64,
    pub interarrival_mean: f64,
    pub customers: usize,
    pub eps_bar: f64,
}

impl Default for QueueModel {
    fn default() -> Self {
        QueueModel { service_mean: 2.0, interarrival_mean: 3.05, customers: 10, eps_bar: 0.5 }
    }
}

impl QueueModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.service_mean > 0.0 && self.interarrival_mean > 0.0) {
            return Err(Error::input("queue means must be positive"));
        }
        if self.customers < 2 {
            return Err(Error::input("the queue needs at least two customers"));
        }
        if !(self.eps_bar > 0.0 && self.eps_bar < 1.0) {
            return Err(Error::domain(format!("eps_bar must lie in (0, 1), got {}", self.eps_bar)));
        }
        Ok(())
    }

    pub fn service(&self) -> Result<ParametricFamily> {
        ParametricFamily::exponential(self.service_mean)
    }

    pub fn interarrival(&self) -> Result<ParametricFamily> {
        ParametricFamily::poisson(self.interarrival_mean)
    }

    /// Per-term VaR levels `(1 - sqrt(1 - ε̄/n), 1 - sqrt(1 - ε̄/(n-1)))`.
    pub fn levels(&self) -> (f64, f64) {
        let n = self.customers as f64;
        (half_split(self.eps_bar / n), half_split(self.eps_bar / (n - 1.0)))
    }
}

/// `1 - sqrt(1 - p)`.
fn half_split(p: f64) -> f64 {
    -(0.5 * (-p).ln_1p()).exp_m1()
}

/// `max(0, max_j (Σ_{l=j}^{n-1} x_l - Σ_{l=j+1}^{n} t_l))` with `x = (x_1..x_{n-1})`
/// and `t = (t_2..t_n)`.
pub fn simulate_waiting_time(x: &[f64], t: &[f64]) -> Result<f64> {
    if x.len() != t.len() {
        return Err(Error::input(format!("{} service times but {} interarrival times", x.len(), t.len())));
    }
    let mut best = 0.0f64;
    let mut tail = 0.0;
    for j in (0..x.len()).rev() {
        tail += x[j] - t[j];
        best = best.max(tail);
    }
    Ok(best)
}

/// `W_{k+1} = max(0, W_k + x_k - t_{k+1})` from `W_1 = 0`.
pub fn lindley(x: &[f64], t: &[f64]) -> Result<f64> {
    if x.len() != t.len() {
        return Err(Error::input(format!("{} service times but {} interarrival times", x.len(), t.len())));
    }
    Ok(x.iter().zip(t).fold(0.0f64, |w, (xk, tk)| (w + xk - tk).max(0.0)))
}

/// Waiting times of the last customer over `runs` independent queues.
pub fn simulate_queue(model: &QueueModel, runs: usize, src: &RandomSource) -> Result<Vec<f64>> {
    model.validate()?;
    let service = model.service()?;
    let inter = model.interarrival()?;
    let m = model.customers - 1;
    const SHARD: usize = 4096;
    let shards = runs.div_ceil(SHARD);
    let parts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = src.child(s as u64).rng();
            let count = SHARD.min(runs - s * SHARD);
            (0..count)
                .map(|_| {
                    let x = service.sample_with(m, &mut rng)?;
                    let t = inter.sample_with(m, &mut rng)?;
                    lindley(&x, &t)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(parts.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    BayesBox,
    Kingman,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueueBoundReport {
    pub method: BoundMethod,
    pub value: f64,
    /// Credible interval for the service mean (BayesBox only).
    pub service_interval: Option<Interval>,
    /// Credible interval for the interarrival mean (BayesBox only).
    pub interarrival_interval: Option<Interval>,
    pub n_samples: usize,
}

/// `(n-1)(VaR_{ε_x}(x̃ | θ_r) - lower VaR_{ε_t}(t̃ | θ_l))`, clamped at zero,
/// with `θ_r` the upper service endpoint and `θ_l` the lower interarrival
/// endpoint of credible intervals at `α' = 1 - sqrt(1 - α)`.
pub fn bayes_waiting_bound(model: &QueueModel, service: &[f64], interarrival: &[f64], alpha: f64) -> Result<QueueBoundReport> {
    model.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let a = half_split(alpha);
    let sfit = marginal_credible_interval(&ParametricModel::Exponential, service, a)?;
    let tfit = marginal_credible_interval(&ParametricModel::Poisson, interarrival, a)?;
    let (theta_r, theta_l) = (sfit.intervals[0].hi, tfit.intervals[0].lo);
    let value = waiting_bound_at(model, theta_r, theta_l)?;
    Ok(QueueBoundReport {
        method: BoundMethod::BayesBox,
        value,
        service_interval: Some(sfit.intervals[0]),
        interarrival_interval: Some(tfit.intervals[0]),
        n_samples: service.len().min(interarrival.len()),
    })
}

/// The closed-form bound at given parameter values.
pub fn waiting_bound_at(model: &QueueModel, service_mean: f64, interarrival_mean: f64) -> Result<f64> {
    let (ex, et) = model.levels();
    let x = ParametricFamily::exponential(service_mean)?.var(ex)?;
    let t = ParametricFamily::poisson(interarrival_mean)?.lower_var(et)?;
    Ok(((model.customers - 1) as f64 * (x - t)).max(0.0))
}

/// `μ_x (σ_t² μ_x² + σ_x² μ_t²) / (2 ε̄ μ_t² (μ_t - μ_x))`.
pub fn kingman_bound(mu_x: f64, var_x: f64, mu_t: f64, var_t: f64, eps_bar: f64) -> Result<f64> {
    if !(eps_bar > 0.0 && eps_bar < 1.0) {
        return Err(Error::domain(format!("eps_bar must lie in (0, 1), got {eps_bar}")));
    }
    if mu_t <= mu_x {
        return Err(Error::Instability { service: mu_x, interarrival: mu_t });
    }
    Ok(mu_x * (var_t * mu_x * mu_x + var_x * mu_t * mu_t) / (2.0 * eps_bar * mu_t * mu_t * (mu_t - mu_x)))
}

/// Kingman's bound at sample means and (unbiased) sample variances.
pub fn kingman_from_samples(service: &[f64], interarrival: &[f64], eps_bar: f64) -> Result<QueueBoundReport> {
    let (mx, vx) = mean_var(service)?;
    let (mt, vt) = mean_var(interarrival)?;
    Ok(QueueBoundReport {
        method: BoundMethod::Kingman,
        value: kingman_bound(mx, vx, mt, vt, eps_bar)?,
        service_interval: None,
        interarrival_interval: None,
        n_samples: service.len().min(interarrival.len()),
    })
}

fn mean_var(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::input("at least two observations are required"));
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
    Ok((m, v))
}
