//! Posterior modes, observed information and credible regions.
//!
//! Conjugate Dirichlet updates for finite-support data; Laplace
//! approximations (mode by BFGS, observed information by central
//! differences) for the continuous and two-point families.

use serde::{Deserialize, Serialize};

use crate::distributions::ParametricFamily;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse, Matrix};
use crate::optim::{bfgs, fd_gradient, fd_hessian, BfgsOptions};
use crate::special::{digamma, ln_gamma, normal_quantile};

/// Smallest admissible value for strictly positive parameters when clipping intervals.
pub const POSITIVE_FLOOR: f64 = 1e-9;

/// A (possibly unnormalized) log posterior over an open parameter set.
/// Points outside the parameter space return `-inf`.
pub trait LogPosterior {
    fn dim(&self) -> usize;
    fn log_density(&self, theta: &[f64]) -> f64;
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        fd_gradient(&|t| self.log_density(t), theta)
    }
}

/// Closure-backed log posterior with finite-difference gradient.
pub struct FnPosterior<F: Fn(&[f64]) -> f64> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> LogPosterior for FnPosterior<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, theta: &[f64]) -> f64 {
        (self.f)(theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosteriorKind {
    Dirichlet,
    Model { model: ParametricModel },
    Custom,
}

/// Posterior mode and observed information `I(θ̂)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mode: Vec<f64>,
    pub info: Matrix,
    pub kind: PosteriorKind,
    pub n_samples: usize,
}

/// Fit a Laplace approximation: maximize the log posterior from `init`, then
/// take the negative Hessian at the mode.
pub fn laplace_fit(lp: &dyn LogPosterior, init: &[f64]) -> Result<PosteriorSummary> {
    if init.len() != lp.dim() {
        return Err(Error::input(format!("initial point has length {}, expected {}", init.len(), lp.dim())));
    }
    if !lp.log_density(init).is_finite() {
        return Err(Error::domain("log posterior is not finite at the initial point"));
    }
    let f = |t: &[f64]| -lp.log_density(t);
    let g = |t: &[f64]| lp.gradient(t).into_iter().map(|v| -v).collect::<Vec<f64>>();
    let min = bfgs(&f, &g, init, &BfgsOptions::default())?;
    let info = observed_information(lp, &min.x)?;
    Ok(PosteriorSummary { mode: min.x, info, kind: PosteriorKind::Custom, n_samples: 0 })
}

/// Negative Hessian of the log posterior at `theta`, required positive definite.
pub fn observed_information(lp: &dyn LogPosterior, theta: &[f64]) -> Result<Matrix> {
    let g = |t: &[f64]| lp.gradient(t).into_iter().map(|v| -v).collect::<Vec<f64>>();
    let h = fd_hessian(&g, theta);
    let n = theta.len();
    for i in 0..n {
        for j in 0..n {
            if !h[(i, j)].is_finite() {
                return Err(Error::BoundaryMode(format!("information is not finite at {theta:?}")));
            }
        }
    }
    cholesky(&h).map_err(|_| Error::BoundaryMode(format!("information is not positive definite at {theta:?}")))?;
    Ok(h)
}

// ---------------------------------------------------------------------------
// Credible regions

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// How a total credibility budget `α` is split over `d` marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SplitRule {
    /// `1 - (1 - α)^(1/d)`: independent marginal posteriors.
    IndependentProduct,
    /// `α / d`.
    Bonferroni,
    /// `(1 - (1 - α)^(1/K)) / d_k` for a marginal in a block of size `d_k` out of `K` blocks.
    BlockProduct { blocks: usize, block_size: usize },
}

pub fn split_alpha(alpha: f64, d: usize, rule: SplitRule) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if d == 0 {
        return Err(Error::input("marginal count must be at least 1"));
    }
    Ok(match rule {
        SplitRule::IndependentProduct => -((-alpha).ln_1p() / d as f64).exp_m1(),
        SplitRule::Bonferroni => alpha / d as f64,
        SplitRule::BlockProduct { blocks, block_size } => {
            if blocks == 0 || block_size == 0 {
                return Err(Error::input("block counts must be positive"));
            }
            -((-alpha).ln_1p() / blocks as f64).exp_m1() / block_size as f64
        }
    })
}

/// A `(1 - α)` credible region for a parameter vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CredibleRegion {
    /// `{θ : ‖I^{1/2}(θ - center)‖ <= radius}`.
    Ellipsoid { center: Vec<f64>, info: Matrix, radius: f64, alpha: f64 },
    /// Coordinate box; `simplex` marks the side condition `Σθ = 1` for set builders.
    Box { center: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, simplex: bool, alpha: f64 },
    /// Cartesian product of per-marginal regions.
    Product { parts: Vec<CredibleRegion>, rule: SplitRule, alpha: f64 },
}

impl CredibleRegion {
    pub fn dim(&self) -> usize {
        match self {
            CredibleRegion::Ellipsoid { center, .. } | CredibleRegion::Box { center, .. } => center.len(),
            CredibleRegion::Product { parts, .. } => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            CredibleRegion::Ellipsoid { alpha, .. }
            | CredibleRegion::Box { alpha, .. }
            | CredibleRegion::Product { alpha, .. } => *alpha,
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            CredibleRegion::Ellipsoid { center, .. } | CredibleRegion::Box { center, .. } => center.clone(),
            CredibleRegion::Product { parts, .. } => parts.iter().flat_map(|p| p.center()).collect(),
        }
    }

    /// Whether the region carries the simplex side condition.
    pub fn simplex(&self) -> bool {
        matches!(self, CredibleRegion::Box { simplex: true, .. })
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        if theta.len() != self.dim() {
            return false;
        }
        match self {
            CredibleRegion::Ellipsoid { center, info, radius, .. } => {
                let diff: Vec<f64> = theta.iter().zip(center).map(|(a, b)| a - b).collect();
                info.quad_form(&diff).max(0.0).sqrt() <= radius + tol
            }
            CredibleRegion::Box { lower, upper, simplex, .. } => {
                let inside = theta.iter().zip(lower.iter().zip(upper)).all(|(t, (l, u))| *t >= l - tol && *t <= u + tol);
                inside && (!simplex || (theta.iter().sum::<f64>() - 1.0).abs() <= tol.max(1e-12))
            }
            CredibleRegion::Product { parts, .. } => {
                let mut off = 0;
                parts.iter().all(|p| {
                    let k = p.dim();
                    let ok = p.contains(&theta[off..off + k], tol);
                    off += k;
                    ok
                })
            }
        }
    }

    /// Smallest axis-aligned box containing the region.
    pub fn bounding_box(&self) -> Vec<Interval> {
        match self {
            CredibleRegion::Ellipsoid { center, info, radius, .. } => {
                let cov = spd_inverse(info).expect("ellipsoid information is positive definite");
                center
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let h = radius * cov[(k, k)].sqrt();
                        Interval::new(c - h, c + h)
                    })
                    .collect()
            }
            CredibleRegion::Box { lower, upper, .. } => {
                lower.iter().zip(upper).map(|(l, u)| Interval::new(*l, *u)).collect()
            }
            CredibleRegion::Product { parts, .. } => parts.iter().flat_map(|p| p.bounding_box()).collect(),
        }
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            CredibleRegion::Ellipsoid { info, radius, .. } => {
                let cov = spd_inverse(info).expect("ellipsoid information is positive definite");
                2.0 * radius * largest_eigenvalue(&cov).sqrt()
            }
            CredibleRegion::Box { lower, upper, .. } => {
                lower.iter().zip(upper).map(|(l, u)| (u - l) * (u - l)).sum::<f64>().sqrt()
            }
            CredibleRegion::Product { parts, .. } => parts.iter().map(|p| p.diameter().powi(2)).sum::<f64>().sqrt(),
        }
    }
}

fn largest_eigenvalue(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = a.mul_vec(&v);
        let norm = crate::linalg::norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let done = (norm - lambda).abs() <= 1e-14 * norm;
        lambda = norm;
        v = next;
        if done {
            break;
        }
    }
    lambda
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 {
        return Err(Error::DegenerateLevel);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `z_{1 - α/2}`.
pub fn two_sided_z(alpha: f64) -> f64 {
    normal_quantile(1.0 - 0.5 * alpha)
}

pub fn credible_ellipsoid(summary: &PosteriorSummary, alpha: f64) -> Result<CredibleRegion> {
    check_alpha(alpha)?;
    cholesky(&summary.info).map_err(|_| Error::BoundaryMode("information is not positive definite".into()))?;
    Ok(CredibleRegion::Ellipsoid {
        center: summary.mode.clone(),
        info: summary.info.clone(),
        radius: two_sided_z(alpha),
        alpha,
    })
}

// ---------------------------------------------------------------------------
// Dirichlet conjugacy

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPosterior {
    pub tau: Vec<f64>,
}

/// Conjugate update `τ = τ' + counts`. Labels are 0-based indices into the support.
pub fn posterior_dirichlet(prior: &[f64], labels: &[usize]) -> Result<DirichletPosterior> {
    if prior.is_empty() || prior.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::input("Dirichlet prior concentrations must be positive"));
    }
    let mut tau = prior.to_vec();
    for &l in labels {
        if l >= tau.len() {
            return Err(Error::input(format!("label {l} outside the support 0..{}", tau.len())));
        }
        tau[l] += 1.0;
    }
    Ok(DirichletPosterior { tau })
}

impl DirichletPosterior {
    pub fn n_categories(&self) -> usize {
        self.tau.len()
    }

    /// Unnormalized log density `Σ (τ_j - 1) ln θ_j` on the positive orthant.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        if theta.iter().any(|t| *t <= 0.0) {
            return f64::NEG_INFINITY;
        }
        self.tau.iter().zip(theta).map(|(t, x)| (t - 1.0) * x.ln()).sum()
    }

    /// Data count implied by the concentrations over a uniform prior.
    fn implied_count(&self) -> usize {
        let s: f64 = self.tau.iter().map(|t| t - 1.0).sum();
        s.max(0.0).round() as usize
    }
}

/// Posterior mode `(τ_j - 1)/(Στ - n)` and diagonal information `(τ_j - 1)/θ̂_j²`.
pub fn dirichlet_mode_info(post: &DirichletPosterior) -> Result<PosteriorSummary> {
    if let Some((j, t)) = post.tau.iter().enumerate().find(|(_, t)| **t <= 1.0) {
        return Err(Error::NoInteriorMode(format!("concentration tau[{j}] = {t} <= 1")));
    }
    let n = post.tau.len() as f64;
    let denom: f64 = post.tau.iter().sum::<f64>() - n;
    let mode: Vec<f64> = post.tau.iter().map(|t| (t - 1.0) / denom).collect();
    let diag: Vec<f64> = post.tau.iter().zip(&mode).map(|(t, m)| (t - 1.0) / (m * m)).collect();
    Ok(PosteriorSummary { mode, info: Matrix::diag(&diag), kind: PosteriorKind::Dirichlet, n_samples: post.implied_count() })
}

/// Per-coordinate box `θ̂_j ± z_{1-α'/2} θ̂_j / sqrt(τ_j - 1)` with `α' = 1 - (1-α)^(1/n)`,
/// clipped to `[0, 1]` and flagged with the simplex side condition.
pub fn credible_box_dirichlet(post: &DirichletPosterior, alpha: f64) -> Result<CredibleRegion> {
    check_alpha(alpha)?;
    let summary = dirichlet_mode_info(post)?;
    let a = split_alpha(alpha, post.tau.len(), SplitRule::IndependentProduct)?;
    let z = two_sided_z(a);
    let mut lower = Vec::with_capacity(post.tau.len());
    let mut upper = Vec::with_capacity(post.tau.len());
    for (t, m) in post.tau.iter().zip(&summary.mode) {
        let h = z * m / (t - 1.0).sqrt();
        lower.push((m - h).max(0.0));
        upper.push((m + h).min(1.0));
    }
    Ok(CredibleRegion::Box { center: summary.mode, lower, upper, simplex: true, alpha })
}

// ---------------------------------------------------------------------------
// Parametric likelihood models

/// Marginal observation models with their scalar parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ParametricModel {
    /// Two-point asset with `θ = P(up)`; Beta pseudo-counts `(prior_up, prior_down)`.
    TwoPointAsset { prior_up: f64, prior_down: f64 },
    /// Normal with unknown `(μ, σ)`.
    Normal,
    /// Normal with unknown `μ` and known `sd`.
    NormalMean { sd: f64 },
    /// Exponential with unknown mean.
    Exponential,
    /// Poisson with unknown mean.
    Poisson,
    /// Gamma with unknown `(shape, scale)`.
    Gamma,
}

impl ParametricModel {
    pub fn two_point(prior_up: f64, prior_down: f64) -> Self {
        ParametricModel::TwoPointAsset { prior_up, prior_down }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParametricModel::Normal | ParametricModel::Gamma => 2,
            _ => 1,
        }
    }

    /// Closed parameter box used to clip credible intervals.
    pub fn domain(&self) -> Vec<Interval> {
        let pos = Interval::new(POSITIVE_FLOOR, f64::INFINITY);
        match self {
            ParametricModel::TwoPointAsset { .. } => vec![Interval::new(POSITIVE_FLOOR, 1.0 - POSITIVE_FLOOR)],
            ParametricModel::Normal => vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY), pos],
            ParametricModel::NormalMean { .. } => vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)],
            ParametricModel::Exponential | ParametricModel::Poisson => vec![pos],
            ParametricModel::Gamma => vec![pos, pos],
        }
    }

    /// The distribution with parameter `theta`.
    pub fn family(&self, theta: &[f64]) -> Result<ParametricFamily> {
        if theta.len() != self.dim() {
            return Err(Error::input(format!("model takes {} parameters, got {}", self.dim(), theta.len())));
        }
        match self {
            ParametricModel::TwoPointAsset { .. } => ParametricFamily::two_point(theta[0]),
            ParametricModel::Normal => ParametricFamily::normal(theta[0], theta[1]),
            ParametricModel::NormalMean { sd } => ParametricFamily::normal(theta[0], *sd),
            ParametricModel::Exponential => ParametricFamily::exponential(theta[0]),
            ParametricModel::Poisson => ParametricFamily::poisson(theta[0]),
            ParametricModel::Gamma => ParametricFamily::gamma(theta[0], theta[1]),
        }
    }

    /// Log posterior of the parameters given i.i.d. observations.
    pub fn posterior(&self, samples: &[f64]) -> Result<ModelPosterior> {
        if samples.is_empty() {
            return Err(Error::input("no observations"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("observations must be finite".into()));
        }
        let positive_only = matches!(self, ParametricModel::Gamma);
        let nonneg_only = matches!(self, ParametricModel::Exponential | ParametricModel::Poisson);
        if positive_only && samples.iter().any(|x| *x <= 0.0) {
            return Err(Error::Data("gamma observations must be positive".into()));
        }
        if nonneg_only && samples.iter().any(|x| *x < 0.0) {
            return Err(Error::Data("observations must be nonnegative".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let m2 = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        let sum_ln = if positive_only { samples.iter().map(|x| x.ln()).sum() } else { 0.0 };
        let ups = samples.iter().filter(|x| **x > 0.0).count() as f64;
        Ok(ModelPosterior { model: self.clone(), n, mean, m2, sum_ln, ups })
    }

    /// Laplace fit of the parameter posterior.
    pub fn fit(&self, samples: &[f64]) -> Result<PosteriorSummary> {
        let post = self.posterior(samples)?;
        let init = post.initial_guess()?;
        let mut summary = laplace_fit(&post, &init)?;
        summary.kind = PosteriorKind::Model { model: self.clone() };
        summary.n_samples = samples.len();
        Ok(summary)
    }
}

/// Sufficient statistics plus model: a [`LogPosterior`] with analytic gradient.
#[derive(Debug, Clone)]
pub struct ModelPosterior {
    pub model: ParametricModel,
    n: f64,
    mean: f64,
    m2: f64,
    sum_ln: f64,
    ups: f64,
}

impl ModelPosterior {
    /// Closed-form mode (or moment estimate for the gamma) used to start the search.
    pub fn initial_guess(&self) -> Result<Vec<f64>> {
        let var = self.m2 / self.n;
        match &self.model {
            ParametricModel::TwoPointAsset { prior_up, prior_down } => {
                let a = self.ups + prior_up - 1.0;
                let b = self.n - self.ups + prior_down - 1.0;
                if a <= 0.0 || b <= 0.0 {
                    return Err(Error::NoInteriorMode(format!(
                        "two-point posterior has no interior mode ({} up of {})",
                        self.ups, self.n
                    )));
                }
                Ok(vec![a / (a + b)])
            }
            ParametricModel::Normal => {
                if var <= 0.0 {
                    return Err(Error::NoInteriorMode("observations have zero spread".into()));
                }
                Ok(vec![self.mean, var.sqrt()])
            }
            ParametricModel::NormalMean { .. } => Ok(vec![self.mean]),
            ParametricModel::Exponential | ParametricModel::Poisson => {
                if self.mean <= 0.0 {
                    return Err(Error::NoInteriorMode("all observations are zero".into()));
                }
                Ok(vec![self.mean])
            }
            ParametricModel::Gamma => {
                if var <= 0.0 {
                    return Err(Error::NoInteriorMode("observations have zero spread".into()));
                }
                Ok(vec![self.mean * self.mean / var, var / self.mean])
            }
        }
    }
}

impl LogPosterior for ModelPosterior {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn log_density(&self, t: &[f64]) -> f64 {
        let n = self.n;
        match &self.model {
            ParametricModel::TwoPointAsset { prior_up, prior_down } => {
                let th = t[0];
                if !(th > 0.0 && th < 1.0) {
                    return f64::NEG_INFINITY;
                }
                (self.ups + prior_up - 1.0) * th.ln() + (n - self.ups + prior_down - 1.0) * (-th).ln_1p()
            }
            ParametricModel::Normal => {
                let (mu, sd) = (t[0], t[1]);
                if sd <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ss = self.m2 + n * (self.mean - mu).powi(2);
                -n * sd.ln() - ss / (2.0 * sd * sd)
            }
            ParametricModel::NormalMean { sd } => -n * (self.mean - t[0]).powi(2) / (2.0 * sd * sd),
            ParametricModel::Exponential => {
                let m = t[0];
                if m <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                -n * m.ln() - n * self.mean / m
            }
            ParametricModel::Poisson => {
                let l = t[0];
                if l <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                n * self.mean * l.ln() - n * l
            }
            ParametricModel::Gamma => {
                let (a, s) = (t[0], t[1]);
                if a <= 0.0 || s <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (a - 1.0) * self.sum_ln - n * self.mean / s - n * ln_gamma(a) - n * a * s.ln()
            }
        }
    }

    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        let n = self.n;
        match &self.model {
            ParametricModel::TwoPointAsset { prior_up, prior_down } => {
                let th = t[0];
                vec![(self.ups + prior_up - 1.0) / th - (n - self.ups + prior_down - 1.0) / (1.0 - th)]
            }
            ParametricModel::Normal => {
                let (mu, sd) = (t[0], t[1]);
                let ss = self.m2 + n * (self.mean - mu).powi(2);
                vec![n * (self.mean - mu) / (sd * sd), -n / sd + ss / sd.powi(3)]
            }
            ParametricModel::NormalMean { sd } => vec![n * (self.mean - t[0]) / (sd * sd)],
            ParametricModel::Exponential => {
                let m = t[0];
                vec![-n / m + n * self.mean / (m * m)]
            }
            ParametricModel::Poisson => vec![n * self.mean / t[0] - n],
            ParametricModel::Gamma => {
                let (a, s) = (t[0], t[1]);
                vec![self.sum_ln - n * digamma(a) - n * s.ln(), n * self.mean / (s * s) - n * a / s]
            }
        }
    }
}

/// Marginal fit plus per-parameter credible intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalFit {
    pub summary: PosteriorSummary,
    pub intervals: Vec<Interval>,
    pub alpha: f64,
}

/// Per-parameter interval `θ̂_k ± z_{1-α/2} σ_k`, clipped to the model's domain,
/// where `σ_k² = (I^{-1})_kk` (equal to `1/I` for scalar parameters).
pub fn marginal_credible_interval(model: &ParametricModel, samples: &[f64], alpha: f64) -> Result<MarginalFit> {
    check_alpha(alpha)?;
    if samples.len() < 2 {
        return Err(Error::input("at least two observations are required"));
    }
    let summary = model.fit(samples)?;
    let intervals = intervals_from_summary(&summary, &model.domain(), alpha)?;
    Ok(MarginalFit { summary, intervals, alpha })
}

pub(crate) fn intervals_from_summary(summary: &PosteriorSummary, domain: &[Interval], alpha: f64) -> Result<Vec<Interval>> {
    let z = two_sided_z(alpha);
    let cov = spd_inverse(&summary.info).map_err(|_| Error::BoundaryMode("information is singular".into()))?;
    Ok(summary
        .mode
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let h = z * cov[(k, k)].sqrt();
            Interval::new((m - h).max(domain[k].lo), (m + h).min(domain[k].hi))
        })
        .collect())
}

/// Product of per-marginal boxes built at the split level of `rule`.
pub fn product_region(fits: &[MarginalFit], rule: SplitRule, alpha: f64) -> CredibleRegion {
    let parts = fits
        .iter()
        .map(|f| CredibleRegion::Box {
            center: f.summary.mode.clone(),
            lower: f.intervals.iter().map(|i| i.lo).collect(),
            upper: f.intervals.iter().map(|i| i.hi).collect(),
            simplex: false,
            alpha: f.alpha,
        })
        .collect();
    CredibleRegion::Product { parts, rule, alpha }
}
