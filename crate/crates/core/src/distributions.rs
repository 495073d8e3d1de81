//! Univariate parametric families with CDF, quantile, VaR/CVaR and sampling,
//! plus finite-support multivariate laws projected onto directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma_p, gamma_q, ln_gamma, normal_cdf, normal_pdf, normal_quantile};

/// Tolerance used when comparing cumulative sums of discrete masses against a level.
const MASS_TOL: f64 = 1e-12;
/// Poisson support is truncated once the PMF falls below this past the mode.
const POISSON_PMF_CUTOFF: f64 = 1e-16;

/// Deterministic random stream: identical `(seed, stream)` pairs replay identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomSource { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent child stream, e.g. one per Monte Carlo task.
    pub fn child(&self, k: u64) -> RandomSource {
        RandomSource { seed: splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5851_f42d))), stream: k }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A univariate parametric distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParametricFamily {
    /// Finite support with probabilities on the simplex.
    FiniteDiscrete { points: Vec<f64>, probs: Vec<f64> },
    /// Mean-zero, unit-variance two-point return: `up` with probability `theta`, `down` otherwise.
    TwoPointAsset { theta: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { mean: f64 },
    Poisson { mean: f64 },
    Gamma { shape: f64, scale: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_level(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must lie in (0, 1), got {p}")))
    }
}

fn check_tail(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tail probability must lie in (0, 1], got {eps}")))
    }
}

/// Up and down values of the two-point asset with parameter `theta`.
pub fn two_point_values(theta: f64) -> (f64, f64) {
    let s = ((1.0 - theta) * theta).sqrt();
    (s / theta, -s / (1.0 - theta))
}

impl ParametricFamily {
    pub fn finite_discrete(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let f = ParametricFamily::FiniteDiscrete { points, probs };
        f.validate()?;
        Ok(f)
    }

    pub fn two_point(theta: f64) -> Result<Self> {
        let f = ParametricFamily::TwoPointAsset { theta };
        f.validate()?;
        Ok(f)
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let f = ParametricFamily::Normal { mean, sd };
        f.validate()?;
        Ok(f)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        let f = ParametricFamily::Exponential { mean };
        f.validate()?;
        Ok(f)
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        let f = ParametricFamily::Poisson { mean };
        f.validate()?;
        Ok(f)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        let f = ParametricFamily::Gamma { shape, scale };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParametricFamily::FiniteDiscrete { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(Error::domain("finite support needs matching, nonempty points and probabilities"));
                }
                if points.iter().any(|x| !x.is_finite()) {
                    return Err(Error::domain("support points must be finite"));
                }
                check_simplex(probs)
            }
            ParametricFamily::TwoPointAsset { theta } => {
                if *theta > 0.0 && *theta < 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("two-point parameter must lie in (0, 1), got {theta}")))
                }
            }
            ParametricFamily::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::domain("normal mean must be finite"));
                }
                positive("normal sd", *sd)
            }
            ParametricFamily::Exponential { mean } => positive("exponential mean", *mean),
            ParametricFamily::Poisson { mean } => positive("poisson mean", *mean),
            ParametricFamily::Gamma { shape, scale } => {
                positive("gamma shape", *shape)?;
                positive("gamma scale", *scale)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            ParametricFamily::FiniteDiscrete { .. } | ParametricFamily::TwoPointAsset { .. } | ParametricFamily::Poisson { .. }
        )
    }

    /// Sorted atoms `(value, mass)` of a discrete family (Poisson truncated).
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ParametricFamily::FiniteDiscrete { points, probs } => {
                let mut a: Vec<(f64, f64)> = points.iter().copied().zip(probs.iter().copied()).collect();
                a.sort_by(|x, y| x.0.total_cmp(&y.0));
                Some(a)
            }
            ParametricFamily::TwoPointAsset { theta } => {
                let (up, down) = two_point_values(*theta);
                Some(vec![(down, 1.0 - theta), (up, *theta)])
            }
            ParametricFamily::Poisson { mean } => Some(poisson_atoms(*mean)),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ParametricFamily::FiniteDiscrete { points, probs } => points.iter().zip(probs).map(|(x, p)| x * p).sum(),
            ParametricFamily::TwoPointAsset { .. } => 0.0,
            ParametricFamily::Normal { mean, .. } => *mean,
            ParametricFamily::Exponential { mean } => *mean,
            ParametricFamily::Poisson { mean } => *mean,
            ParametricFamily::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ParametricFamily::FiniteDiscrete { points, probs } => {
                let m = self.mean();
                points.iter().zip(probs).map(|(x, p)| p * (x - m) * (x - m)).sum()
            }
            ParametricFamily::TwoPointAsset { .. } => 1.0,
            ParametricFamily::Normal { sd, .. } => sd * sd,
            ParametricFamily::Exponential { mean } => mean * mean,
            ParametricFamily::Poisson { mean } => *mean,
            ParametricFamily::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ParametricFamily::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            ParametricFamily::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            ParametricFamily::Gamma { shape, scale } => gamma_p(*shape, x / scale),
            ParametricFamily::Poisson { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    gamma_q(x.floor() + 1.0, *mean)
                }
            }
            _ => {
                let atoms = self.atoms().expect("discrete family");
                atoms.iter().filter(|(v, _)| *v <= x).map(|(_, w)| w).sum::<f64>().min(1.0)
            }
        }
    }

    /// Log density (log mass for discrete families); `-inf` off the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            ParametricFamily::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                normal_pdf(z).ln() - sd.ln()
            }
            ParametricFamily::Exponential { mean } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -mean.ln() - x / mean
                }
            }
            ParametricFamily::Gamma { shape, scale } => {
                if x < 0.0 || (x == 0.0 && *shape > 1.0) {
                    f64::NEG_INFINITY
                } else {
                    (shape - 1.0) * x.ln() - x / scale - ln_gamma(*shape) - shape * scale.ln()
                }
            }
            ParametricFamily::Poisson { mean } => {
                if x < 0.0 || x.fract() != 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x * mean.ln() - mean - ln_gamma(x + 1.0)
                }
            }
            _ => {
                let atoms = self.atoms().expect("discrete family");
                let m: f64 = atoms.iter().filter(|(v, _)| *v == x).map(|(_, w)| w).sum();
                m.ln()
            }
        }
    }

    /// Smallest `t` with `CDF(t) >= p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_level(p, "probability")?;
        self.validate()?;
        Ok(match self {
            ParametricFamily::Normal { mean, sd } => mean + sd * normal_quantile(p),
            ParametricFamily::Exponential { mean } => -mean * (-p).ln_1p(),
            ParametricFamily::Gamma { shape, scale } => gamma_quantile(*shape, *scale, p),
            _ => discrete_quantile(&self.atoms().expect("discrete family"), p),
        })
    }

    /// `VaR_eps`: the `(1 - eps)`-quantile, `eps` being the upper-tail mass.
    pub fn var(&self, eps: f64) -> Result<f64> {
        check_level(eps, "tail probability")?;
        self.quantile(1.0 - eps)
    }

    /// `-VaR_eps(-X)`: the largest `t` with `P(X >= t) >= 1 - eps`.
    pub fn lower_var(&self, eps: f64) -> Result<f64> {
        check_level(eps, "tail probability")?;
        self.validate()?;
        Ok(match self {
            ParametricFamily::Normal { mean, sd } => mean + sd * normal_quantile(eps),
            ParametricFamily::Exponential { mean } => -mean * (-eps).ln_1p(),
            ParametricFamily::Gamma { shape, scale } => gamma_quantile(*shape, *scale, eps),
            _ => -discrete_quantile(&negate(&self.atoms().expect("discrete family")), 1.0 - eps),
        })
    }

    /// `CVaR_eps = min_t { t + E[(X - t)^+] / eps }`; equals the mean at `eps = 1`.
    pub fn cvar(&self, eps: f64) -> Result<f64> {
        check_tail(eps)?;
        self.validate()?;
        if eps == 1.0 {
            return Ok(self.mean());
        }
        Ok(match self {
            ParametricFamily::Normal { mean, sd } => mean + sd * normal_pdf(normal_quantile(1.0 - eps)) / eps,
            ParametricFamily::Exponential { mean } => mean * (1.0 - eps.ln()),
            ParametricFamily::Gamma { shape, scale } => gamma_cvar(*shape, *scale, eps)?,
            ParametricFamily::Poisson { mean } => {
                let atoms = poisson_atoms(*mean);
                let q = discrete_quantile(&atoms, 1.0 - eps);
                // E[(X-q)^+] = E[X] - q + E[(q-X)^+], the last sum being finite.
                let below: f64 = atoms.iter().filter(|(v, _)| *v < q).map(|(v, w)| w * (q - v)).sum();
                q + (mean - q + below).max(0.0) / eps
            }
            _ => discrete_cvar(&self.atoms().expect("discrete family"), eps),
        })
    }

    /// `-CVaR_eps(-X)`: the mean of the lowest `eps` fraction of the distribution.
    pub fn lower_cvar(&self, eps: f64) -> Result<f64> {
        check_tail(eps)?;
        self.validate()?;
        if eps == 1.0 {
            return Ok(self.mean());
        }
        Ok(match self {
            ParametricFamily::Normal { mean, sd } => mean - sd * normal_pdf(normal_quantile(eps)) / eps,
            ParametricFamily::Exponential { mean } => mean * (1.0 + (1.0 - eps) * (-eps).ln_1p() / eps),
            ParametricFamily::Gamma { shape, scale } => {
                let q = gamma_quantile(*shape, *scale, eps);
                shape * scale * gamma_p(shape + 1.0, q / scale) / eps
            }
            _ => -discrete_cvar(&negate(&self.atoms().expect("discrete family")), eps),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ParametricFamily::FiniteDiscrete { points, probs } => points[sample_index(probs, rng)],
            ParametricFamily::TwoPointAsset { theta } => {
                let (up, down) = two_point_values(*theta);
                if rng.random::<f64>() < *theta {
                    up
                } else {
                    down
                }
            }
            ParametricFamily::Normal { mean, sd } => rand_distr::Normal::new(*mean, *sd).expect("validated").sample(rng),
            ParametricFamily::Exponential { mean } => rand_distr::Exp::new(1.0 / mean).expect("validated").sample(rng),
            ParametricFamily::Poisson { mean } => rand_distr::Poisson::new(*mean).expect("validated").sample(rng),
            ParametricFamily::Gamma { shape, scale } => {
                rand_distr::Gamma::new(*shape, *scale).expect("validated").sample(rng)
            }
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    /// `n` i.i.d. draws from a fresh generator for `src`.
    pub fn sample(&self, n: usize, src: &RandomSource) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::input("sample count must be at least 1"));
        }
        self.sample_with(n, &mut src.rng())
    }
}

pub(crate) fn check_simplex(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::domain("probabilities must be nonnegative"));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > MASS_TOL * (probs.len().max(1) as f64).max(1.0) {
        return Err(Error::domain(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// Index drawn with the given probabilities by inversion.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

fn negate(atoms: &[(f64, f64)]) -> Vec<(f64, f64)> {
    atoms.iter().rev().map(|(v, w)| (-v, *w)).collect()
}

fn discrete_quantile(atoms: &[(f64, f64)], p: f64) -> f64 {
    let mut cum = 0.0;
    for (v, w) in atoms {
        cum += w;
        if cum >= p - MASS_TOL {
            return *v;
        }
    }
    atoms.last().map(|a| a.0).unwrap_or(f64::NAN)
}

fn discrete_cvar(atoms: &[(f64, f64)], eps: f64) -> f64 {
    let q = discrete_quantile(atoms, 1.0 - eps);
    q + atoms.iter().map(|(v, w)| w * (v - q).max(0.0)).sum::<f64>() / eps
}

fn poisson_atoms(mean: f64) -> Vec<(f64, f64)> {
    let ln_mean = mean.ln();
    let mut out = Vec::new();
    let mut k = 0.0f64;
    loop {
        let pmf = (k * ln_mean - mean - ln_gamma(k + 1.0)).exp();
        if k > mean && pmf < POISSON_PMF_CUTOFF {
            break;
        }
        out.push((k, pmf));
        k += 1.0;
    }
    out
}

fn gamma_quantile(shape: f64, scale: f64, p: f64) -> f64 {
    // Bisection on the standardized CDF, using the upper tail above the median.
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    let below = |x: f64| {
        if upper {
            gamma_q(shape, x) > target
        } else {
            gamma_p(shape, x) < target
        }
    };
    let mut lo = 0.0;
    let mut hi = shape.max(1.0);
    while below(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    scale * 0.5 * (lo + hi)
}

/// Gamma CVaR `(s a / eps) * Q(a + 1, q / s)` with `q` the `(1 - eps)`-quantile.
pub fn gamma_cvar(shape: f64, scale: f64, eps: f64) -> Result<f64> {
    positive("gamma shape", shape)?;
    positive("gamma scale", scale)?;
    check_tail(eps)?;
    if eps == 1.0 {
        return Ok(shape * scale);
    }
    let q = gamma_quantile(shape, scale, 1.0 - eps);
    Ok(scale * shape / eps * gamma_q(shape + 1.0, q / scale))
}

/// Finite-support law on `R^d`: point `r_j` with probability `probs[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    pub points: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(points: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::domain("finite support needs matching, nonempty points and probabilities"));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::domain("support points must share a positive dimension"));
        }
        check_simplex(&probs)?;
        Ok(DiscreteLaw { points, probs })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Law of `vᵀ ξ`.
    pub fn project(&self, v: &[f64]) -> ParametricFamily {
        let points = self.points.iter().map(|r| crate::linalg::dot(r, v)).collect();
        ParametricFamily::FiniteDiscrete { points, probs: self.probs.clone() }
    }

    pub fn sample_labels<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| sample_index(&self.probs, rng)).collect()
    }
}
