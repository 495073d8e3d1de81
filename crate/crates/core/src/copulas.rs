//! Copulas, diagonal sections, the tail bound `B^{S,C_l}`, dependence regimes
//! and Gaussian-copula sampling.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::SplitRule;
use crate::distributions::{ParametricFamily, RandomSource};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_semidefinite, Matrix};
use crate::special::{normal_cdf, normal_quantile};

/// QMC lattice size for Gaussian copulas in more than two dimensions.
const QMC_POINTS: usize = 1 << 16;
const DIAGONAL_BISECTIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "copula", rename_all = "snake_case")]
pub enum CopulaSpec {
    /// `Π(u) = ∏ u_i`.
    Independence { dim: usize },
    /// `M(u) = min u_i`.
    UpperFrechet { dim: usize },
    /// `W(u) = (Σ u_i - d + 1)_+`.
    LowerBound { dim: usize },
    Gaussian { corr: Matrix },
    /// Product of copulas on a partition of the coordinates.
    BlockProduct { blocks: Vec<(Vec<usize>, CopulaSpec)> },
}

impl CopulaSpec {
    pub fn gaussian(corr: Matrix) -> Result<Self> {
        let c = CopulaSpec::Gaussian { corr };
        c.validate()?;
        Ok(c)
    }

    pub fn block_product(blocks: Vec<(Vec<usize>, CopulaSpec)>) -> Result<Self> {
        let c = CopulaSpec::BlockProduct { blocks };
        c.validate()?;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        match self {
            CopulaSpec::Independence { dim } | CopulaSpec::UpperFrechet { dim } | CopulaSpec::LowerBound { dim } => *dim,
            CopulaSpec::Gaussian { corr } => corr.rows(),
            CopulaSpec::BlockProduct { blocks } => blocks.iter().map(|(idx, _)| idx.len()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CopulaSpec::Independence { dim } | CopulaSpec::UpperFrechet { dim } | CopulaSpec::LowerBound { dim } => {
                if *dim == 0 {
                    return Err(Error::input("copula dimension must be positive"));
                }
            }
            CopulaSpec::Gaussian { corr } => {
                if !corr.is_square() || corr.rows() == 0 {
                    return Err(Error::input("correlation matrix must be square and nonempty"));
                }
                if corr.max_asymmetry() > 1e-12 {
                    return Err(Error::input("correlation matrix must be symmetric"));
                }
                for i in 0..corr.rows() {
                    if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                        return Err(Error::input("correlation matrix must have a unit diagonal"));
                    }
                }
                cholesky_semidefinite(corr, 1e-10)?;
            }
            CopulaSpec::BlockProduct { blocks } => {
                let d = self.dim();
                let mut seen = vec![false; d];
                for (idx, c) in blocks {
                    if idx.len() != c.dim() {
                        return Err(Error::input("block index set size differs from its copula dimension"));
                    }
                    c.validate()?;
                    for &i in idx {
                        if i >= d || seen[i] {
                            return Err(Error::input("block index sets must partition the coordinates"));
                        }
                        seen[i] = true;
                    }
                }
            }
        }
        Ok(())
    }

    /// Copula value at `u ∈ [0,1]^d`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::input(format!("point has dimension {}, copula has {}", u.len(), self.dim())));
        }
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::input("copula arguments must lie in [0, 1]"));
        }
        Ok(self.eval_unchecked(u))
    }

    fn eval_unchecked(&self, u: &[f64]) -> f64 {
        match self {
            CopulaSpec::Independence { .. } => u.iter().product(),
            CopulaSpec::UpperFrechet { .. } => u.iter().copied().fold(1.0, f64::min),
            CopulaSpec::LowerBound { .. } => frechet_lower(u),
            CopulaSpec::Gaussian { corr } => gaussian_copula_cdf(corr, u),
            CopulaSpec::BlockProduct { blocks } => blocks
                .iter()
                .map(|(idx, c)| {
                    let sub: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
                    c.eval_unchecked(&sub)
                })
                .product(),
        }
    }

    /// Diagonal section `δ(u) = C(u, ..., u)`.
    pub fn diagonal(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let d = self.dim();
        match self {
            CopulaSpec::Independence { .. } => u.powi(d as i32),
            CopulaSpec::UpperFrechet { .. } => u,
            CopulaSpec::LowerBound { .. } => (d as f64 * u - d as f64 + 1.0).max(0.0),
            CopulaSpec::BlockProduct { blocks } => blocks.iter().map(|(_, c)| c.diagonal(u)).product(),
            CopulaSpec::Gaussian { .. } => self.eval_unchecked(&vec![u; d]),
        }
    }

    /// Smallest `u` with `δ(u) >= y`, by bisection. The upper end of the final
    /// bracket is returned, so `δ(δ^{-1}(y)) >= y` holds exactly.
    pub fn diagonal_inverse(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::domain(format!("diagonal level must lie in [0, 1], got {y}")));
        }
        if self.diagonal(1.0) < y {
            return Err(Error::Unattainable(y));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..DIAGONAL_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if self.diagonal(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

pub fn frechet_lower(u: &[f64]) -> f64 {
    (u.iter().sum::<f64>() - u.len() as f64 + 1.0).max(0.0)
}

pub fn frechet_upper(u: &[f64]) -> f64 {
    u.iter().copied().fold(1.0, f64::min)
}

/// `max(W(u), max_{a ∈ S} {C_l(a) - Σ (a_i - u_i)_+})` over a finite grid `S`.
pub fn tail_bound(grid: &[Vec<f64>], lower: &CopulaSpec, u: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::input("tail bound grid must be nonempty"));
    }
    let mut best = frechet_lower(u);
    for a in grid {
        let penalty: f64 = a.iter().zip(u).map(|(ai, ui)| (ai - ui).max(0.0)).sum();
        best = best.max(lower.eval(a)? - penalty);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Dependence regimes

/// What is assumed about the dependence between coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum DependenceRegime {
    Independent,
    /// `C_Ξ >= lower` on `[beta, 1]^d`.
    TailPositive { lower: CopulaSpec, beta: f64 },
    /// A lower bound is known only on a set avoiding the upper `ε` corner.
    CentralDomain,
    NoAssumption,
}

impl DependenceRegime {
    pub fn name(&self) -> &'static str {
        match self {
            DependenceRegime::Independent => "independent",
            DependenceRegime::TailPositive { .. } => "tail_positive",
            DependenceRegime::CentralDomain => "central_domain",
            DependenceRegime::NoAssumption => "no_assumption",
        }
    }

    /// Per-coordinate risk level used by the box construction: a VaR level
    /// for the copula-based regimes and the CVaR level `ε` otherwise.
    pub fn coordinate_level(&self, eps: f64, d: usize) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
        }
        if d == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        match self {
            DependenceRegime::Independent => Ok(-((-eps).ln_1p() / d as f64).exp_m1()),
            DependenceRegime::TailPositive { lower, beta } => {
                if lower.dim() != d {
                    return Err(Error::input(format!("lower copula has dimension {}, expected {d}", lower.dim())));
                }
                if *beta > 1.0 - eps {
                    return Err(Error::HypothesisViolation(format!(
                        "tail dependence region starts at beta = {beta} > 1 - eps = {}",
                        1.0 - eps
                    )));
                }
                Ok(1.0 - lower.diagonal_inverse(1.0 - eps)?)
            }
            DependenceRegime::CentralDomain => Ok(eps / d as f64),
            DependenceRegime::NoAssumption => Ok(eps),
        }
    }

    /// How the overall credibility level is split across marginal intervals.
    /// Block-product lower copulas use the largest block size for every block.
    pub fn split_rule(&self) -> SplitRule {
        match self {
            DependenceRegime::Independent => SplitRule::IndependentProduct,
            DependenceRegime::TailPositive { lower: CopulaSpec::BlockProduct { blocks }, .. } => SplitRule::BlockProduct {
                blocks: blocks.len(),
                block_size: blocks.iter().map(|(idx, _)| idx.len()).max().unwrap_or(1),
            },
            _ => SplitRule::Bonferroni,
        }
    }

    /// Whether coordinates use CVaR (true) or VaR (false).
    pub fn uses_cvar(&self) -> bool {
        matches!(self, DependenceRegime::NoAssumption)
    }
}

// ---------------------------------------------------------------------------
// Gaussian copula

/// `P(X < h, Y < k)` for standard bivariate normals with correlation `r`.
pub fn bivariate_normal_cdf(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return normal_cdf(k);
    }
    if k == f64::INFINITY {
        return normal_cdf(h);
    }
    if r >= 1.0 {
        return normal_cdf(h.min(k));
    }
    if r <= -1.0 {
        return (normal_cdf(h) + normal_cdf(k) - 1.0).max(0.0);
    }
    bvnu(-h, -k, r).clamp(0.0, 1.0)
}

const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// Upper orthant probability `P(X > dh, Y > dk)` (Drezner–Wesolowsky with
/// Genz's Gauss–Legendre refinements).
fn bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let sn = (asr * (sgn * x + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (4.0 * PI) + normal_cdf(-h) * normal_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a * (-(bs / as_ + hk) / 2.0).exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * (2.0 * PI).sqrt() * normal_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let xs = (a * (sgn * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a * w * asr.exp() * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + normal_cdf(-h.max(k))
    } else {
        let mut out = -bvn;
        if k > h {
            if h < 0.0 {
                out += normal_cdf(k) - normal_cdf(h);
            } else {
                out += normal_cdf(-h) - normal_cdf(-k);
            }
        }
        out
    }
}

fn gaussian_copula_cdf(corr: &Matrix, u: &[f64]) -> f64 {
    if u.iter().any(|x| *x == 0.0) {
        return 0.0;
    }
    // Coordinates at 1 marginalize out.
    let keep: Vec<usize> = (0..u.len()).filter(|&i| u[i] < 1.0).collect();
    match keep.len() {
        0 => 1.0,
        1 => u[keep[0]],
        2 => {
            let (i, j) = (keep[0], keep[1]);
            bivariate_normal_cdf(normal_quantile(u[i]), normal_quantile(u[j]), corr[(i, j)])
        }
        m => {
            let mut sub = Matrix::zeros(m, m);
            for (a, &i) in keep.iter().enumerate() {
                for (b, &j) in keep.iter().enumerate() {
                    sub[(a, b)] = corr[(i, j)];
                }
            }
            let limits: Vec<f64> = keep.iter().map(|&i| normal_quantile(u[i])).collect();
            mvn_cdf_qmc(&sub, &limits)
        }
    }
}

/// `P(Z <= b)` for `Z ~ N(0, R)`, by Genz's separation of variables on a
/// baker-transformed Richtmyer lattice. A semidefinite `R` is regularized by
/// a tiny ridge so the sequential conditioning stays defined.
fn mvn_cdf_qmc(corr: &Matrix, b: &[f64]) -> f64 {
    let d = b.len();
    let l = match cholesky(corr) {
        Ok(l) => l,
        Err(_) => {
            let mut ridge = corr.clone();
            for i in 0..d {
                ridge[(i, i)] += 1e-10;
            }
            match cholesky(&ridge) {
                Ok(l) => l,
                Err(_) => return f64::NAN,
            }
        }
    };
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    let alpha: Vec<f64> = (0..d.saturating_sub(1))
        .map(|i| {
            let p = if i < PRIMES.len() { PRIMES[i] } else { (2 * i + 41) as f64 };
            p.sqrt().fract()
        })
        .collect();
    let mut total = 0.0;
    let mut y = vec![0.0; d];
    for n in 1..=QMC_POINTS {
        let mut e = normal_cdf(b[0] / l[(0, 0)]);
        let mut f = e;
        for i in 1..d {
            let w = (n as f64 * alpha[i - 1]).fract();
            let w = 1.0 - (2.0 * w - 1.0).abs();
            let p = (w * e).clamp(1e-300, 1.0 - 1e-16);
            y[i - 1] = normal_quantile(p);
            let s: f64 = (0..i).map(|j| l[(i, j)] * y[j]).sum();
            e = normal_cdf((b[i] - s) / l[(i, i)]);
            f *= e;
            if f == 0.0 {
                break;
            }
        }
        total += f;
    }
    total / QMC_POINTS as f64
}

/// Uniform scores `Φ(z)` with `z ~ N(0, R)`, one row per draw.
pub fn sample_gaussian_copula_uniforms<R: Rng + ?Sized>(corr: &Matrix, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let l = cholesky_semidefinite(corr, 1e-10)?;
    let d = corr.rows();
    let normal = rand_distr::StandardNormal;
    Ok((0..n)
        .map(|_| {
            let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(normal)).collect();
            l.mul_vec(&g).into_iter().map(normal_cdf).collect()
        })
        .collect())
}

/// Draws `(F_1^{-1}(Φ(z_1)), ..., F_d^{-1}(Φ(z_d)))` with `z ~ N(0, R)`.
pub fn sample_gaussian_copula(
    corr: &Matrix,
    marginals: &[ParametricFamily],
    n: usize,
    src: &RandomSource,
) -> Result<Vec<Vec<f64>>> {
    if marginals.len() != corr.rows() {
        return Err(Error::input(format!("{} marginals for a {}-dimensional copula", marginals.len(), corr.rows())));
    }
    let mut rng = src.rng();
    let uniforms = sample_gaussian_copula_uniforms(corr, n, &mut rng)?;
    uniforms
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(marginals)
                .map(|(u, f)| f.quantile(u.clamp(1e-16, 1.0 - 1e-16)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    /// `∫_{-∞}^{h} φ(x) Φ((k - r x)/sqrt(1 - r²)) dx` by composite Simpson.
    fn bvn_oracle(h: f64, k: f64, r: f64) -> f64 {
        let lo = -12.0f64;
        let hi = h.min(12.0);
        if hi <= lo {
            return 0.0;
        }
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let s = (1.0 - r * r).sqrt();
        let f = |x: f64| crate::special::normal_pdf(x) * normal_cdf((k - r * x) / s);
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * step;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * step / 3.0
    }

    #[test]
    fn bivariate_normal_against_quadrature() {
        for &r in &[-0.999, -0.97, -0.93, -0.8, -0.5, -0.1, 0.0, 0.2, 0.5, 0.74, 0.9, 0.95, 0.999] {
            for &(h, k) in &[(0.0, 0.0), (1.0, -0.5), (-1.5, -2.0), (2.0, 1.0), (-0.3, 0.8), (-3.0, 3.0)] {
                let got = bivariate_normal_cdf(h, k, r);
                let want = bvn_oracle(h, k, r);
                assert!((got - want).abs() < 1e-9, "h={h} k={k} r={r}: {got} vs {want}");
            }
        }
        assert!((bivariate_normal_cdf(0.0, 0.0, 0.5) - (0.25 + 0.5f64.asin() / (2.0 * PI))).abs() < 1e-14);
    }

    #[test]
    fn basic_copula_values() {
        let pi = CopulaSpec::Independence { dim: 2 };
        let w = CopulaSpec::LowerBound { dim: 2 };
        let m = CopulaSpec::UpperFrechet { dim: 2 };
        assert_eq!(pi.eval(&[0.5, 0.5]).unwrap(), 0.25);
        assert!((w.eval(&[0.7, 0.6]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(m.eval(&[0.7, 0.6]).unwrap(), 0.6);
        assert!(pi.eval(&[1.2, 0.5]).is_err());
        assert!((CopulaSpec::Independence { dim: 3 }.diagonal(0.9) - 0.729).abs() < 1e-15);
        assert!((w.diagonal(0.9) - 0.8).abs() < 1e-15);
        assert_eq!(m.diagonal(0.37), 0.37);
    }

    #[test]
    fn diagonal_inverses() {
        let pi = CopulaSpec::Independence { dim: 2 };
        assert!((pi.diagonal_inverse(0.9).unwrap() - 0.9f64.sqrt()).abs() < 1e-12);
        let w = CopulaSpec::LowerBound { dim: 2 };
        assert!((w.diagonal_inverse(0.9).unwrap() - 0.95).abs() < 1e-12);
        for d in 1..=20 {
            let w = CopulaSpec::LowerBound { dim: d };
            for &eps in &[0.01, 0.1, 0.5] {
                assert!((w.diagonal_inverse(1.0 - eps).unwrap() - (1.0 - eps / d as f64)).abs() < 1e-12);
            }
        }
        assert!(pi.diagonal_inverse(1.5).is_err());
        assert_eq!(w.diagonal_inverse(0.0).unwrap(), 0.0);
    }

    #[test]
    fn block_product_diagonal() {
        let c = CopulaSpec::block_product(vec![
            (vec![0, 2], CopulaSpec::UpperFrechet { dim: 2 }),
            (vec![1, 3, 4], CopulaSpec::Independence { dim: 3 }),
        ])
        .unwrap();
        for &u in &[0.1, 0.5, 0.93] {
            assert!((c.diagonal(u) - u * u.powi(3)).abs() < 1e-15);
            assert!((c.eval(&[u; 5]).unwrap() - c.diagonal(u)).abs() < 1e-15);
        }
        assert!(CopulaSpec::block_product(vec![(vec![0, 0], CopulaSpec::Independence { dim: 2 })]).is_err());
    }

    #[test]
    fn tail_bound_cases() {
        let pi = CopulaSpec::Independence { dim: 2 };
        let u = vec![0.95, 0.97];
        assert!((tail_bound(&[u.clone()], &pi, &u).unwrap() - pi.eval(&u).unwrap()).abs() < 1e-15);
        // Grid over [β,1]^2 with β ≤ 1 - ε and u in the upper ε corner: equals C_l(u).
        let beta = 0.8;
        let grid: Vec<Vec<f64>> = (0..=40)
            .flat_map(|i| (0..=40).map(move |j| vec![beta + (1.0 - beta) * i as f64 / 40.0, beta + (1.0 - beta) * j as f64 / 40.0]))
            .collect();
        for u in [vec![0.9, 0.9], vec![0.95, 0.905], vec![1.0, 0.9]] {
            let b = tail_bound(&grid, &pi, &u).unwrap();
            assert!((b - pi.eval(&u).unwrap()).abs() < 1e-12, "{u:?}");
        }
        // Grid strictly below u: brute force.
        let low: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![0.3, 0.3]];
        let u = vec![0.6, 0.7];
        let want = frechet_lower(&u).max(low.iter().map(|a| a[0] * a[1]).fold(f64::MIN, f64::max));
        assert!((tail_bound(&low, &pi, &u).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn regime_levels() {
        let eps = 0.1;
        let ind = DependenceRegime::Independent.coordinate_level(eps, 20).unwrap();
        let tp = DependenceRegime::TailPositive { lower: CopulaSpec::Independence { dim: 20 }, beta: 0.5 }
            .coordinate_level(eps, 20)
            .unwrap();
        assert!((ind - tp).abs() < 1e-12);
        assert!((DependenceRegime::CentralDomain.coordinate_level(eps, 20).unwrap() - 0.005).abs() < 1e-15);
        let bad = DependenceRegime::TailPositive { lower: CopulaSpec::Independence { dim: 2 }, beta: 0.95 };
        assert!(matches!(bad.coordinate_level(0.1, 2), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn gaussian_sampling() {
        let ones = Matrix::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let u = sample_gaussian_copula_uniforms(&ones, 1000, &mut rng).unwrap();
        assert!(u.iter().all(|r| (r[0] - r[1]).abs() < 1e-12 && (r[1] - r[2]).abs() < 1e-12));

        let bad = Matrix::from_rows(&[vec![1.0, 1.5], vec![1.5, 1.0]]).unwrap();
        assert!(matches!(sample_gaussian_copula_uniforms(&bad, 1, &mut rng), Err(Error::Decomposition(_))));

        let r = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let marg = vec![ParametricFamily::normal(0.0, 1.0).unwrap(), ParametricFamily::normal(0.0, 1.0).unwrap()];
        let xs = sample_gaussian_copula(&r, &marg, 1_000_000, &RandomSource::new(4, 0)).unwrap();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().map(|r| r[0]).sum::<f64>() / n, xs.iter().map(|r| r[1]).sum::<f64>() / n);
        let cov = xs.iter().map(|r| (r[0] - mx) * (r[1] - my)).sum::<f64>() / n;
        let vx = xs.iter().map(|r| (r[0] - mx).powi(2)).sum::<f64>() / n;
        let vy = xs.iter().map(|r| (r[1] - my).powi(2)).sum::<f64>() / n;
        assert!((cov / (vx * vy).sqrt() - 0.5).abs() < 0.01);
    }

    #[test]
    fn identity_correlation_gives_independent_quartiles() {
        let id = Matrix::identity(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let u = sample_gaussian_copula_uniforms(&id, 100_000, &mut rng).unwrap();
        let mut counts = [[0.0f64; 4]; 4];
        for r in &u {
            counts[((r[0] * 4.0) as usize).min(3)][((r[1] * 4.0) as usize).min(3)] += 1.0;
        }
        let expected = 100_000.0 / 16.0;
        let chi2: f64 = counts.iter().flatten().map(|c| (c - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 15 degrees of freedom (cell probabilities known).
        assert!(chi2 < 30.58, "chi2 = {chi2}");
    }

    #[test]
    fn gaussian_cdf_trivariate_against_bivariate_limit() {
        // With the third coordinate independent, the trivariate CDF factorizes.
        let r = Matrix::from_rows(&[vec![1.0, 0.4, 0.0], vec![0.4, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let c = CopulaSpec::gaussian(r).unwrap();
        let u = [0.3, 0.6, 0.8];
        let want = bivariate_normal_cdf(normal_quantile(0.3), normal_quantile(0.6), 0.4) * 0.8;
        assert!((c.eval(&u).unwrap() - want).abs() < 1e-3);
    }

    fn builtin(d: usize) -> Vec<CopulaSpec> {
        let mut corr = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    corr[(i, j)] = 0.3;
                }
            }
        }
        vec![
            CopulaSpec::Independence { dim: d },
            CopulaSpec::UpperFrechet { dim: d },
            CopulaSpec::LowerBound { dim: d },
            CopulaSpec::gaussian(corr).unwrap(),
        ]
    }

    #[test]
    fn frechet_sandwich_on_random_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 3] {
            let cops = builtin(d);
            let n = if d == 2 { 1000 } else { 60 };
            for _ in 0..n {
                let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let (w, m) = (frechet_lower(&u), frechet_upper(&u));
                for c in &cops {
                    let v = c.eval(&u).unwrap();
                    let tol = if matches!(c, CopulaSpec::Gaussian { .. }) && d > 2 { 1e-3 } else { 1e-9 };
                    assert!(v >= w - tol && v <= m + tol, "{c:?} at {u:?}: {v}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn lipschitz(a in prop::collection::vec(0.0..1.0f64, 2), u in prop::collection::vec(0.0..1.0f64, 2)) {
            for c in builtin(2) {
                let diff = (c.eval(&a).unwrap() - c.eval(&u).unwrap()).abs();
                let l1: f64 = a.iter().zip(&u).map(|(x, y)| (x - y).abs()).sum();
                prop_assert!(diff <= l1 + 1e-9);
            }
        }

        #[test]
        fn diagonal_right_inverse(y in 0.0..1.0f64, d in 1usize..8) {
            for c in [CopulaSpec::Independence { dim: d }, CopulaSpec::LowerBound { dim: d }, CopulaSpec::UpperFrechet { dim: d }] {
                let u = c.diagonal_inverse(y).unwrap();
                prop_assert!(c.diagonal(u) >= y);
                if y > 0.0 && u > 1e-9 {
                    prop_assert!(c.diagonal(u - 1e-9) < y);
                }
            }
        }

        #[test]
        fn lemma_dominance_comonotone_over_independence(u in prop::collection::vec(0.0..1.0f64, 2)) {
            // M >= Π everywhere, so M dominates the tail bound built from Π on any grid.
            let grid: Vec<Vec<f64>> = (0..=10).flat_map(|i| (0..=10).map(move |j| vec![i as f64 / 10.0, j as f64 / 10.0])).collect();
            let pi = CopulaSpec::Independence { dim: 2 };
            let m = CopulaSpec::UpperFrechet { dim: 2 };
            prop_assert!(m.eval(&u).unwrap() >= tail_bound(&grid, &pi, &u).unwrap() - 1e-12);
        }
    }
}
