//! Diagonal sections, regime levels and Gaussian copula sampling.

use bayes_robust::copulas::{sample_gaussian_copula_uniforms, CopulaSpec, DependenceRegime};
use bayes_robust::distributions::RandomSource;
use bayes_robust::linalg::Matrix;

fn main() -> bayes_robust::Result<()> {
    let (eps, d) = (0.1, 5);
    for c in [CopulaSpec::Independence { dim: d }, CopulaSpec::UpperFrechet { dim: d }, CopulaSpec::LowerBound { dim: d }] {
        println!("{c:?}: δ^-1(1 - ε) = {:.6}", c.diagonal_inverse(1.0 - eps)?);
    }
    let regimes = [
        DependenceRegime::Independent,
        DependenceRegime::TailPositive { lower: CopulaSpec::Independence { dim: d }, beta: 0.0 },
        DependenceRegime::CentralDomain,
        DependenceRegime::NoAssumption,
    ];
    for r in &regimes {
        println!("{:<14} coordinate level {:.6} (cvar: {})", r.name(), r.coordinate_level(eps, d)?, r.uses_cvar());
    }

    let corr = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]])?;
    let g = CopulaSpec::gaussian(corr.clone())?;
    let u = sample_gaussian_copula_uniforms(&corr, 100_000, &mut RandomSource::new(9, 0).rng())?;
    let hits = u.iter().filter(|p| p[0] <= 0.3 && p[1] <= 0.7).count() as f64 / u.len() as f64;
    println!("C(0.3, 0.7) = {:.4}, sampled {hits:.4}", g.eval(&[0.3, 0.7])?);
    Ok(())
}
