//! Laplace approximation of a custom posterior and of a built-in model.

use bayes_robust::bayes::{credible_ellipsoid, laplace_fit, marginal_credible_interval, FnPosterior, ParametricModel};
use bayes_robust::distributions::{ParametricFamily, RandomSource};

fn main() -> bayes_robust::Result<()> {
    // Normal likelihood with unknown mean and log-sd, flat prior.
    let data = ParametricFamily::normal(1.5, 0.7)?.sample(400, &RandomSource::new(3, 0))?;
    let post = FnPosterior {
        dim: 2,
        f: |t: &[f64]| {
            let (m, s) = (t[0], t[1].exp());
            data.iter().map(|x| -((x - m) / s).powi(2) / 2.0 - s.ln()).sum()
        },
    };
    let fit = laplace_fit(&post, &[0.0, 0.0])?;
    println!("mode: mean {:.4}, sd {:.4}", fit.mode[0], fit.mode[1].exp());
    let region = credible_ellipsoid(&fit, 0.05)?;
    for (k, iv) in region.bounding_box().iter().enumerate() {
        println!("parameter {k}: [{:.4}, {:.4}]", iv.lo, iv.hi);
    }

    let waits = ParametricFamily::exponential(2.0)?.sample(1000, &RandomSource::new(3, 1))?;
    let m = marginal_credible_interval(&ParametricModel::Exponential, &waits, 0.1)?;
    println!("exponential mean: mode {:.4}, interval [{:.4}, {:.4}]", m.summary.mode[0], m.intervals[0].lo, m.intervals[0].hi);
    Ok(())
}
