//! Coordinate boxes for each dependence regime from normal return samples,
//! clipped to a support box.

use bayes_robust::bayes::{marginal_credible_interval, split_alpha, ParametricModel};
use bayes_robust::copulas::{CopulaSpec, DependenceRegime};
use bayes_robust::bayes::Interval;
use bayes_robust::distributions::{ParametricFamily, RandomSource};
use bayes_robust::uncertainty_sets::{build_coordinate_box, clip_to_support, MarginalSpec};

fn main() -> bayes_robust::Result<()> {
    let (alpha, eps, d) = (0.1, 0.05, 3);
    let src = RandomSource::new(11, 0);
    let cols = [(0.01, 0.03), (0.005, 0.02), (0.002, 0.05)]
        .iter()
        .enumerate()
        .map(|(k, (m, s))| ParametricFamily::normal(*m, *s)?.sample(750, &src.child(k as u64)))
        .collect::<bayes_robust::Result<Vec<_>>>()?;
    let regimes = [
        DependenceRegime::Independent,
        DependenceRegime::TailPositive { lower: CopulaSpec::Independence { dim: d }, beta: 0.0 },
        DependenceRegime::CentralDomain,
        DependenceRegime::NoAssumption,
    ];
    for r in &regimes {
        let a = split_alpha(alpha, d, r.split_rule())?;
        let specs = cols
            .iter()
            .map(|c| MarginalSpec::from_fit(&ParametricModel::Normal, &marginal_credible_interval(&ParametricModel::Normal, c, a)?))
            .collect::<bayes_robust::Result<Vec<_>>>()?;
        let set = build_coordinate_box(r, &specs, eps)?;
        let clipped = clip_to_support(&set, &vec![Interval::new(-0.1, 0.1); d])?;
        let show = |s: &bayes_robust::uncertainty_sets::UncertaintySet| {
            s.intervals().unwrap().iter().map(|iv| format!("[{:+.4}, {:+.4}]", iv.lo, iv.hi)).collect::<Vec<_>>().join(" ")
        };
        println!("{:<14} {}", r.name(), show(&set));
        println!("{:<14} {}", "  clipped", show(&clipped));
    }
    Ok(())
}
