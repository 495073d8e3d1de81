//! Robust portfolio over a regime box and over a discrete mixture set, plus
//! a budget split across two joint constraints.

use bayes_robust::bayes::{credible_box_dirichlet, posterior_dirichlet, ParametricModel};
use bayes_robust::harness::data::{asset_thetas, sample_asset_columns};
use bayes_robust::harness::experiments::{fit_columns, regime_box};
use bayes_robust::harness::RegimeName;
use bayes_robust::distributions::{ParametricFamily, RandomSource};
use bayes_robust::robust_solver::{allocate_epsilons, solve_portfolio, JointConstraintSpec};
use bayes_robust::uncertainty_sets::build_discrete;

fn main() -> bayes_robust::Result<()> {
    let thetas = asset_thetas(20);
    let model = ParametricModel::two_point(2.0, 2.0);
    let cols = sample_asset_columns(&thetas, 2000, &RandomSource::new(4, 0));
    let fits = fit_columns(&model, &cols)?;
    for regime in [RegimeName::Independent, RegimeName::NoAssumption] {
        let (set, _) = regime_box(regime, &model, &fits, 0.1, 0.1)?;
        let sol = solve_portfolio(&set)?;
        let top = sol.weights.iter().position(|w| *w == 1.0).unwrap_or(0);
        println!("{:<22} v_in {:.4}, all weight on asset {}", regime.label(), sol.v_in, top + 1);
    }

    // Scenario returns of three assets in four market states.
    let support = vec![vec![0.05, 0.02, -0.01], vec![-0.04, 0.01, 0.03], vec![0.02, -0.03, 0.01], vec![-0.08, -0.02, 0.0]];
    let labels: Vec<usize> = (0..400).map(|k| [0, 1, 2, 0, 1, 2, 0, 3][k % 8]).collect();
    let region = credible_box_dirichlet(&posterior_dirichlet(&[1.0; 4], &labels)?, 0.1)?;
    let sol = solve_portfolio(&build_discrete(&region, &support, 0.2)?)?;
    println!("discrete set: weights {:.3?}, v_in {:.5}, scenario {:.4?}", sol.weights, sol.v_in, sol.scenario);

    // Two loss constraints whose robust values shrink as their shares grow.
    let (a, b) = (ParametricFamily::normal(1.0, 0.5)?, ParametricFamily::exponential(0.8)?);
    let spec = JointConstraintSpec {
        constraints: vec![Box::new(move |e| a.var(e)), Box::new(move |e| b.var(e))],
        eps_bar: 0.1,
    };
    let alloc = allocate_epsilons(&spec)?;
    println!("budget split {:.4?} with worst robust value {:.4}", alloc.eps, alloc.objective);
    Ok(())
}
