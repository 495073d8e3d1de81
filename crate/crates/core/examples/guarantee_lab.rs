//! Coverage, chance-constraint implication and convergence of the
//! independent-regime box at three sample sizes.

use bayes_robust::harness::{run_guarantee_lab, ExperimentConfig, ExperimentKind};

fn main() -> bayes_robust::Result<()> {
    let cfg = ExperimentConfig { repeats: 40, eval_draws: 20_000, ..ExperimentConfig::preset(ExperimentKind::GuaranteeLab) };
    let report = run_guarantee_lab(&cfg)?;
    println!("{:>6} {:>9} {:>11} {:>10} {:>9}", "N", "coverage", "implication", "hausdorff", "diameter");
    for s in &report.summaries {
        println!(
            "{:>6} {:>9.3} {:>11.3} {:>10.4} {:>9.4}",
            s.n, s.coverage, s.implication, s.median_hausdorff, s.median_diameter
        );
    }
    Ok(())
}
