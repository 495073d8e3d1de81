//! Conjugate Dirichlet update and the simplex-constrained credible box.

use bayes_robust::bayes::{credible_box_dirichlet, posterior_dirichlet, CredibleRegion};
use bayes_robust::distributions::{DiscreteLaw, RandomSource};

fn main() -> bayes_robust::Result<()> {
    let truth = DiscreteLaw::new(vec![vec![-1.0], vec![0.0], vec![1.0], vec![2.5]], vec![0.1, 0.4, 0.3, 0.2])?;
    let labels = truth.sample_labels(500, &mut RandomSource::new(7, 0).rng());
    let post = posterior_dirichlet(&[1.0; 4], &labels)?;
    println!("posterior concentrations {:?}", post.tau);

    let region = credible_box_dirichlet(&post, 0.1)?;
    if let CredibleRegion::Box { center, lower, upper, .. } = &region {
        for j in 0..center.len() {
            println!("θ_{j}: mode {:.4}  [{:.4}, {:.4}]  true {}", center[j], lower[j], upper[j], truth.probs[j]);
        }
    }
    println!("true weights inside: {}", region.contains(&truth.probs, 0.0));
    Ok(())
}
