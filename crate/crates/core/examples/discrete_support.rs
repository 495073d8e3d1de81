//! Mixture polytope over a finite support: support function, worst-case
//! scenario and membership, for a box and an ellipsoid credible region.

use bayes_robust::bayes::{credible_box_dirichlet, credible_ellipsoid, dirichlet_mode_info, posterior_dirichlet};
use bayes_robust::uncertainty_sets::build_discrete;

fn main() -> bayes_robust::Result<()> {
    let support = vec![vec![0.04, -0.02], vec![-0.03, 0.05], vec![0.01, 0.01], vec![-0.06, -0.04]];
    let labels: Vec<usize> = (0..240).map(|k| [0, 0, 1, 2, 2, 2, 1, 3][k % 8]).collect();
    let post = posterior_dirichlet(&[1.0; 4], &labels)?;
    let eps = 0.6;

    let boxed = build_discrete(&credible_box_dirichlet(&post, 0.1)?, &support, eps)?;
    let ell = build_discrete(&credible_ellipsoid(&dirichlet_mode_info(&post)?, 0.1)?, &support, eps)?;
    for v in [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0], [0.6, -0.8]] {
        let (h, point) = boxed.support_with_point(&v)?;
        println!(
            "v = {v:?}: box {h:.5} at [{:.4}, {:.4}], ellipsoid {:.5}",
            point[0],
            point[1],
            ell.support(&v)?
        );
    }
    let centroid = [0.0, 0.01];
    println!("centroid {centroid:?} in box set: {}", boxed.contains(&centroid, 1e-9)?);
    println!("far point in box set: {}", boxed.contains(&[0.2, 0.2], 1e-9)?);
    Ok(())
}
