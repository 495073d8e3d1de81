//! A small production-planning LP with its dual certificate.

use bayes_robust::linprog::{solve_lp, Direction, LinearProgram, Sense};

fn main() -> bayes_robust::Result<()> {
    let mut p = LinearProgram::new(Direction::Maximize, vec![3.0, 5.0, 4.0]);
    p.add_row(vec![2.0, 3.0, 1.0], Sense::Le, 5.0)
        .add_row(vec![4.0, 1.0, 2.0], Sense::Le, 11.0)
        .add_row(vec![3.0, 4.0, 2.0], Sense::Le, 8.0)
        .add_row(vec![1.0, 1.0, 1.0], Sense::Ge, 1.0);
    p.set_bounds(2, 0.0, 1.5);
    let sol = solve_lp(&p)?;
    println!("status {:?} after {} pivots", sol.status, sol.iterations);
    println!("x = {:?}", sol.x);
    println!("primal {:.6}, dual {:.6}", sol.objective, sol.dual_objective(&p));
    println!("row prices {:?}", sol.y);
    println!("complementarity {:.2e}, residual {:.2e}", sol.complementarity(&p), p.primal_residual(&sol.x));
    Ok(())
}
