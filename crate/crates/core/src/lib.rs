pub mod bayes;
pub mod copulas;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod linprog;
pub mod optim;
pub mod queueing;
pub mod robust_solver;
pub mod special;
pub mod uncertainty_sets;

pub use error::{Error, Result};
