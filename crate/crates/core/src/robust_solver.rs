//! Robust long-only portfolio selection over an uncertainty set, budget
//! allocation across joint constraints, and out-of-sample metrics.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::RandomSource;
use crate::error::{Error, Result};
use crate::linprog::{solve_lp, Direction, LinearProgram, LpStatus, Sense};
use crate::optim::golden_min;
use crate::uncertainty_sets::{SetKind, UncertaintySet};
use crate::bayes::CredibleRegion;

const CERTIFY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioSolution {
    pub weights: Vec<f64>,
    /// `min_{ξ ∈ Ξ} ξᵀx*`.
    pub v_in: f64,
    /// A minimizing scenario.
    pub scenario: Vec<f64>,
}

/// `max_x min_{ξ ∈ Ξ} ξᵀx` over the probability simplex.
pub fn solve_portfolio(set: &UncertaintySet) -> Result<PortfolioSolution> {
    match &set.kind {
        SetKind::CoordinateBox { intervals, .. } => {
            // The inner minimum is Σ x_i l_i, maximized at the best lower endpoint.
            let mut best = 0;
            for (i, iv) in intervals.iter().enumerate() {
                if iv.lo > intervals[best].lo {
                    best = i;
                }
            }
            let mut weights = vec![0.0; intervals.len()];
            weights[best] = 1.0;
            Ok(PortfolioSolution {
                weights,
                v_in: intervals[best].lo,
                scenario: intervals.iter().map(|iv| iv.lo).collect(),
            })
        }
        SetKind::DiscreteMixture { support, region, eps } => {
            if !matches!(region, CredibleRegion::Box { .. }) {
                return Err(Error::input("the joint portfolio LP needs a box credible region"));
            }
            let inner = set.discrete_lp(support, region, *eps, 0, true);
            let joint = dualize_inner(&inner, support)?;
            let sol = solve_lp(&joint)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::EmptySet("inner problem is infeasible".into())),
                LpStatus::Unbounded => return Err(Error::Unbounded),
            }
            let d = support[0].len();
            let weights: Vec<f64> = sol.x[..d].iter().map(|w| w.max(0.0)).collect();
            let neg: Vec<f64> = weights.iter().map(|w| -w).collect();
            let (value, scenario) = set.support_with_point(&neg)?;
            let v_in = sol.objective;
            if (v_in + value).abs() > CERTIFY_TOL * (1.0 + v_in.abs()) {
                return Err(Error::Solver(format!("saddle certificate failed: joint {v_in}, inner {}", -value)));
            }
            Ok(PortfolioSolution { weights, v_in, scenario })
        }
    }
}

/// Joint LP in `(x, y)`: the simplex over `x` plus the dual of the inner
/// minimization `min_z Σ_j q_j r_jᵀx` over the mixture polytope, where `z`
/// holds `(q, θ)` and all bounds are written as rows.
fn dualize_inner(inner: &LinearProgram, support: &[Vec<f64>]) -> Result<LinearProgram> {
    let nz = inner.num_vars();
    let n = support.len();
    let d = support[0].len();
    let mut rows: Vec<Vec<f64>> = inner.rows.clone();
    let mut senses = inner.senses.clone();
    let mut b = inner.b.clone();
    for j in 0..nz {
        if inner.lo[j] < 0.0 {
            return Err(Error::input("inner variables must be nonnegative"));
        }
        if inner.lo[j] > 0.0 {
            let mut row = vec![0.0; nz];
            row[j] = 1.0;
            rows.push(row);
            senses.push(Sense::Ge);
            b.push(inner.lo[j]);
        }
        if inner.hi[j].is_finite() {
            let mut row = vec![0.0; nz];
            row[j] = 1.0;
            rows.push(row);
            senses.push(Sense::Le);
            b.push(inner.hi[j]);
        }
    }
    let m = rows.len();
    let mut c = vec![0.0; d + m];
    c[d..].copy_from_slice(&b);
    let mut lp = LinearProgram::new(Direction::Maximize, c);
    for (i, s) in senses.iter().enumerate() {
        match s {
            Sense::Le => lp.set_bounds(d + i, f64::NEG_INFINITY, 0.0),
            Sense::Ge => lp.set_bounds(d + i, 0.0, f64::INFINITY),
            Sense::Eq => lp.free(d + i),
        };
    }
    // Dual feasibility per inner column: Σ_i A_ij y_i <= c_j(x).
    for j in 0..nz {
        let mut row = vec![0.0; d + m];
        for i in 0..m {
            row[d + i] = rows[i][j];
        }
        if j < n {
            for k in 0..d {
                row[k] = -support[j][k];
            }
        }
        lp.add_row(row, Sense::Le, 0.0);
    }
    let mut row = vec![0.0; d + m];
    row[..d].iter_mut().for_each(|x| *x = 1.0);
    lp.add_row(row, Sense::Eq, 1.0);
    Ok(lp)
}

// ---------------------------------------------------------------------------
// Budget allocation across joint constraints

/// Maps a budget share `ε_j` to the robust value of constraint `j`
/// (`max_{ξ ∈ Ξ(ε_j)} g_j(ξ, x)` for a fixed decision).
pub type ConstraintValue<'a> = Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>;

pub struct JointConstraintSpec<'a> {
    pub constraints: Vec<ConstraintValue<'a>>,
    pub eps_bar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Allocation {
    pub eps: Vec<f64>,
    pub objective: f64,
}

impl JointConstraintSpec<'_> {
    fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(Error::input("at least one constraint is required"));
        }
        if !(self.eps_bar > 0.0 && self.eps_bar < 1.0) {
            return Err(Error::domain(format!("eps_bar must lie in (0, 1), got {}", self.eps_bar)));
        }
        Ok(())
    }

    fn objective(&self, eps: &[f64]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for (g, &e) in self.constraints.iter().zip(eps) {
            worst = worst.max(g(e)?);
        }
        Ok(worst)
    }

    /// Larger shares must give smaller sets, hence no larger constraint values.
    fn check_monotone(&self) -> Result<()> {
        let probes: Vec<f64> = (1..=8).map(|k| self.eps_bar * k as f64 / 8.0).collect();
        for (j, g) in self.constraints.iter().enumerate() {
            let vals = probes.iter().map(|&e| g(e)).collect::<Result<Vec<f64>>>()?;
            for w in vals.windows(2) {
                if w[1] > w[0] + 1e-9 * (1.0 + w[0].abs()) {
                    return Err(Error::ContractViolation(format!("constraint {j} grows with its budget share")));
                }
            }
        }
        Ok(())
    }
}

/// Coordinate exchange from the uniform split: repeatedly move budget from a
/// slack constraint to the tightest one, sizing the move by golden section.
pub fn allocate_epsilons(spec: &JointConstraintSpec) -> Result<Allocation> {
    spec.validate()?;
    spec.check_monotone()?;
    let j_count = spec.constraints.len();
    let floor = spec.eps_bar * 1e-9;
    let mut eps = vec![spec.eps_bar / j_count as f64; j_count];
    let mut best = spec.objective(&eps)?;
    if j_count == 1 {
        return Ok(Allocation { eps, objective: best });
    }
    for _ in 0..200 {
        let values = spec.constraints.iter().zip(&eps).map(|(g, &e)| g(e)).collect::<Result<Vec<f64>>>()?;
        let tight = (0..j_count).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        let mut order: Vec<usize> = (0..j_count).filter(|&k| k != tight).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut improved = false;
        for donor in order {
            let room = eps[donor] - floor;
            if room <= 0.0 {
                continue;
            }
            let mut trial = eps.clone();
            let mut f = |delta: f64| {
                trial[donor] = eps[donor] - delta;
                trial[tight] = eps[tight] + delta;
                spec.objective(&trial).unwrap_or(f64::INFINITY)
            };
            let (delta, fval) = golden_min(&mut f, 0.0, room, 1e-12 * spec.eps_bar, 200);
            let (delta, fval) = if f(room) < fval { (room, f(room)) } else { (delta, fval) };
            if fval < best - 1e-8 * (1.0 + best.abs()) {
                eps[donor] -= delta;
                eps[tight] += delta;
                best = fval;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Allocation { eps, objective: best })
}

/// Exhaustive search over a simplex grid with `points` steps per axis, for
/// `J <= 3`.
pub fn allocate_epsilons_grid(spec: &JointConstraintSpec, points: usize) -> Result<Allocation> {
    spec.validate()?;
    let j_count = spec.constraints.len();
    if j_count > 3 || points == 0 {
        return Err(Error::input("grid allocation supports at most three constraints and a positive grid"));
    }
    let step = spec.eps_bar / points as f64;
    let floor = spec.eps_bar * 1e-9;
    let mut best: Option<Allocation> = None;
    let mut consider = |eps: Vec<f64>| -> Result<()> {
        let eps: Vec<f64> = eps.into_iter().map(|e| e.max(floor)).collect();
        let obj = spec.objective(&eps)?;
        if best.as_ref().is_none_or(|b| obj < b.objective) {
            best = Some(Allocation { eps, objective: obj });
        }
        Ok(())
    };
    match j_count {
        1 => consider(vec![spec.eps_bar])?,
        2 => {
            for i in 0..=points {
                let a = i as f64 * step;
                consider(vec![a, spec.eps_bar - a])?;
            }
        }
        _ => {
            for i in 0..=points {
                for k in 0..=(points - i) {
                    let (a, b) = (i as f64 * step, k as f64 * step);
                    consider(vec![a, b, (spec.eps_bar - a - b).max(0.0)])?;
                }
            }
        }
    }
    best.ok_or_else(|| Error::input("empty grid"))
}

// ---------------------------------------------------------------------------
// Out-of-sample metrics

/// `(d, D) = (r* - r_in, (r* - r_in)/r*)`; `D` is a domain error when `r* = 0`.
pub fn deviation_metrics(r_in: f64, r_star: f64) -> (f64, Result<f64>) {
    let d = r_star - r_in;
    let rel = if r_star == 0.0 {
        Err(Error::domain("relative deviation is undefined for a zero reference"))
    } else {
        Ok(d / r_star)
    };
    (d, rel)
}

/// Lower order statistic of index `ceil(frac * n)` (1-based).
pub fn lower_order_statistic(values: &[f64], frac: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::input("no values"));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::domain(format!("fraction must lie in (0, 1], got {frac}")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((frac * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Ok(v[k - 1])
}

/// Monte Carlo `ε`-percentile of `ξᵀx` under `draw`, sharded over rayon with
/// one child stream per shard so the result depends only on the seed.
pub fn monte_carlo_percentile<F>(draw: F, x: &[f64], eps: f64, n: usize, src: &RandomSource) -> Result<f64>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let returns = monte_carlo_returns(draw, x, n, src)?;
    lower_order_statistic(&returns, eps)
}

/// `n` draws of `ξᵀx`.
pub fn monte_carlo_returns<F>(draw: F, x: &[f64], n: usize, src: &RandomSource) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    if n == 0 {
        return Err(Error::input("at least one draw is required"));
    }
    const SHARD: usize = 1 << 14;
    let shards = n.div_ceil(SHARD);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = src.child(s as u64).rng();
            let count = SHARD.min(n - s * SHARD);
            (0..count)
                .map(|_| {
                    let xi = draw(&mut rng);
                    xi.iter().zip(x).map(|(a, b)| a * b).sum()
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::Interval;
    use crate::uncertainty_sets::{build_discrete, RiskMeasure};
    use proptest::prelude::*;
    use rand::Rng;

    fn boxed(lo: &[f64], hi: &[f64]) -> UncertaintySet {
        UncertaintySet {
            kind: SetKind::CoordinateBox {
                intervals: lo.iter().zip(hi).map(|(a, b)| Interval::new(*a, *b)).collect(),
                regime: "test".into(),
                measure: RiskMeasure::Var,
                levels: vec![0.1; lo.len()],
            },
            clip: None,
        }
    }

    #[test]
    fn box_argmax() {
        let s = solve_portfolio(&boxed(&[-1.0, -0.5, 0.2], &[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(s.weights, vec![0.0, 0.0, 1.0]);
        assert_eq!(s.v_in, 0.2);
        let s = solve_portfolio(&boxed(&[0.1, 0.1], &[1.0, 2.0])).unwrap();
        assert_eq!(s.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn singleton_discrete_set() {
        let region = CredibleRegion::Box {
            center: vec![0.5, 0.5],
            lower: vec![0.5, 0.5],
            upper: vec![0.5, 0.5],
            simplex: true,
            alpha: 0.1,
        };
        let set = build_discrete(&region, &[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let s = solve_portfolio(&set).unwrap();
        assert!((s.v_in - 0.5).abs() < 1e-9);
    }

    /// Brute force over a weight grid for d = 2.
    fn grid_portfolio(set: &UncertaintySet) -> f64 {
        (0..=2000)
            .map(|i| {
                let w = i as f64 / 2000.0;
                -set.support(&[-w, -(1.0 - w)]).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn discrete_against_weight_grid() {
        let region = CredibleRegion::Box {
            center: vec![0.3, 0.3, 0.4],
            lower: vec![0.2, 0.25, 0.3],
            upper: vec![0.4, 0.35, 0.5],
            simplex: true,
            alpha: 0.1,
        };
        let support = vec![vec![1.0, -0.5], vec![-0.8, 1.2], vec![0.3, 0.1]];
        let set = build_discrete(&region, &support, 0.4).unwrap();
        let s = solve_portfolio(&set).unwrap();
        let g = grid_portfolio(&set);
        assert!(s.v_in >= g - 1e-9 && s.v_in - g < 1e-3, "{} vs {g}", s.v_in);
    }

    #[test]
    fn deviation_examples() {
        let (d, rel) = deviation_metrics(-0.0095, 0.001);
        assert!((d - 0.0105).abs() < 1e-15 && (rel.unwrap() - 10.5).abs() < 1e-12);
        let (d, rel) = deviation_metrics(0.3, 0.3);
        assert_eq!((d, rel.unwrap()), (0.0, 0.0));
        let (d, rel) = deviation_metrics(-0.06, -0.05);
        assert!((d - 0.01).abs() < 1e-15 && (rel.unwrap() + 0.2).abs() < 1e-12);
        let (d, rel) = deviation_metrics(-0.1, 0.0);
        assert_eq!(d, 0.1);
        assert!(rel.is_err());
    }

    #[test]
    fn order_statistic() {
        let v: Vec<f64> = (1..=50).map(|i| i as f64).rev().collect();
        assert_eq!(lower_order_statistic(&v, 0.1).unwrap(), 5.0);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_accurate() {
        let draw = |rng: &mut ChaCha8Rng| vec![rng.random::<f64>()];
        let src = RandomSource::new(11, 2);
        let a = monte_carlo_percentile(draw, &[1.0], 0.1, 200_000, &src).unwrap();
        let b = monte_carlo_percentile(draw, &[1.0], 0.1, 200_000, &src).unwrap();
        assert_eq!(a, b);
        assert!((a - 0.1).abs() < 0.005);
    }

    #[test]
    fn allocation_examples() {
        let g = |e: f64| -> Result<f64> { Ok(-e.ln()) };
        let spec = JointConstraintSpec { constraints: vec![Box::new(g), Box::new(g)], eps_bar: 0.1 };
        let a = allocate_epsilons(&spec).unwrap();
        assert!((a.eps[0] - 0.05).abs() < 1e-9 && (a.eps[1] - 0.05).abs() < 1e-9);

        let spec = JointConstraintSpec { constraints: vec![Box::new(g)], eps_bar: 0.1 };
        assert_eq!(allocate_epsilons(&spec).unwrap().eps, vec![0.1]);

        let flat = |_e: f64| -> Result<f64> { Ok(-10.0) };
        let spec = JointConstraintSpec { constraints: vec![Box::new(flat), Box::new(g)], eps_bar: 0.1 };
        let a = allocate_epsilons(&spec).unwrap();
        let grid = allocate_epsilons_grid(&spec, 10_000).unwrap();
        assert!(a.eps[1] >= 0.09 && grid.eps[1] >= 0.09);
        assert!(a.objective <= grid.objective + 1e-6);

        let bad = |e: f64| -> Result<f64> { Ok(e) };
        let spec = JointConstraintSpec { constraints: vec![Box::new(bad), Box::new(g)], eps_bar: 0.1 };
        assert!(matches!(allocate_epsilons(&spec), Err(Error::ContractViolation(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn allocation_never_worse_than_uniform(s1 in 0.1..5.0f64, s2 in 0.1..5.0f64, s3 in 0.1..5.0f64, o in -1.0..1.0f64) {
            let spec = JointConstraintSpec {
                constraints: vec![
                    Box::new(move |e: f64| Ok(-s1 * e.ln())),
                    Box::new(move |e: f64| Ok(o - s2 * e.sqrt())),
                    Box::new(move |e: f64| Ok(s3 * (1.0 - e))),
                ],
                eps_bar: 0.2,
            };
            let a = allocate_epsilons(&spec).unwrap();
            let uniform = spec.objective(&[0.2 / 3.0; 3]).unwrap();
            prop_assert!(a.objective <= uniform + 1e-9);
            prop_assert!((a.eps.iter().sum::<f64>() - 0.2).abs() < 1e-12);
            prop_assert!(a.eps.iter().all(|e| *e >= 0.0));
        }

        #[test]
        fn argmax_scale_invariant(lo in prop::collection::vec(-2.0..2.0f64, 1..6), c in 0.01..100.0f64) {
            let hi: Vec<f64> = lo.iter().map(|x| x + 1.0).collect();
            let a = solve_portfolio(&boxed(&lo, &hi)).unwrap();
            let slo: Vec<f64> = lo.iter().map(|x| c * x).collect();
            let shi: Vec<f64> = hi.iter().map(|x| c * x).collect();
            let b = solve_portfolio(&boxed(&slo, &shi)).unwrap();
            prop_assert_eq!(a.weights, b.weights);
        }

        #[test]
        fn saddle_certificate(
            n in 2usize..6,
            d in 1usize..5,
            seed in 0u64..10_000,
            eps in 0.1..1.0f64,
        ) {
            let mut rng = RandomSource::new(seed, 0).rng();
            let support: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
            let s: f64 = w.iter().sum();
            let theta: Vec<f64> = w.iter().map(|x| x / s).collect();
            let region = CredibleRegion::Box {
                center: theta.clone(),
                lower: theta.iter().map(|t| (t - 0.05).max(0.0)).collect(),
                upper: theta.iter().map(|t| (t + 0.05).min(1.0)).collect(),
                simplex: true,
                alpha: 0.1,
            };
            let set = build_discrete(&region, &support, eps).unwrap();
            let sol = solve_portfolio(&set).unwrap();
            prop_assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(sol.weights.iter().all(|w| *w >= -1e-12));
            let neg: Vec<f64> = sol.weights.iter().map(|w| -w).collect();
            prop_assert!((sol.v_in + set.support(&neg).unwrap()).abs() < 1e-7);
            // Not beaten by any pure asset.
            for k in 0..d {
                let mut e = vec![0.0; d];
                e[k] = -1.0;
                prop_assert!(-set.support(&e).unwrap() <= sol.v_in + 1e-7);
            }
        }
    }
}
