//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use bayes_robust::bayes::{credible_box_dirichlet, credible_ellipsoid, dirichlet_mode_info, posterior_dirichlet, CredibleRegion, Interval, ParametricModel};
use bayes_robust::copulas::CopulaSpec;
use bayes_robust::distributions::{two_point_values, ParametricFamily, RandomSource};
use bayes_robust::harness::data::{asset_thetas, sample_asset_columns};
use bayes_robust::harness::experiments::{fit_columns, regime_box};
use bayes_robust::harness::{
    run_guarantee_lab, run_portfolio_experiment, run_queue_experiment, run_set_geometry, ExperimentConfig, ExperimentKind,
    RegimeName,
};
use bayes_robust::linprog::{solve_lp, Direction, LinearProgram, LpStatus, Sense};
use bayes_robust::queueing::kingman_bound;
use bayes_robust::uncertainty_sets::{build_discrete, random_directions, UncertaintySet};
use bayes_robust::Result;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

// 1 ------------------------------------------------------------------------

fn asset_closed_form() -> Result<Verdict> {
    let (up, down) = two_point_values(0.52381);
    let values_ok = (up - 0.9534).abs() < 1e-3 && (down + 1.0488).abs() < 1e-3;
    let mut worst = 0.0f64;
    for t in asset_thetas(20) {
        let f = ParametricFamily::two_point(t)?;
        worst = worst.max(f.mean().abs()).max((f.variance() - 1.0).abs());
    }
    verdict(values_ok && worst < 1e-10, format!("values ({up:.4}, {down:.4}), max moment error {worst:.1e}"))
}

// 2, 3 ---------------------------------------------------------------------

fn queue_config() -> ExperimentConfig {
    ExperimentConfig { sizes: vec![10_000], repeats: 100, ..ExperimentConfig::preset(ExperimentKind::Queue) }
}

fn kingman() -> Result<Verdict> {
    let k = kingman_bound(2.0, 4.0, 3.05, 3.05, 0.5)?;
    let res = run_queue_experiment(&queue_config())?;
    let ks: Vec<f64> = res.records.iter().map(|r| r.kingman).collect();
    let m = mean(&ks);
    verdict((k - 10.117).abs() < 1e-3 && (9.8..=10.5).contains(&m), format!("population {k:.4}, mean over 100 resamples {m:.4}"))
}

fn queue_sd_ordering() -> Result<Verdict> {
    let cfg = queue_config();
    let res = run_queue_experiment(&cfg)?;
    let bayes: Vec<f64> = res.records.iter().map(|r| r.bayes).collect();
    let ks: Vec<f64> = res.records.iter().map(|r| r.kingman).collect();
    let (sb, sk) = (sd(&bayes), sd(&ks));
    let validity = bayes.iter().filter(|b| **b >= res.true_median).count() as f64 / bayes.len() as f64;
    verdict(
        sb < sk && validity >= 0.85,
        format!("sd bayes_box {sb:.4} vs kingman {sk:.4}; validity {validity:.3} (true median {:.4})", res.true_median),
    )
}

// 4 ------------------------------------------------------------------------

fn portfolio() -> Result<Verdict> {
    let cfg = ExperimentConfig {
        regimes: vec![RegimeName::Independent, RegimeName::NoAssumption],
        ..ExperimentConfig::preset(ExperimentKind::Portfolio)
    };
    let res = run_portfolio_experiment(&cfg)?;
    let pick = |regime: RegimeName, n: usize| {
        let v: Vec<f64> = res.records.iter().filter(|r| r.regime == regime && r.n == n).map(|r| r.v_out).collect();
        mean(&v)
    };
    let i = pick(RegimeName::Independent, 2000);
    let m = pick(RegimeName::NoAssumption, 500);
    verdict(
        (i + 0.9803).abs() <= 0.08 && (m + 1.0090).abs() <= 0.08,
        format!("independent N=2000 v_out {i:.4} (target -0.9803), no-assumption N=500 v_out {m:.4} (target -1.0090)"),
    )
}

// 5 ------------------------------------------------------------------------

fn guarantees() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.05, 0.1] {
        let cfg = ExperimentConfig {
            sizes: vec![2000],
            repeats: 500,
            alpha,
            ..ExperimentConfig::preset(ExperimentKind::GuaranteeLab)
        };
        let s = &run_guarantee_lab(&cfg)?.summaries[0];
        let floor = 1.0 - alpha - 0.05;
        pass &= s.coverage >= floor && s.implication >= floor;
        parts.push(format!("alpha {alpha}: coverage {:.3}, implication {:.3} (floor {floor:.2})", s.coverage, s.implication));
    }
    verdict(pass, parts.join("; "))
}

// 6 ------------------------------------------------------------------------

/// Exact law of `vᵀξ` for two-point coordinates `ξ_i = F_i^{-1}(w_i)`, where
/// `w_i` is `U` or `1 - U` for one shared uniform `U`.
fn coupled_projection(thetas: &[f64], v: &[f64], flip: &[bool]) -> Result<ParametricFamily> {
    let mut cuts = vec![0.0, 1.0];
    for t in thetas {
        cuts.push(1.0 - t);
        cuts.push(*t);
    }
    cuts.sort_by(f64::total_cmp);
    let (mut points, mut probs) = (Vec::new(), Vec::new());
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let u = 0.5 * (w[0] + w[1]);
        let y = thetas
            .iter()
            .zip(v)
            .zip(flip)
            .map(|((t, vi), f)| {
                let wi = if *f { 1.0 - u } else { u };
                let (up, down) = two_point_values(*t);
                vi * if wi <= 1.0 - t { down } else { up }
            })
            .sum();
        points.push(y);
        probs.push(w[1] - w[0]);
    }
    ParametricFamily::finite_discrete(points, probs)
}

fn independent_projection(thetas: &[f64], v: &[f64]) -> Result<ParametricFamily> {
    let d = thetas.len();
    let (mut points, mut probs) = (Vec::new(), Vec::new());
    for mask in 0..1usize << d {
        let (mut y, mut p) = (0.0, 1.0);
        for i in 0..d {
            let (up, down) = two_point_values(thetas[i]);
            if mask >> i & 1 == 1 {
                y += v[i] * up;
                p *= thetas[i];
            } else {
                y += v[i] * down;
                p *= 1.0 - thetas[i];
            }
        }
        points.push(y);
        probs.push(p);
    }
    ParametricFamily::finite_discrete(points, probs)
}

/// Largest `VaR_eps(vᵀξ)` over the laws the regime admits; returns the number
/// of directions and parameter points where it exceeds the support function.
fn box_dominance(regime: RegimeName, grid: &[Vec<f64>], dirs: &[Vec<f64>], set: &UncertaintySet, eps: f64) -> Result<(usize, f64)> {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for v in dirs {
        let h = set.support(v)?;
        for th in grid {
            let mut laws = vec![independent_projection(th, v)?];
            let comonotone: Vec<bool> = v.iter().map(|x| *x < 0.0).collect();
            if regime != RegimeName::Independent {
                laws.push(coupled_projection(th, v, &comonotone)?);
            }
            if matches!(regime, RegimeName::CentralDomain | RegimeName::NoAssumption) {
                let mixed: Vec<bool> = comonotone.iter().enumerate().map(|(i, f)| *f ^ (i == 1)).collect();
                laws.push(coupled_projection(th, v, &mixed)?);
            }
            for law in laws {
                let gap = law.var(eps)? - h;
                worst = worst.max(gap);
                if gap > 1e-6 {
                    violations += 1;
                }
            }
        }
    }
    Ok((violations, worst))
}

fn discrete_dominance(set: &UncertaintySet, support: &[Vec<f64>], grid: &[Vec<f64>], dirs: &[Vec<f64>], eps: f64) -> Result<(usize, f64)> {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for v in dirs {
        let h = set.support(v)?;
        let pts: Vec<f64> = support.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        for th in grid {
            let gap = ParametricFamily::finite_discrete(pts.clone(), th.clone())?.var(eps)? - h;
            worst = worst.max(gap);
            if gap > 1e-6 {
                violations += 1;
            }
        }
    }
    Ok((violations, worst))
}

/// Points of a box region on the simplex: a product grid over all but one
/// weight, the last weight taking up the slack.
fn simplex_grid(region: &CredibleRegion, per_axis: usize) -> Vec<Vec<f64>> {
    let b = region.bounding_box();
    let n = b.len();
    let axes: Vec<Vec<f64>> =
        b[..n - 1].iter().map(|iv| (0..per_axis).map(|k| iv.lo + iv.width() * k as f64 / (per_axis - 1) as f64).collect()).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut th: Vec<f64> = idx.iter().enumerate().map(|(i, k)| axes[i][*k]).collect();
        let last = 1.0 - th.iter().sum::<f64>();
        th.push(last);
        if last >= 0.0 && region.contains(&th, 1e-12) {
            out.push(th);
        }
        let mut i = 0;
        while i < n - 1 {
            idx[i] += 1;
            if idx[i] < per_axis {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n - 1 {
            break;
        }
    }
    out
}

fn var_dominance() -> Result<Verdict> {
    let eps = 0.1;
    let src = RandomSource::new(606, 0);
    let thetas = asset_thetas(3);
    let model = ParametricModel::two_point(2.0, 2.0);
    let cols = sample_asset_columns(&thetas, 200, &src.child(0));
    let fits = fit_columns(&model, &cols)?;
    let dirs = random_directions(3, 100, &src.child(1));
    let mut parts = Vec::new();
    let mut total = 0;
    for regime in RegimeName::ALL {
        let (set, specs) = regime_box(regime, &model, &fits, 0.1, eps)?;
        let axes: Vec<Vec<f64>> = specs
            .iter()
            .map(|s| {
                let iv = s.params[0];
                (0..6).map(|k| iv.lo + iv.width() * k as f64 / 5.0).collect()
            })
            .collect();
        let mut grid = Vec::new();
        for a in &axes[0] {
            for b in &axes[1] {
                for c in &axes[2] {
                    grid.push(vec![*a, *b, *c]);
                }
            }
        }
        let (bad, worst) = box_dominance(regime, &grid, &dirs, &set, eps)?;
        total += bad;
        parts.push(format!("{} {bad} (max gap {worst:.2e})", regime.label()));
    }

    let support = vec![vec![1.0, 0.2], vec![-0.5, 0.8], vec![0.3, -1.0], vec![-0.9, -0.4]];
    let probs = [0.4, 0.3, 0.2, 0.1];
    let mut rng = src.child(2).rng();
    let labels: Vec<usize> = (0..300)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            probs.iter().position(|p| {
                acc += p;
                u < acc
            })
            .unwrap_or(3)
        })
        .collect();
    let post = posterior_dirichlet(&[1.0; 4], &labels)?;
    let boxed = credible_box_dirichlet(&post, 0.1)?;
    let set = build_discrete(&boxed, &support, eps)?;
    let grid = simplex_grid(&boxed, 12);
    let (bad, worst) = discrete_dominance(&set, &support, &grid, &dirs_2d(&src), eps)?;
    total += bad;
    parts.push(format!("discrete box {bad} over {} weights (max gap {worst:.2e})", grid.len()));

    let ell = credible_ellipsoid(&dirichlet_mode_info(&post)?, 0.1)?;
    let set = build_discrete(&ell, &support, eps)?;
    let grid = simplex_grid(&ell, 12);
    let (bad, worst) = discrete_dominance(&set, &support, &grid, &dirs_2d(&src), eps)?;
    total += bad;
    parts.push(format!("discrete ellipsoid {bad} over {} weights (max gap {worst:.2e})", grid.len()));
    verdict(total == 0, format!("violations: {}", parts.join(", ")))
}

fn dirs_2d(src: &RandomSource) -> Vec<Vec<f64>> {
    random_directions(2, 100, &src.child(3))
}

// 7 ------------------------------------------------------------------------

/// `max cᵀq` over `q ∈ Δ`, `q <= θ/eps`, filling the largest `c` first.
fn greedy_cap(order: &[usize], c: &[f64], theta: &[f64], eps: f64) -> f64 {
    let mut left = 1.0;
    let mut val = 0.0;
    for &j in order {
        let take = (theta[j] / eps).min(left);
        val += take * c[j];
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    val
}

/// Brute force over a 200-point grid on each free weight, each weight taking
/// its turn as the slack variable so every vertex of box ∩ simplex is visited.
fn brute_discrete_support(lower: &[f64], upper: &[f64], c: &[f64], eps: f64) -> f64 {
    const G: usize = 200;
    let n = c.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| c[*b].total_cmp(&c[*a]));
    let axis = |j: usize| -> Vec<f64> {
        let mut a: Vec<f64> = (0..G).map(|k| lower[j] + (upper[j] - lower[j]) * k as f64 / (G - 1) as f64).collect();
        a[G - 1] = upper[j];
        a
    };
    let mut best = f64::NEG_INFINITY;
    for slack in 0..n {
        let free: Vec<usize> = (0..n).filter(|j| *j != slack).collect();
        let axes: Vec<Vec<f64>> = free.iter().map(|j| axis(*j)).collect();
        let mut idx = vec![0usize; free.len()];
        let mut th = vec![0.0; n];
        loop {
            let mut s = 0.0;
            for (k, j) in free.iter().enumerate() {
                th[*j] = axes[k][idx[k]];
                s += th[*j];
            }
            th[slack] = 1.0 - s;
            if th[slack] >= lower[slack] - 1e-12 && th[slack] <= upper[slack] + 1e-12 {
                best = best.max(greedy_cap(&order, c, &th, eps));
            }
            let mut k = 0;
            while k < free.len() {
                idx[k] += 1;
                if idx[k] < G {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == free.len() {
                break;
            }
        }
    }
    best
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if m < k {
        return vec![];
    }
    let mut out = combinations(m - 1, k);
    for mut c in combinations(m - 1, k - 1) {
        c.push(m - 1);
        out.push(c);
    }
    out
}

/// Optimum by enumerating every basic solution of the bounded polytope.
fn vertex_enumeration(p: &LinearProgram) -> Option<f64> {
    let n = p.num_vars();
    let mut g: Vec<(Vec<f64>, f64)> = Vec::new();
    for ((row, sense), b) in p.rows.iter().zip(&p.senses).zip(&p.b) {
        let neg: Vec<f64> = row.iter().map(|x| -x).collect();
        match sense {
            Sense::Le => g.push((row.clone(), *b)),
            Sense::Ge => g.push((neg, -b)),
            Sense::Eq => {
                g.push((row.clone(), *b));
                g.push((neg, -b));
            }
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        g.push((e.clone(), p.hi[j]));
        e[j] = -1.0;
        g.push((e, -p.lo[j]));
    }
    let sign = if p.direction == Direction::Maximize { 1.0 } else { -1.0 };
    let mut best: Option<f64> = None;
    for set in combinations(g.len(), n) {
        let a: Vec<Vec<f64>> = set.iter().map(|i| g[*i].0.clone()).collect();
        let b: Vec<f64> = set.iter().map(|i| g[*i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        let feasible = g.iter().all(|(r, h)| r.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= h + 1e-9);
        if feasible {
            let val = p.objective_value(&x);
            best = Some(match best {
                Some(cur) if sign * cur >= sign * val => cur,
                _ => val,
            });
        }
    }
    best
}

fn oracle_equivalence() -> Result<Verdict> {
    let src = RandomSource::new(707, 0);
    let instances: Vec<(f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = src.child(k).rng();
            let n = rng.random_range(2..=4usize);
            let d = rng.random_range(1..=2usize);
            let support: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let center: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let lower: Vec<f64> = center.iter().map(|c| (c - rng.random_range(0.02..0.15)).max(0.0)).collect();
            let upper: Vec<f64> = center.iter().map(|c| (c + rng.random_range(0.02..0.15)).min(1.0)).collect();
            let eps = rng.random_range(0.05..0.6);
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let region = CredibleRegion::Box { center, lower: lower.clone(), upper: upper.clone(), simplex: true, alpha: 0.1 };
            let set = build_discrete(&region, &support, eps)?;
            let c: Vec<f64> = support.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            Ok((set.support(&v)?, brute_discrete_support(&lower, &upper, &c, eps)))
        })
        .collect::<Result<Vec<_>>>()?;
    let support_err = instances.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut rng = src.child(1000).rng();
    let mut lp_err = 0.0f64;
    let mut status_mismatch = 0;
    let mut infeasible = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=3usize);
        let m = rng.random_range(2..=4usize);
        let dir = if rng.random_bool(0.5) { Direction::Maximize } else { Direction::Minimize };
        let mut p = LinearProgram::new(dir, (0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        for _ in 0..m {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            match rng.random_range(0..6) {
                0 => p.add_row(row, Sense::Ge, rng.random_range(-0.5..0.8)),
                1 => p.add_row(row, Sense::Eq, rng.random_range(-0.3..0.3)),
                _ => p.add_row(row, Sense::Le, rng.random_range(0.1..2.0)),
            };
        }
        for j in 0..n {
            let lo = if rng.random_bool(0.3) { -rng.random_range(0.0..2.0) } else { 0.0 };
            p.set_bounds(j, lo, rng.random_range(0.5..5.0));
        }
        let sol = solve_lp(&p)?;
        match (sol.status, vertex_enumeration(&p)) {
            (LpStatus::Optimal, Some(best)) => lp_err = lp_err.max((sol.objective - best).abs()),
            (LpStatus::Infeasible, None) => infeasible += 1,
            _ => status_mismatch += 1,
        }
    }
    verdict(
        support_err <= 1e-4 && lp_err <= 1e-7 && status_mismatch == 0,
        format!(
            "discrete support max error {support_err:.2e} over 50 instances; LP max error {lp_err:.2e}, \
             {status_mismatch} status mismatches, {infeasible} agreed infeasible"
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn convergence() -> Result<Verdict> {
    let cfg = ExperimentConfig::preset(ExperimentKind::GuaranteeLab);
    let report = run_guarantee_lab(&cfg)?;
    let h: Vec<f64> = report.summaries.iter().map(|s| s.median_hausdorff).collect();
    let dm: Vec<f64> = report.summaries.iter().map(|s| s.median_diameter).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let sizes: Vec<usize> = report.summaries.iter().map(|s| s.n).collect();
    verdict(
        decreasing(&h) && decreasing(&dm) && sizes == [100, 1000, 10_000],
        format!("N {sizes:?}: median hausdorff {h:.4?}, median diameter {dm:.4?}"),
    )
}

// 9 ------------------------------------------------------------------------

fn subset_property() -> Result<Verdict> {
    let cfg = ExperimentConfig {
        sizes: vec![10, 50, 500, 2000],
        repeats: 20,
        regimes: vec![RegimeName::Independent, RegimeName::TailPositiveProduct, RegimeName::NoAssumption],
        ..ExperimentConfig::preset(ExperimentKind::Geometry)
    };
    let res = run_set_geometry(&cfg)?;
    let find = |regime: RegimeName, n: usize, run: usize| {
        res.records.iter().find(|r| r.regime == regime && r.n == n && r.run == run).expect("record")
    };
    let tol = 1e-9;
    let (mut runs, mut bad_m, mut bad_tp) = (0, 0, 0);
    let mut example = String::new();
    for &n in &cfg.sizes {
        for run in 0..cfg.repeats {
            runs += 1;
            let i = find(RegimeName::Independent, n, run);
            let m = find(RegimeName::NoAssumption, n, run);
            let tp = find(RegimeName::TailPositiveProduct, n, run);
            let inside = |a: &[Interval], b: &[Interval]| a.iter().zip(b).all(|(x, y)| x.lo >= y.lo - tol && x.hi <= y.hi + tol);
            if !inside(&i.intervals, &m.intervals) {
                bad_m += 1;
                if example.is_empty() {
                    let k = i.intervals.len() - 1;
                    example = format!(
                        "; e.g. N={n} coordinate {}: independent [{:.3}, {:.3}] vs no-assumption [{:.3}, {:.3}]",
                        k + 1,
                        i.intervals[k].lo,
                        i.intervals[k].hi,
                        m.intervals[k].lo,
                        m.intervals[k].hi
                    );
                }
            }
            if !inside(&i.intervals, &tp.intervals) {
                bad_tp += 1;
            }
        }
    }
    verdict(
        bad_m == 0 && bad_tp == 0,
        format!("{runs} runs: independent not inside no-assumption on {bad_m}, not inside tail-positive on {bad_tp}{example}"),
    )
}

// 10 -----------------------------------------------------------------------

fn closed_forms() -> Result<Verdict> {
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut worst = 0.0f64;
    for d in [2usize, 3, 5, 20] {
        for eps in [0.01, 0.05, 0.1, 0.3] {
            let pi = CopulaSpec::Independence { dim: d }.diagonal_inverse(1.0 - eps)?;
            let w = CopulaSpec::LowerBound { dim: d }.diagonal_inverse(1.0 - eps)?;
            worst = worst.max((pi - (1.0 - eps).powf(1.0 / d as f64)).abs());
            worst = worst.max((w - (1.0 - eps / d as f64)).abs());
        }
    }
    for s in [0.5, 1.0, 3.0] {
        for eps in [0.01, 0.1, 0.5] {
            let c = ParametricFamily::gamma(1.0, s)?.cvar(eps)?;
            worst = worst.max((c - s * (1.0 - eps.ln())).abs());
        }
    }
    for (mu, sigma) in [(0.0, 1.0), (1.5, 0.3), (-2.0, 4.0)] {
        for eps in [0.001, 0.05, 0.1, 0.5, 0.9] {
            let z = Normal::standard().inverse_cdf(1.0 - eps);
            let v = ParametricFamily::normal(mu, sigma)?.var(eps)?;
            worst = worst.max((v - (mu + sigma * z)).abs());
        }
    }
    verdict(worst < 1e-8, format!("max error {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Verdict>); 10] = [
        ("asset-model closed form", asset_closed_form),
        ("kingman bound", kingman),
        ("queue bound sd ordering and validity", queue_sd_ordering),
        ("portfolio out-of-sample values", portfolio),
        ("coverage and implication frequencies", guarantees),
        ("var dominance of built sets", var_dominance),
        ("oracle equivalence", oracle_equivalence),
        ("convergence in sample size", convergence),
        ("subset property", subset_property),
        ("closed-form spot checks", closed_forms),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} ({:.1}s) {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
