//! Uncertainty sets built from credible regions, with membership tests,
//! support functions and Hausdorff distances.
//!
//! Two shapes are supported. A discrete mixture polytope
//! `{Σ q_j r_j : q ∈ Δ_n, ε q <= θ, θ ∈ Θ ∩ Δ_n}` for laws with known finite
//! support, and a coordinate box whose endpoints are the extremes of a
//! per-coordinate risk functional over each marginal's parameter box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{CredibleRegion, Interval, MarginalFit, ParametricModel};
use crate::copulas::DependenceRegime;
use crate::distributions::RandomSource;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::linprog::{solve_lp, Direction, LinearProgram, LpStatus, Sense};
use crate::optim::golden_min;

const GRID_POINTS: usize = 101;
const CUT_LIMIT: usize = 200;
const CUT_GAP: f64 = 1e-9;
const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMeasure {
    Var,
    Cvar,
}

/// A marginal model together with a box of plausible parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub model: ParametricModel,
    pub params: Vec<Interval>,
}

impl MarginalSpec {
    pub fn new(model: ParametricModel, params: Vec<Interval>) -> Result<Self> {
        if params.len() != model.dim() {
            return Err(Error::input(format!("{} parameter intervals for a {}-parameter model", params.len(), model.dim())));
        }
        if let Some(iv) = params.iter().find(|iv| !(iv.lo <= iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite()) {
            return Err(Error::input(format!("invalid parameter interval [{}, {}]", iv.lo, iv.hi)));
        }
        Ok(MarginalSpec { model, params })
    }

    pub fn from_fit(model: &ParametricModel, fit: &MarginalFit) -> Result<Self> {
        MarginalSpec::new(model.clone(), fit.intervals.clone())
    }

    /// Degenerate box at a single parameter value.
    pub fn point(model: ParametricModel, theta: &[f64]) -> Result<Self> {
        MarginalSpec::new(model, theta.iter().map(|t| Interval::point(*t)).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    DiscreteMixture { support: Vec<Vec<f64>>, region: CredibleRegion, eps: f64 },
    CoordinateBox { intervals: Vec<Interval>, regime: String, measure: RiskMeasure, levels: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertaintySet {
    pub kind: SetKind,
    pub clip: Option<Vec<Interval>>,
}

/// Mixture polytope over the finite support `r_1..r_n` (rows of `support`).
pub fn build_discrete(region: &CredibleRegion, support: &[Vec<f64>], eps: f64) -> Result<UncertaintySet> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    if support.is_empty() {
        return Err(Error::input("support must contain at least one point"));
    }
    let d = support[0].len();
    if d == 0 || support.iter().any(|r| r.len() != d || r.iter().any(|x| !x.is_finite())) {
        return Err(Error::input("support points must be finite and share one dimension"));
    }
    if region.dim() != support.len() {
        return Err(Error::input(format!("region over {} weights for {} support points", region.dim(), support.len())));
    }
    match region {
        CredibleRegion::Box { simplex: true, .. } | CredibleRegion::Ellipsoid { .. } => {}
        CredibleRegion::Box { .. } => return Err(Error::input("box region must carry the simplex condition")),
        CredibleRegion::Product { .. } => return Err(Error::input("product regions are not supported over the simplex")),
    }
    let set = UncertaintySet {
        kind: SetKind::DiscreteMixture { support: support.to_vec(), region: region.clone(), eps },
        clip: None,
    };
    if !set.discrete_nonempty()? {
        return Err(Error::InfeasibleRegion);
    }
    Ok(set)
}

/// Coordinate box for `regime` at joint level `eps`.
pub fn build_coordinate_box(regime: &DependenceRegime, marginals: &[MarginalSpec], eps: f64) -> Result<UncertaintySet> {
    let d = marginals.len();
    let level = regime.coordinate_level(eps, d)?;
    let measure = if regime.uses_cvar() { RiskMeasure::Cvar } else { RiskMeasure::Var };
    build_coordinate_box_with_levels(marginals, &vec![level; d], measure, regime.name())
}

/// Coordinate box with explicit per-coordinate levels. Each interval runs
/// from the smallest lower-tail value to the largest upper-tail value of the
/// risk functional over the marginal's parameter box.
pub fn build_coordinate_box_with_levels(
    marginals: &[MarginalSpec],
    levels: &[f64],
    measure: RiskMeasure,
    tag: &str,
) -> Result<UncertaintySet> {
    if marginals.is_empty() {
        return Err(Error::input("at least one marginal is required"));
    }
    if levels.len() != marginals.len() {
        return Err(Error::input(format!("{} levels for {} marginals", levels.len(), marginals.len())));
    }
    let intervals = marginals
        .iter()
        .zip(levels)
        .map(|(m, &a)| coordinate_interval(m, a, measure))
        .collect::<Result<Vec<_>>>()?;
    Ok(UncertaintySet {
        kind: SetKind::CoordinateBox { intervals, regime: tag.to_string(), measure, levels: levels.to_vec() },
        clip: None,
    })
}

/// `[min_θ lower-tail value, max_θ upper-tail value]` for one coordinate.
pub fn coordinate_interval(m: &MarginalSpec, level: f64, measure: RiskMeasure) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("coordinate level must lie in (0, 1), got {level}")));
    }
    let value = |theta: &[f64], upper: bool| -> Result<f64> {
        let fam = m.model.family(theta)?;
        match (measure, upper) {
            (RiskMeasure::Var, true) => fam.var(level),
            (RiskMeasure::Var, false) => fam.lower_var(level),
            (RiskMeasure::Cvar, true) => fam.cvar(level),
            (RiskMeasure::Cvar, false) => fam.lower_cvar(level),
        }
    };
    let hi = extremize(&|t| value(t, true), &m.params)?;
    let lo = -extremize(&|t| value(t, false).map(|v| -v), &m.params)?;
    Ok(Interval::new(lo, hi))
}

/// Maximum of `f` over a box of one or two parameters: a dense grid, then a
/// golden-section pass per coordinate around the best grid cell.
fn extremize(f: &dyn Fn(&[f64]) -> Result<f64>, params: &[Interval]) -> Result<f64> {
    let k = params.len();
    if k == 0 || k > 2 {
        return Err(Error::input(format!("grid search supports one or two parameters, got {k}")));
    }
    let axes: Vec<Vec<f64>> = params
        .iter()
        .map(|iv| {
            if iv.width() == 0.0 {
                vec![iv.lo]
            } else {
                (0..GRID_POINTS).map(|i| iv.lo + iv.width() * i as f64 / (GRID_POINTS - 1) as f64).collect()
            }
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = vec![0usize; k];
    let mut idx = vec![0usize; k];
    loop {
        let theta: Vec<f64> = (0..k).map(|c| axes[c][idx[c]]).collect();
        let v = f(&theta)?;
        if v > best {
            best = v;
            best_idx = idx.clone();
        }
        let mut c = 0;
        loop {
            if c == k {
                break;
            }
            idx[c] += 1;
            if idx[c] < axes[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == k {
            break;
        }
    }
    let mut theta: Vec<f64> = (0..k).map(|c| axes[c][best_idx[c]]).collect();
    for c in 0..k {
        let ax = &axes[c];
        if ax.len() < 3 {
            continue;
        }
        let i = best_idx[c];
        let a = ax[i.saturating_sub(1)];
        let b = ax[(i + 1).min(ax.len() - 1)];
        let mut probe = theta.clone();
        let (x, fx) = golden_min(
            &mut |x| {
                probe[c] = x;
                f(&probe).map(|v| -v).unwrap_or(f64::INFINITY)
            },
            a,
            b,
            1e-12 * (1.0 + a.abs().max(b.abs())),
            200,
        );
        if -fx > best {
            best = -fx;
            theta[c] = x;
        }
    }
    Ok(best)
}

/// Intersect a set with an axis-aligned box.
pub fn clip_to_support(set: &UncertaintySet, bounds: &[Interval]) -> Result<UncertaintySet> {
    if bounds.len() != set.dim() {
        return Err(Error::input(format!("clip box has dimension {}, set has {}", bounds.len(), set.dim())));
    }
    if bounds.iter().any(|b| b.lo > b.hi) {
        return Err(Error::EmptySet("clip box has an empty side".into()));
    }
    let clip: Vec<Interval> = match &set.clip {
        Some(old) => old.iter().zip(bounds).map(|(a, b)| Interval::new(a.lo.max(b.lo), a.hi.min(b.hi))).collect(),
        None => bounds.to_vec(),
    };
    if clip.iter().any(|b| b.lo > b.hi) {
        return Err(Error::EmptySet("clip boxes do not intersect".into()));
    }
    match &set.kind {
        SetKind::CoordinateBox { intervals, regime, measure, levels } => {
            let cut: Vec<Interval> =
                intervals.iter().zip(&clip).map(|(a, b)| Interval::new(a.lo.max(b.lo), a.hi.min(b.hi))).collect();
            if let Some(k) = cut.iter().position(|iv| iv.lo > iv.hi) {
                return Err(Error::EmptySet(format!("coordinate {k} is empty after clipping")));
            }
            Ok(UncertaintySet {
                kind: SetKind::CoordinateBox {
                    intervals: cut,
                    regime: regime.clone(),
                    measure: *measure,
                    levels: levels.clone(),
                },
                clip: Some(clip),
            })
        }
        SetKind::DiscreteMixture { .. } => {
            let out = UncertaintySet { kind: set.kind.clone(), clip: Some(clip) };
            if !out.discrete_nonempty()? {
                return Err(Error::EmptySet("clip box misses the mixture polytope".into()));
            }
            Ok(out)
        }
    }
}

/// `sup_{ξ ∈ Ξ} vᵀξ`.
pub fn support_function(set: &UncertaintySet, v: &[f64]) -> Result<f64> {
    set.support(v)
}

impl UncertaintySet {
    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::DiscreteMixture { support, .. } => support[0].len(),
            SetKind::CoordinateBox { intervals, .. } => intervals.len(),
        }
    }

    pub fn is_box(&self) -> bool {
        matches!(self.kind, SetKind::CoordinateBox { .. })
    }

    /// Box intervals, if this is a coordinate box.
    pub fn intervals(&self) -> Option<&[Interval]> {
        match &self.kind {
            SetKind::CoordinateBox { intervals, .. } => Some(intervals),
            SetKind::DiscreteMixture { .. } => None,
        }
    }

    pub fn support(&self, v: &[f64]) -> Result<f64> {
        Ok(self.support_with_point(v)?.0)
    }

    /// Support value together with a maximizing point.
    pub fn support_with_point(&self, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        if v.len() != self.dim() {
            return Err(Error::input(format!("direction has dimension {}, set has {}", v.len(), self.dim())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("direction must be finite"));
        }
        match &self.kind {
            SetKind::CoordinateBox { intervals, .. } => {
                let point: Vec<f64> = intervals.iter().zip(v).map(|(iv, vi)| if *vi < 0.0 { iv.lo } else { iv.hi }).collect();
                let value = intervals.iter().zip(v).map(|(iv, vi)| (vi * iv.lo).max(vi * iv.hi)).sum();
                Ok((value, point))
            }
            SetKind::DiscreteMixture { support, region, eps } => {
                let c: Vec<f64> = support.iter().map(|r| dot(r, v)).collect();
                let (value, q) = self.discrete_support(&c, support, region, *eps)?;
                let point = (0..self.dim()).map(|k| support.iter().zip(&q).map(|(r, qj)| r[k] * qj).sum()).collect();
                Ok((value, point))
            }
        }
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> Result<bool> {
        if xi.len() != self.dim() {
            return Err(Error::input(format!("point has dimension {}, set has {}", xi.len(), self.dim())));
        }
        if let Some(clip) = &self.clip {
            if xi.iter().zip(clip).any(|(x, b)| !b.contains(*x, tol)) {
                return Ok(false);
            }
        }
        match &self.kind {
            SetKind::CoordinateBox { intervals, .. } => Ok(xi.iter().zip(intervals).all(|(x, iv)| iv.contains(*x, tol))),
            SetKind::DiscreteMixture { support, region, eps } => {
                let n = support.len();
                let mut lp = self.discrete_lp(support, region, *eps, 1, false);
                for k in 0..xi.len() {
                    let mut row = vec![0.0; 2 * n + 1];
                    for j in 0..n {
                        row[j] = support[j][k];
                    }
                    lp.add_row(row.clone(), Sense::Le, xi[k] + tol);
                    lp.add_row(row, Sense::Ge, xi[k] - tol);
                }
                self.feasible_with_region(lp, region)
            }
        }
    }

    /// Hausdorff distance. Exact between two boxes; otherwise the largest
    /// support-function gap over the given unit directions.
    pub fn hausdorff(&self, other: &UncertaintySet, directions: &[Vec<f64>]) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::input("sets have different dimensions"));
        }
        if let (Some(a), Some(b)) = (self.intervals(), other.intervals()) {
            return Ok(hausdorff_boxes(a, b));
        }
        let mut best = 0.0f64;
        for v in directions {
            best = best.max((self.support(v)? - other.support(v)?).abs());
        }
        Ok(best)
    }

    fn discrete_nonempty(&self) -> Result<bool> {
        let SetKind::DiscreteMixture { support, region, eps } = &self.kind else {
            return Ok(true);
        };
        let lp = self.discrete_lp(support, region, *eps, 1, true);
        self.feasible_with_region(lp, region)
    }

    /// Variables `(q, θ, extra...)` with the simplex, cap and clip rows and
    /// the region's bounding box on `θ`.
    pub(crate) fn discrete_lp(&self, support: &[Vec<f64>], region: &CredibleRegion, eps: f64, extra: usize, with_clip: bool) -> LinearProgram {
        let n = support.len();
        let nv = 2 * n + extra;
        let mut lp = LinearProgram::new(Direction::Maximize, vec![0.0; nv]);
        let mut row = vec![0.0; nv];
        row[..n].iter_mut().for_each(|x| *x = 1.0);
        lp.add_row(row, Sense::Eq, 1.0);
        let mut row = vec![0.0; nv];
        row[n..2 * n].iter_mut().for_each(|x| *x = 1.0);
        lp.add_row(row, Sense::Eq, 1.0);
        for j in 0..n {
            let mut row = vec![0.0; nv];
            row[j] = eps;
            row[n + j] = -1.0;
            lp.add_row(row, Sense::Le, 0.0);
            lp.set_bounds(j, 0.0, 1.0);
        }
        for (j, iv) in region.bounding_box().iter().enumerate() {
            lp.set_bounds(n + j, iv.lo.max(0.0), iv.hi.min(1.0).max(iv.lo.max(0.0)));
        }
        if with_clip {
            if let Some(clip) = &self.clip {
                for (k, b) in clip.iter().enumerate() {
                    let mut row = vec![0.0; nv];
                    for j in 0..n {
                        row[j] = support[j][k];
                    }
                    if b.lo.is_finite() {
                        lp.add_row(row.clone(), Sense::Ge, b.lo);
                    }
                    if b.hi.is_finite() {
                        lp.add_row(row, Sense::Le, b.hi);
                    }
                }
            }
        }
        lp
    }

    /// Feasibility of `lp` (whose last variable is an unused slot) with `θ`
    /// additionally restricted to the region.
    fn feasible_with_region(&self, mut lp: LinearProgram, region: &CredibleRegion) -> Result<bool> {
        match region {
            CredibleRegion::Ellipsoid { center, info, radius, .. } => {
                let n = center.len();
                let t = lp.num_vars() - 1;
                lp.c[t] = 1.0;
                lp.direction = Direction::Minimize;
                lp.set_bounds(t, 0.0, f64::INFINITY);
                let r2 = radius * radius;
                for _ in 0..CUT_LIMIT {
                    let sol = solve_lp(&lp)?;
                    match sol.status {
                        LpStatus::Infeasible => return Ok(false),
                        LpStatus::Unbounded => return Err(Error::Solver("unbounded cutting-plane master".into())),
                        LpStatus::Optimal => {}
                    }
                    let theta = &sol.x[n..2 * n];
                    let diff: Vec<f64> = theta.iter().zip(center).map(|(a, b)| a - b).collect();
                    let h = info.quad_form(&diff);
                    if h <= r2 * (1.0 + MEMBER_TOL) + 1e-14 {
                        return Ok(true);
                    }
                    if sol.objective > r2 * (1.0 + MEMBER_TOL) + 1e-14 {
                        return Ok(false);
                    }
                    // t >= h + gᵀ(θ - θ_k) with g = 2 I (θ_k - c)
                    let g: Vec<f64> = info.mul_vec(&diff).iter().map(|x| 2.0 * x).collect();
                    let mut row = vec![0.0; lp.num_vars()];
                    row[n..2 * n].copy_from_slice(&g);
                    row[t] = -1.0;
                    lp.add_row(row, Sense::Le, dot(&g, theta) - h);
                }
                Err(Error::BoundStall { best_bound: f64::NAN, gap: f64::NAN })
            }
            _ => Ok(solve_lp(&lp)?.status == LpStatus::Optimal),
        }
    }

    fn discrete_support(&self, c: &[f64], support: &[Vec<f64>], region: &CredibleRegion, eps: f64) -> Result<(f64, Vec<f64>)> {
        let n = support.len();
        let mut lp = self.discrete_lp(support, region, eps, 0, true);
        lp.c[..n].copy_from_slice(c);
        match region {
            CredibleRegion::Ellipsoid { center, info, radius, .. } => {
                self.cutting_plane_support(lp, c, support, eps, center, info, *radius)
            }
            _ => {
                let sol = solve_lp(&lp)?;
                match sol.status {
                    LpStatus::Optimal => Ok((sol.objective, sol.x[..n].to_vec())),
                    LpStatus::Infeasible => Err(Error::Infeasible),
                    LpStatus::Unbounded => Err(Error::Unbounded),
                }
            }
        }
    }

    /// Outer approximation of `θ ∈ ellipsoid` by tangent cuts. Each iterate is
    /// pulled radially into the ellipsoid to get a feasible lower bound, and
    /// the loop stops once the two bounds meet. The upper bound is returned.
    #[allow(clippy::too_many_arguments)]
    fn cutting_plane_support(
        &self,
        mut lp: LinearProgram,
        c: &[f64],
        support: &[Vec<f64>],
        eps: f64,
        center: &[f64],
        info: &Matrix,
        radius: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let n = center.len();
        let center_ok = center.iter().all(|x| *x >= 0.0) && (center.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        let mut q_best = vec![0.0; n];
        for _ in 0..CUT_LIMIT {
            let sol = solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::Infeasible),
                LpStatus::Unbounded => return Err(Error::Unbounded),
            }
            if sol.objective < upper {
                upper = sol.objective;
                q_best = sol.x[..n].to_vec();
            }
            let theta = &sol.x[n..2 * n];
            let d: Vec<f64> = theta.iter().zip(center).map(|(a, b)| a - b).collect();
            let m = info.quad_form(&d).max(0.0).sqrt();
            if m <= radius * (1.0 + 1e-12) {
                return Ok((upper, q_best));
            }
            if center_ok {
                let p: Vec<f64> = center.iter().zip(&d).map(|(c0, di)| c0 + di * radius / m).collect();
                if let Some(v) = self.best_mixture(c, support, eps, &p)? {
                    lower = lower.max(v);
                }
            }
            if upper - lower <= CUT_GAP * (1.0 + upper.abs()) {
                return Ok((upper, q_best));
            }
            let w: Vec<f64> = info.mul_vec(&d).iter().map(|x| x / m).collect();
            let mut row = vec![0.0; lp.num_vars()];
            row[n..2 * n].copy_from_slice(&w);
            lp.add_row(row, Sense::Le, radius + dot(&w, center));
        }
        Err(Error::BoundStall { best_bound: upper, gap: upper - lower })
    }

    /// `max cᵀq` over `q ∈ Δ_n, ε q <= θ` (and the clip rows) for fixed `θ`.
    fn best_mixture(&self, c: &[f64], support: &[Vec<f64>], eps: f64, theta: &[f64]) -> Result<Option<f64>> {
        if self.clip.is_none() {
            return Ok(Some(capped_mixture_max(c, theta, eps)));
        }
        let n = c.len();
        let mut lp = LinearProgram::new(Direction::Maximize, c.to_vec());
        lp.add_row(vec![1.0; n], Sense::Eq, 1.0);
        for j in 0..n {
            lp.set_bounds(j, 0.0, (theta[j] / eps).min(1.0));
        }
        if let Some(clip) = &self.clip {
            for (k, b) in clip.iter().enumerate() {
                let row: Vec<f64> = support.iter().map(|r| r[k]).collect();
                if b.lo.is_finite() {
                    lp.add_row(row.clone(), Sense::Ge, b.lo);
                }
                if b.hi.is_finite() {
                    lp.add_row(row, Sense::Le, b.hi);
                }
            }
        }
        let sol = solve_lp(&lp)?;
        Ok((sol.status == LpStatus::Optimal).then_some(sol.objective))
    }
}

/// `max cᵀq` over `q ∈ Δ_n, q <= θ/ε`: fill the largest `c_j` first.
/// This is `CVaR_ε` of the discrete law putting mass `θ_j` on `c_j`.
pub fn capped_mixture_max(c: &[f64], theta: &[f64], eps: f64) -> f64 {
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c[b].total_cmp(&c[a]));
    let mut left = 1.0;
    let mut value = 0.0;
    for j in order {
        if left <= 0.0 {
            break;
        }
        let take = (theta[j].max(0.0) / eps).min(left);
        value += take * c[j];
        left -= take;
    }
    value
}

/// Exact Euclidean Hausdorff distance between two boxes.
pub fn hausdorff_boxes(a: &[Interval], b: &[Interval]) -> f64 {
    let one_way = |x: &[Interval], y: &[Interval]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(p, q)| {
                let gap = (q.lo - p.lo).max(p.hi - q.hi).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    };
    one_way(a, b).max(one_way(b, a))
}

/// `n` directions drawn uniformly from the unit sphere in `R^d`.
pub fn random_directions(d: usize, n: usize, src: &RandomSource) -> Vec<Vec<f64>> {
    let mut rng = src.rng();
    (0..n)
        .map(|_| loop {
            let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let norm = crate::linalg::norm2(&g);
            if norm > 1e-12 {
                break g.iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}
