//! Dense two-phase bounded-variable primal simplex.
//!
//! Every row is turned into an equality with a signed slack, nonbasic
//! variables rest at one of their bounds (free ones at zero), and phase one
//! drives a set of artificials to zero. Pricing is Dantzig's rule, switching
//! permanently to Bland's rule after a run of degenerate pivots. The basis
//! inverse is kept dense, updated per pivot and rebuilt from an LU
//! factorization every [`REFACTOR_EVERY`] pivots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

pub const PIVOT_TOL: f64 = 1e-10;
pub const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// `opt cᵀx  s.t.  a_i x (<=|=|>=) b_i,  lo <= x <= hi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProgram {
    pub direction: Direction,
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl LinearProgram {
    /// Problem with objective `c` and default bounds `x >= 0`.
    pub fn new(direction: Direction, c: Vec<f64>) -> Self {
        let n = c.len();
        LinearProgram {
            direction,
            c,
            rows: Vec::new(),
            senses: Vec::new(),
            b: Vec::new(),
            lo: vec![0.0; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.rows.push(row);
        self.senses.push(sense);
        self.b.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) -> &mut Self {
        self.lo[j] = lo;
        self.hi[j] = hi;
        self
    }

    pub fn free(&mut self, j: usize) -> &mut Self {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        let m = self.rows.len();
        if self.senses.len() != m || self.b.len() != m || self.lo.len() != n || self.hi.len() != n {
            return Err(Error::input("linear program dimensions are inconsistent"));
        }
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("constraint row length differs from the number of variables"));
        }
        let finite = self.c.iter().chain(self.b.iter()).chain(self.rows.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::input("linear program data must be finite"));
        }
        for j in 0..n {
            if self.lo[j].is_nan() || self.hi[j].is_nan() || self.lo[j] > self.hi[j] {
                return Err(Error::input(format!("variable {j} has bounds lo > hi")));
            }
            if self.lo[j] == f64::INFINITY || self.hi[j] == f64::NEG_INFINITY {
                return Err(Error::input(format!("variable {j} has an empty bound interval")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.c, x)
    }

    /// Largest violation of a row or a bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            let ax = crate::linalg::dot(row, x);
            let v = match self.senses[i] {
                Sense::Le => ax - self.b[i],
                Sense::Ge => self.b[i] - ax,
                Sense::Eq => (ax - self.b[i]).abs(),
            };
            worst = worst.max(v);
        }
        for j in 0..x.len() {
            worst = worst.max(self.lo[j] - x[j]).max(x[j] - self.hi[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row multipliers: `∂ objective / ∂ b_i` in the problem's own direction.
    pub y: Vec<f64>,
    /// `c - Aᵀ y`.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn status_only(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            y: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            iterations,
        }
    }

    /// Lagrangian dual bound `bᵀy + Σ_j opt_{lo_j <= x_j <= hi_j} r_j x_j`.
    pub fn dual_objective(&self, p: &LinearProgram) -> f64 {
        let sign = match p.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let mut val = crate::linalg::dot(&p.b, &self.y);
        for j in 0..p.num_vars() {
            // In minimization form, minimize (sign * r_j) x_j over the bounds.
            let r = sign * self.reduced_costs[j];
            let term = if r.abs() <= OPT_TOL {
                r * self.x[j]
            } else if r > 0.0 {
                r * p.lo[j]
            } else {
                r * p.hi[j]
            };
            val += sign * term;
        }
        val
    }

    /// Largest `|r_j| * distance of x_j to the bound its sign selects`, plus row slack times multiplier.
    pub fn complementarity(&self, p: &LinearProgram) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in p.rows.iter().enumerate() {
            let slack = crate::linalg::dot(row, &self.x) - p.b[i];
            worst = worst.max((slack * self.y[i]).abs());
        }
        let sign = match p.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        for j in 0..p.num_vars() {
            let r = sign * self.reduced_costs[j];
            let gap = if r > 0.0 { self.x[j] - p.lo[j] } else { p.hi[j] - self.x[j] };
            if r != 0.0 && gap.is_finite() {
                worst = worst.max((r * gap).abs());
            } else if r.abs() > OPT_TOL {
                worst = f64::INFINITY;
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable resting at zero.
    AtZero,
}

struct Tableau {
    m: usize,
    cols: Vec<Vec<f64>>, // column-major full constraint matrix
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Matrix,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    degenerate_run: usize,
    bland: bool,
    bland_after: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn n_total(&self) -> usize {
        self.cols.len()
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut bmat = Matrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bmat[(i, k)] = self.cols[j][i];
            }
        }
        let lu = Lu::factor(&bmat, 1e-13).map_err(|e| Error::Solver(format!("basis refactorization failed: {e}")))?;
        self.binv = lu.inverse();
        self.since_refactor = 0;
        Ok(())
    }

    fn binv_col(&self, j: usize) -> Vec<f64> {
        let col = &self.cols[j];
        (0..self.m)
            .map(|i| self.binv.row(i).iter().zip(col).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.n_total() {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for (r, a) in rhs.iter_mut().zip(&self.cols[j]) {
                    *r -= a * self.x[j];
                }
            }
        }
        let xb = self.binv.mul_vec(&rhs);
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[k];
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        self.binv.tmul_vec(&cb)
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Primal simplex on `min costᵀx`; `eligible[j]` gates which columns may enter.
    fn run(&mut self, cost: &[f64], eligible: &[bool]) -> Result<Outcome> {
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Solver(format!("iteration limit {} reached", self.max_iterations)));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            self.recompute_basic_values();
            let y = self.duals(cost);

            // Pricing.
            let mut enter: Option<(usize, f64, f64)> = None; // (j, direction, |d_j|)
            for j in 0..self.n_total() {
                if !eligible[j] || self.state[j] == VarState::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                let dir = match self.state[j] {
                    VarState::AtLower if d < -OPT_TOL => 1.0,
                    VarState::AtUpper if d > OPT_TOL => -1.0,
                    VarState::AtZero if d.abs() > OPT_TOL => -d.signum(),
                    _ => continue,
                };
                if self.bland {
                    enter = Some((j, dir, d.abs()));
                    break;
                }
                if enter.is_none_or(|(_, _, best)| d.abs() > best) {
                    enter = Some((j, dir, d.abs()));
                }
            }
            let Some((q, dir, _)) = enter else {
                return Ok(Outcome::Optimal);
            };

            // Ratio test.
            let alpha = self.binv_col(q);
            let mut step = self.hi[q] - self.lo[q]; // bound flip
            let mut leave: Option<(usize, bool)> = None; // (basis row, leaves at upper)
            let mut leave_pivot = 0.0;
            for (k, &a) in alpha.iter().enumerate() {
                let rate = a * dir; // x_B[k] decreases by rate * t
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basis[k];
                let (limit, at_upper) = if rate > 0.0 {
                    if self.lo[j] == f64::NEG_INFINITY {
                        continue;
                    }
                    (((self.x[j] - self.lo[j]) / rate).max(0.0), false)
                } else {
                    if self.hi[j] == f64::INFINITY {
                        continue;
                    }
                    (((self.hi[j] - self.x[j]) / -rate).max(0.0), true)
                };
                let better = if limit < step - 1e-12 {
                    true
                } else if limit <= step + 1e-12 && leave.is_some() {
                    if self.bland {
                        j < self.basis[leave.unwrap().0]
                    } else {
                        rate.abs() > leave_pivot
                    }
                } else {
                    false
                };
                if better {
                    step = limit;
                    leave = Some((k, at_upper));
                    leave_pivot = rate.abs();
                }
            }
            if step == f64::INFINITY {
                return Ok(Outcome::Unbounded);
            }

            self.iterations += 1;
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > self.bland_after {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }

            match leave {
                None => {
                    // Entering variable jumps to its opposite bound.
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, at_upper)) => {
                    let out = self.basis[r];
                    self.x[q] += dir * step;
                    self.state[out] = if at_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.x[out] = if at_upper { self.hi[out] } else { self.lo[out] };
                    self.pivot(r, q, &alpha);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let piv = alpha[r];
        let m = self.m;
        let row_r: Vec<f64> = self.binv.row(r).iter().map(|v| v / piv).collect();
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                let row = self.binv.row_mut(i);
                for (v, rr) in row.iter_mut().zip(&row_r) {
                    *v -= f * rr;
                }
            }
        }
        self.binv.row_mut(r).copy_from_slice(&row_r);
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        self.since_refactor += 1;
    }
}

/// Solve a linear program. `Infeasible`/`Unbounded` are statuses, not errors;
/// an error means the solver itself failed (iteration cap, singular basis,
/// or a solution that does not certify).
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.num_rows();
    let sign = match p.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };

    // Columns: structural, then one slack per inequality row, then one artificial per row.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| p.rows.iter().map(|r| r[j]).collect()).collect();
    let mut lo = p.lo.clone();
    let mut hi = p.hi.clone();
    let mut slack_of_row = vec![None; m];
    for i in 0..m {
        let coef = match p.senses[i] {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => continue,
        };
        let mut col = vec![0.0; m];
        col[i] = coef;
        slack_of_row[i] = Some((cols.len(), coef));
        cols.push(col);
        lo.push(0.0);
        hi.push(f64::INFINITY);
    }
    let n_real = cols.len();

    let mut x = vec![0.0; n_real];
    let mut state = vec![VarState::AtLower; n_real];
    for j in 0..n_real {
        if lo[j].is_finite() {
            x[j] = lo[j];
            state[j] = VarState::AtLower;
        } else if hi[j].is_finite() {
            x[j] = hi[j];
            state[j] = VarState::AtUpper;
        } else {
            x[j] = 0.0;
            state[j] = VarState::AtZero;
        }
    }

    // Residual with all structurals at their resting values.
    let mut resid = p.b.clone();
    for j in 0..n {
        if x[j] != 0.0 {
            for i in 0..m {
                resid[i] -= cols[j][i] * x[j];
            }
        }
    }

    let mut basis = Vec::with_capacity(m);
    let mut artificial = Vec::new();
    for i in 0..m {
        match slack_of_row[i] {
            Some((s, coef)) if resid[i] * coef >= 0.0 => {
                basis.push(s);
                state[s] = VarState::Basic;
                x[s] = resid[i] * coef;
            }
            _ => {
                let mut col = vec![0.0; m];
                col[i] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
                let a = cols.len();
                cols.push(col);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                x.push(resid[i].abs());
                state.push(VarState::Basic);
                basis.push(a);
                artificial.push(a);
            }
        }
    }
    let n_total = cols.len();

    let mut t = Tableau {
        m,
        cols,
        b: p.b.clone(),
        lo,
        hi,
        x,
        state,
        basis,
        binv: Matrix::identity(m),
        since_refactor: 0,
        iterations: 0,
        max_iterations: 50 * (m + n_total) + 1000,
        degenerate_run: 0,
        bland: false,
        bland_after: 10 * (m + n),
    };
    t.refactor()?;

    // Phase one.
    if !artificial.is_empty() {
        let mut cost1 = vec![0.0; n_total];
        for &a in &artificial {
            cost1[a] = 1.0;
        }
        let eligible = vec![true; n_total];
        match t.run(&cost1, &eligible)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => return Err(Error::Solver("phase one reported unbounded".into())),
        }
        t.recompute_basic_values();
        let infeas: f64 = artificial.iter().map(|&a| t.x[a]).sum();
        let scale = 1.0 + p.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution::status_only(LpStatus::Infeasible, t.iterations));
        }
        // Pin artificials at zero and pivot basic ones out where possible.
        for &a in &artificial {
            t.hi[a] = 0.0;
            if t.state[a] != VarState::Basic {
                t.x[a] = 0.0;
                t.state[a] = VarState::AtLower;
            }
        }
        for r in 0..m {
            let a = t.basis[r];
            if !artificial.contains(&a) {
                continue;
            }
            let row: Vec<f64> = t.binv.row(r).to_vec();
            let candidate = (0..n_real).filter(|&j| t.state[j] != VarState::Basic).find_map(|j| {
                let v: f64 = row.iter().zip(&t.cols[j]).map(|(a, b)| a * b).sum();
                (v.abs() > 1e-7).then_some(j)
            });
            if let Some(j) = candidate {
                let alpha = t.binv_col(j);
                t.x[a] = 0.0;
                t.state[a] = VarState::AtLower;
                t.pivot(r, j, &alpha);
            }
        }
        t.refactor()?;
    }

    // Phase two.
    let mut cost2 = vec![0.0; n_total];
    for j in 0..n {
        cost2[j] = sign * p.c[j];
    }
    let mut eligible = vec![true; n_total];
    for &a in &artificial {
        eligible[a] = false;
    }
    t.degenerate_run = 0;
    let outcome = t.run(&cost2, &eligible)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LpSolution::status_only(LpStatus::Unbounded, t.iterations));
    }

    t.refactor()?;
    t.recompute_basic_values();
    let y_int = t.duals(&cost2);
    let xs: Vec<f64> = t.x[..n].to_vec();
    let y: Vec<f64> = y_int.iter().map(|v| sign * v).collect();
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| p.c[j] - p.rows.iter().zip(&y).map(|(r, yi)| r[j] * yi).sum::<f64>())
        .collect();
    let objective = p.objective_value(&xs);
    let sol = LpSolution { status: LpStatus::Optimal, x: xs, y, reduced_costs, objective, iterations: t.iterations };

    let scale = 1.0 + objective.abs();
    let resid = p.primal_residual(&sol.x);
    if resid > 1e-8 * (1.0 + p.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))) {
        return Err(Error::Solver(format!("primal residual {resid:e} exceeds tolerance")));
    }
    let gap = (sol.dual_objective(p) - objective).abs();
    if !(gap <= 1e-8 * scale) {
        return Err(Error::Solver(format!("duality gap {gap:e} exceeds tolerance")));
    }
    Ok(sol)
}
