//! Unconstrained smooth minimization: BFGS with backtracking line search,
//! and a few one-dimensional helpers.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Lu, Matrix};

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub gradient_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iterations: 500, gradient_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
}

/// Central-difference gradient with per-coordinate step `max(1e-5, 1e-5 |x_k|)`.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            let h = fd_step(x[k]);
            xp[k] = x[k] + h;
            let fp = f(&xp);
            xp[k] = x[k] - h;
            let fm = f(&xp);
            xp[k] = x[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub fn fd_step(xk: f64) -> f64 {
    1e-5f64.max(1e-5 * xk.abs())
}

/// Symmetrized central-difference Jacobian of a gradient field.
pub fn fd_hessian(grad: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Matrix {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        let step = fd_step(x[k]);
        xp[k] = x[k] + step;
        let gp = grad(&xp);
        xp[k] = x[k] - step;
        let gm = grad(&xp);
        xp[k] = x[k];
        for i in 0..n {
            h[(i, k)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    h.symmetrize();
    h
}

/// Minimize `f` from `x0`. Points where `f` is not finite are treated as
/// outside the domain and rejected by the line search.
///
/// Convergence is declared when `|grad| <= tol_eff`, where `tol_eff` is the
/// requested tolerance raised to the finite-precision floor `1e-10 |f|` of
/// objectives whose magnitude makes the requested tolerance unreachable.
pub fn bfgs(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &BfgsOptions,
) -> Result<Minimum> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::domain("objective is not finite at the starting point"));
    }
    let mut g = grad(&x);
    let mut hinv = Matrix::identity(n);
    let mut first = true;
    let tol_of = |fx: f64| opts.gradient_tol.max(1e-10 * fx.abs());

    for it in 0..opts.max_iterations {
        let gn = norm2(&g);
        if !gn.is_finite() {
            return Err(Error::Convergence { iterations: it, gradient_norm: gn });
        }
        if gn <= tol_of(fx) {
            return Ok(Minimum { x, value: fx, gradient: g, iterations: it });
        }
        let mut p: Vec<f64> = hinv.mul_vec(&g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            hinv = Matrix::identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let fnew = f(&xn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // Line search exhausted: we are at the noise floor of f.
            return newton_polish(f, grad, x, fx, g, it, opts);
        };
        let gnew = grad(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        if ys > 1e-14 * norm2(&y) * norm2(&s) {
            if first {
                let scale = ys / dot(&y, &y);
                hinv = Matrix::identity(n);
                for i in 0..n {
                    hinv[(i, i)] = scale;
                }
                first = false;
            }
            bfgs_update(&mut hinv, &s, &y, ys);
        }
        x = xn;
        fx = fnew;
        g = gnew;
    }
    newton_polish(f, grad, x, fx, g, opts.max_iterations, opts)
}

fn bfgs_update(hinv: &mut Matrix, s: &[f64], y: &[f64], ys: f64) {
    let n = s.len();
    let rho = 1.0 / ys;
    let hy = hinv.mul_vec(y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            hinv[(i, j)] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// A few Newton steps on a finite-difference Hessian, kept only while they
/// reduce the gradient norm without increasing `f` beyond its noise.
fn newton_polish(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    mut x: Vec<f64>,
    mut fx: f64,
    mut g: Vec<f64>,
    iterations: usize,
    opts: &BfgsOptions,
) -> Result<Minimum> {
    for _ in 0..5 {
        let gn = norm2(&g);
        if gn <= opts.gradient_tol.max(1e-10 * fx.abs()) {
            return Ok(Minimum { x, value: fx, gradient: g, iterations });
        }
        let h = fd_hessian(grad, &x);
        let Ok(lu) = Lu::factor(&h, 1e-300) else { break };
        let step = lu.solve(&g);
        let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a - b).collect();
        let fnew = f(&xn);
        let gnew = grad(&xn);
        if !fnew.is_finite() || norm2(&gnew) >= gn || fnew > fx + 1e-12 * fx.abs().max(1.0) {
            break;
        }
        x = xn;
        fx = fnew;
        g = gnew;
    }
    let gn = norm2(&g);
    if gn <= opts.gradient_tol.max(1e-10 * fx.abs()) {
        Ok(Minimum { x, value: fx, gradient: g, iterations })
    } else {
        Err(Error::Convergence { iterations, gradient_norm: gn })
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
