//! The forced problem `-y'' + q y = mu y - f`, `y(0) = 0`,
//! `y(pi) cos(beta) + y'(pi) sin(beta) = 0`, solved through
//! `y = (psi(x) * int_0^x f phi + phi(x) * int_x^pi f psi) / W(mu)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::TargetFunction;
use crate::ivp::{default_grid, wronskian_fn, BoundaryParams, Solution, DEFAULT_MESH};
use crate::numeric::{linspace, loglog_slope, simpson_panel, sin_cos_exact, QuadratureRule};
use crate::potential::Potential;
use crate::spectrum::Eigenpair;

/// `|W(mu)|` below this is treated as hitting an eigenvalue.
pub const NEAR_EIGENVALUE_GUARD: f64 = 1e-8;

/// Offsets used for the residue estimate.
pub const RESIDUE_STEPS: [f64; 2] = [1e-3, 1e-4];

/// Radius excluded around every half-integer in the zone check.
pub const ZONE_RADIUS: f64 = 1.0 / 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BvpSolution {
    pub grid: Vec<f64>,
    pub y: Vec<f64>,
    /// `y'` from the derivative of the representation,
    /// `(psi' int f phi + phi' int f psi) / W`.
    pub yprime: Vec<f64>,
    pub mu: f64,
    pub beta: f64,
    pub f: TargetFunction,
}

impl BvpSolution {
    /// `(|y(0)|, |y(pi) cos(beta) + y'(pi) sin(beta)|)`.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let (s, c) = sin_cos_exact(self.beta);
        let last = self.y.len() - 1;
        (self.y[0].abs(), (self.y[last] * c + self.yprime[last] * s).abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.y.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation of `y` at `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let t = (x - g[i - 1]) / (g[i] - g[i - 1]);
        self.y[i - 1] + t * (self.y[i] - self.y[i - 1])
    }
}

fn solution_grid(q: &Potential, f: &TargetFunction) -> Vec<f64> {
    let mut g = default_grid(q, DEFAULT_MESH);
    if let TargetFunction::Sampled { x, .. } = f {
        g.extend(x.iter().map(|v| v.clamp(0.0, PI)));
        g.sort_by(f64::total_cmp);
        g.dedup();
    }
    g
}

/// Solves the forced problem with `alpha = pi` on the default grid plus the
/// target's sample points.
pub fn solve_bvp(q: &Potential, beta: f64, mu: f64, f: &TargetFunction) -> Result<BvpSolution> {
    solve_bvp_on(q, beta, mu, f, &solution_grid(q, f))
}

/// As [`solve_bvp`] on a caller-supplied grid (sorted, from 0 to pi, with
/// every breakpoint). Integrals use Simpson on each grid interval.
pub fn solve_bvp_on(q: &Potential, beta: f64, mu: f64, f: &TargetFunction, grid: &[f64]) -> Result<BvpSolution> {
    f.validate()?;
    let bp = BoundaryParams::new(PI, beta)?;
    let w = wronskian_fn(q, mu, bp);
    if w.abs() <= NEAR_EIGENVALUE_GUARD || w.is_nan() {
        return Err(Error::NearEigenvalue { mu, wronskian: w.abs() });
    }
    let phi = Solution::phi(q, mu, PI);
    let psi = Solution::psi(q, mu, beta);
    let tp = phi.trace(grid)?;
    let ts = psi.trace(grid)?;
    let k = grid.len();

    let mut a = vec![0.0; k]; // int_0^x f phi
    let mut b = vec![0.0; k]; // int_x^pi f psi
    for j in 1..k {
        let (x0, x1) = (grid[j - 1], grid[j]);
        let xm = 0.5 * (x0 + x1);
        let h = x1 - x0;
        a[j] = a[j - 1]
            + simpson_panel(
                h,
                f.eval(x0) * tp.y[j - 1],
                f.eval(xm) * phi.value(xm),
                f.eval(x1) * tp.y[j],
            );
    }
    for j in (0..k - 1).rev() {
        let (x0, x1) = (grid[j], grid[j + 1]);
        let xm = 0.5 * (x0 + x1);
        let h = x1 - x0;
        b[j] = b[j + 1]
            + simpson_panel(
                h,
                f.eval(x0) * ts.y[j],
                f.eval(xm) * psi.value(xm),
                f.eval(x1) * ts.y[j + 1],
            );
    }
    let y = (0..k).map(|j| (ts.y[j] * a[j] + tp.y[j] * b[j]) / w).collect();
    let yprime = (0..k)
        .map(|j| (ts.yprime[j] * a[j] + tp.yprime[j] * b[j]) / w)
        .collect();
    Ok(BvpSolution {
        grid: grid.to_vec(),
        y,
        yprime,
        mu,
        beta,
        f: f.clone(),
    })
}

/// `y(x, mu)` at a single point, reusing the solve on the default grid.
fn y_at(q: &Potential, beta: f64, mu: f64, f: &TargetFunction, x: f64) -> Result<f64> {
    let mut grid = solution_grid(q, f);
    if let Err(pos) = grid.binary_search_by(|g| g.total_cmp(&x)) {
        grid.insert(pos, x);
    }
    let sol = solve_bvp_on(q, beta, mu, f, &grid)?;
    let j = grid.binary_search_by(|g| g.total_cmp(&x)).unwrap();
    Ok(sol.y[j])
}

/// Numerical versus exact residue of `y(x, mu, f)` at `mu_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidueCheck {
    /// Richardson combination of the symmetric averages.
    pub estimate: f64,
    /// One-sided extrapolations from below and above `mu_n`.
    pub left: f64,
    pub right: f64,
    /// `phi_n(x) * int f phi_n / a_n`.
    pub exact: f64,
    /// `|estimate - exact| / (|int f phi_n / a_n| * max |phi_n|)`.
    pub relative_error: f64,
    /// `|left - right|` on the same scale.
    pub side_gap: f64,
}

/// Estimates the residue at `mu_n` from `(mu - mu_n) y` at
/// `mu_n +- h`, `h` in `RESIDUE_STEPS`, and compares it with
/// `phi_n(x) int f phi_n / a_n`.
pub fn residue_check(q: &Potential, beta: f64, eig: &Eigenpair, f: &TargetFunction, x: f64) -> Result<ResidueCheck> {
    let mu_n = eig.mu;
    let [h1, h2] = RESIDUE_STEPS;
    let side = |h: f64| -> Result<f64> { Ok(h * y_at(q, beta, mu_n + h, f, x)?) };
    let (r1, l1) = (side(h1)?, side(-h1)?);
    let (r2, l2) = (side(h2)?, side(-h2)?);
    let sym1 = 0.5 * (r1 + l1);
    let sym2 = 0.5 * (r2 + l2);
    let ratio2 = (h1 / h2).powi(2);
    let estimate = sym2 + (sym2 - sym1) / (ratio2 - 1.0);
    // Linear extrapolation to zero offset from each side.
    let lin = |v1: f64, v2: f64| v2 + (v2 - v1) * h2 / (h1 - h2);
    let left = lin(l1, l2);
    let right = lin(r1, r2);

    let phi_n = Solution::phi(q, mu_n, PI);
    let rule = QuadratureRule::simpson(&quadrature_points(q, f), 8192);
    let coef = rule.integrate(|t| f.eval(t) * phi_n.value(t)) / eig.a;
    let exact = coef * phi_n.value(x);
    let phi_max = linspace(0.0, PI, 2048)
        .iter()
        .fold(0.0f64, |m, &t| m.max(phi_n.value(t).abs()));
    let scale = coef.abs() * phi_max;
    Ok(ResidueCheck {
        estimate,
        left,
        right,
        exact,
        relative_error: (estimate - exact).abs() / scale,
        side_gap: (left - right).abs() / scale,
    })
}

fn quadrature_points(q: &Potential, f: &TargetFunction) -> Vec<f64> {
    let mut p = q.breakpoints().to_vec();
    if let TargetFunction::Sampled { x, .. } = f {
        p.extend_from_slice(x);
    }
    p.sort_by(f64::total_cmp);
    p.dedup();
    p
}

/// Result of sweeping the exponential lower bounds for `sin` and `cos`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZoneReport {
    pub grid: usize,
    /// Points inside the disk `|lambda| <= 20` and outside every excluded disk.
    pub checked: usize,
    pub violations: usize,
    /// Smallest `min(|sin pi l|, |cos pi l|) * 7 / exp(pi |Im l|)` seen.
    pub min_ratio: f64,
}

/// Is `lambda = u + iv` at distance at least `ZONE_RADIUS` from every `k/2`?
pub fn in_zone(u: f64, v: f64) -> bool {
    let nearest = (2.0 * u).round() / 2.0;
    (u - nearest).hypot(v) >= ZONE_RADIUS
}

/// Checks `|sin(pi l)| >= exp(pi |Im l|) / 7` and the same for `cos` on a
/// `samples x samples` grid over `[-20, 20]^2`, restricted to `|l| <= 20`
/// and the zone.
pub fn zone_bound_check(samples: usize) -> ZoneReport {
    let axis = linspace(-20.0, 20.0, samples);
    let (checked, violations, min_ratio) = axis
        .par_iter()
        .map(|&v| {
            let mut acc = (0usize, 0usize, f64::INFINITY);
            for &u in &axis {
                if u.hypot(v) > 20.0 || !in_zone(u, v) {
                    continue;
                }
                let sh = (PI * v).sinh();
                let (su, cu) = (PI * u).sin_cos();
                let sin_abs = (su * su + sh * sh).sqrt();
                let cos_abs = (cu * cu + sh * sh).sqrt();
                let bound = (PI * v.abs()).exp() / 7.0;
                acc.0 += 1;
                if sin_abs < bound || cos_abs < bound {
                    acc.1 += 1;
                }
                acc.2 = acc.2.min(sin_abs.min(cos_abs) / bound);
            }
            acc
        })
        .reduce(|| (0, 0, f64::INFINITY), |a, b| (a.0 + b.0, a.1 + b.1, a.2.min(b.2)));
    ZoneReport {
        grid: samples,
        checked,
        violations,
        min_ratio,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// `(lambda, max |y(., lambda^2)|)`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log max|y|` against `log lambda`; `None` when
    /// the forcing is zero.
    pub slope: Option<f64>,
}

/// Tabulates `max |y(x, lambda^2, f)|` for real `lambda` in the zone and fits
/// its decay rate.
pub fn bvp_decay_check(q: &Potential, beta: f64, f: &TargetFunction, lambdas: &[f64]) -> Result<DecayReport> {
    if let Some(l) = lambdas.iter().find(|&&l| !in_zone(l, 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {l} is within 1/6 of a half-integer"
        )));
    }
    let rows: Vec<(f64, f64)> = lambdas
        .par_iter()
        .map(|&l| Ok((l, solve_bvp(q, beta, l * l, f)?.max_abs())))
        .collect::<Result<_>>()?;
    let slope = if rows.iter().all(|r| r.1 == 0.0) {
        None
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
        loglog_slope(&xs, &ys, 0.0)
    };
    Ok(DecayReport { rows, slope })
}
