//! Initial-value solutions of `-y'' + q y = mu y` for piecewise-constant `q`.
//!
//! On a piece where `q = q_i` the equation is `y'' = (q_i - mu) y`, whose
//! 2x2 transfer matrix is known in closed form (trigonometric, hyperbolic or
//! linear), so propagation across `[0, pi]` is exact up to rounding no matter
//! how large `mu` is.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{linspace, sin_cos_exact};
use crate::potential::Potential;

/// Below this value of `|mu - q_i| * h^2` the transfer entries use their
/// Taylor series instead of `sin(sqrt(z) h) / sqrt(z)`.
pub const DEGENERATE_THRESHOLD: f64 = 1e-8;

/// Default number of uniform output points in a solution grid.
pub const DEFAULT_MESH: usize = 1024;

/// The boundary angles of `y(0) cos(alpha) + y'(0) sin(alpha) = 0` and
/// `y(pi) cos(beta) + y'(pi) sin(beta) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryParams {
    alpha: f64,
    beta: f64,
}

impl BoundaryParams {
    /// `alpha` in `(0, pi]`, `beta` in `[0, pi)`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_beta(beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(phi(0), phi'(0)) = (sin alpha, -cos alpha)`.
    pub fn phi_start(&self) -> [f64; 2] {
        phi_start(self.alpha)
    }

    /// `(psi(pi), psi'(pi)) = (sin beta, -cos beta)`.
    pub fn psi_end(&self) -> [f64; 2] {
        psi_end(self.beta)
    }

    /// The boundary parameters of the mirrored problem for `q(pi - x)`.
    pub fn reflected(&self) -> Self {
        Self {
            alpha: PI - self.beta,
            beta: PI - self.alpha,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= PI {
        Ok(())
    } else {
        Err(Error::InvalidBoundary(format!("alpha = {alpha} not in (0, pi]")))
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if (0.0..PI).contains(&beta) {
        Ok(())
    } else {
        Err(Error::InvalidBoundary(format!("beta = {beta} not in [0, pi)")))
    }
}

fn phi_start(alpha: f64) -> [f64; 2] {
    let (s, c) = sin_cos_exact(alpha);
    [s, -c]
}

fn psi_end(beta: f64) -> [f64; 2] {
    let (s, c) = sin_cos_exact(beta);
    [s, -c]
}

/// Transfer matrix of `y'' = -z y` over a step of length `h` (which may be
/// negative): `(y, y')(x + h) = [[c, s], [cp, sp]] (y, y')(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transfer {
    pub c: f64,
    pub s: f64,
    pub cp: f64,
    pub sp: f64,
}

impl Transfer {
    pub fn new(z: f64, h: f64) -> Self {
        let zh2 = z * h * h;
        if zh2.abs() < DEGENERATE_THRESHOLD {
            let c = 1.0 - zh2 / 2.0 + zh2 * zh2 / 24.0 - zh2 * zh2 * zh2 / 720.0;
            let s = h * (1.0 - zh2 / 6.0 + zh2 * zh2 / 120.0 - zh2 * zh2 * zh2 / 5040.0);
            Self {
                c,
                s,
                cp: -z * s,
                sp: c,
            }
        } else if z > 0.0 {
            let k = z.sqrt();
            let (sn, cs) = (k * h).sin_cos();
            Self {
                c: cs,
                s: sn / k,
                cp: -k * sn,
                sp: cs,
            }
        } else {
            let k = (-z).sqrt();
            let (sh, ch) = ((k * h).sinh(), (k * h).cosh());
            Self {
                c: ch,
                s: sh / k,
                cp: k * sh,
                sp: ch,
            }
        }
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.c * v[0] + self.s * v[1], self.cp * v[0] + self.sp * v[1]]
    }

    pub fn determinant(&self) -> f64 {
        self.c * self.sp - self.s * self.cp
    }
}

/// A solution stored by its values `(y, y')` at every breakpoint of `q`;
/// any interior point is reached by one exact transfer step.
#[derive(Clone, Debug)]
pub struct Solution<'q> {
    q: &'q Potential,
    mu: f64,
    knots: Vec<[f64; 2]>,
}

impl<'q> Solution<'q> {
    /// `phi(x, mu, alpha)`, launched from `x = 0`.
    pub fn phi(q: &'q Potential, mu: f64, alpha: f64) -> Self {
        Self::from_left(q, mu, phi_start(alpha))
    }

    /// `psi(x, mu, beta)`, launched backwards from `x = pi`.
    pub fn psi(q: &'q Potential, mu: f64, beta: f64) -> Self {
        Self::from_right(q, mu, psi_end(beta))
    }

    pub fn from_left(q: &'q Potential, mu: f64, start: [f64; 2]) -> Self {
        let mut knots = Vec::with_capacity(q.num_pieces() + 1);
        let mut v = start;
        knots.push(v);
        for (a, b, val) in q.pieces() {
            v = Transfer::new(mu - val, b - a).apply(v);
            knots.push(v);
        }
        Self { q, mu, knots }
    }

    pub fn from_right(q: &'q Potential, mu: f64, end: [f64; 2]) -> Self {
        let k = q.num_pieces();
        let mut knots = vec![[0.0; 2]; k + 1];
        let mut v = end;
        knots[k] = v;
        for (i, (a, b, val)) in q.pieces().enumerate().collect::<Vec<_>>().into_iter().rev() {
            v = Transfer::new(mu - val, a - b).apply(v);
            knots[i] = v;
        }
        Self { q, mu, knots }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn potential(&self) -> &'q Potential {
        self.q
    }

    /// `(y, y')` at the breakpoints of the potential.
    pub fn knots(&self) -> &[[f64; 2]] {
        &self.knots
    }

    pub fn start(&self) -> [f64; 2] {
        self.knots[0]
    }

    pub fn end(&self) -> [f64; 2] {
        *self.knots.last().unwrap()
    }

    /// `(y(x), y'(x))` for `x` in `[0, pi]`.
    pub fn eval(&self, x: f64) -> [f64; 2] {
        let i = self.q.piece_index(x);
        let left = self.q.breakpoints()[i];
        if x == left {
            return self.knots[i];
        }
        Transfer::new(self.mu - self.q.values()[i], x - left).apply(self.knots[i])
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    /// Exact `integral of y^2 over [0, pi]`.
    pub fn square_integral(&self) -> f64 {
        self.q
            .pieces()
            .zip(&self.knots)
            .map(|((a, b, v), y0)| piece_square_integral(self.mu - v, b - a, *y0))
            .sum()
    }

    /// Samples `(y, y')` on `grid`, which must contain every breakpoint.
    pub fn trace(&self, grid: &[f64]) -> Result<SolutionTrace> {
        validate_grid(self.q, grid)?;
        let mut y = Vec::with_capacity(grid.len());
        let mut yp = Vec::with_capacity(grid.len());
        for &x in grid {
            let [a, b] = self.eval(x);
            y.push(a);
            yp.push(b);
        }
        Ok(SolutionTrace {
            grid: grid.to_vec(),
            y,
            yprime: yp,
        })
    }
}

/// `(sin t)/t - 1` for `sign = -1` or `(sinh t)/t - 1` for `sign = +1`,
/// without cancellation for small `t`.
fn sinc_minus_one(t: f64, sign: f64) -> f64 {
    if t.abs() < 0.5 {
        let t2 = sign * t * t;
        // Horner over t^2/6 + t^4/120 + ... (alternating when sign = -1)
        let mut acc = 0.0;
        let mut k = 13.0_f64;
        while k >= 3.0 {
            acc = t2 / (k * (k - 1.0)) * (1.0 + acc);
            k -= 2.0;
        }
        acc
    } else if sign < 0.0 {
        t.sin() / t - 1.0
    } else {
        t.sinh() / t - 1.0
    }
}

/// `integral of y^2 over one piece of length h`, starting from `(y0, y0')`.
pub(crate) fn piece_square_integral(z: f64, h: f64, y0: [f64; 2]) -> f64 {
    let zh2 = z * h * h;
    let [a, ap] = y0;
    if zh2.abs() < DEGENERATE_THRESHOLD {
        let int_cc = h - z * h.powi(3) / 3.0 + z * z * h.powi(5) / 15.0;
        let int_ss = h.powi(3) / 3.0 - z * h.powi(5) / 15.0 + 2.0 * z * z * h.powi(7) / 315.0;
        let int_cs = h * h / 2.0 - z * h.powi(4) / 6.0 + z * z * h.powi(6) / 45.0;
        a * a * int_cc + 2.0 * a * ap * int_cs + ap * ap * int_ss
    } else if z > 0.0 {
        let k = z.sqrt();
        let b = ap / k;
        let t = 2.0 * k * h;
        let d = sinc_minus_one(t, -1.0); // S - 1 with S = sin(t)/t
        let sn = (k * h).sin();
        0.5 * h * (a * a * (2.0 + d) - b * b * d) + a * b * sn * sn / k
    } else {
        let k = (-z).sqrt();
        let b = ap / k;
        let t = 2.0 * k * h;
        let d = sinc_minus_one(t, 1.0);
        let sh = (k * h).sinh();
        0.5 * h * (a * a * (2.0 + d) + b * b * d) + a * b * sh * sh / k
    }
}

/// Sampled `(y, y')` on a grid containing all potential breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrace {
    pub grid: Vec<f64>,
    pub y: Vec<f64>,
    pub yprime: Vec<f64>,
}

/// Breakpoints of `q` merged with `mesh` uniform points on `[0, pi]`.
pub fn default_grid(q: &Potential, mesh: usize) -> Vec<f64> {
    let mut g = linspace(0.0, PI, mesh.max(2));
    g.extend_from_slice(q.breakpoints());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn validate_grid(q: &Potential, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("grid is not strictly increasing".into()));
    }
    if grid[0] != 0.0 || *grid.last().unwrap() != PI {
        return Err(Error::Grid("grid must start at 0 and end at pi".into()));
    }
    for &b in q.breakpoints() {
        if grid.binary_search_by(|g| g.total_cmp(&b)).is_err() {
            return Err(Error::Grid(format!("breakpoint {b} missing from grid")));
        }
    }
    Ok(())
}

/// `phi(x, mu, alpha)` and `phi'` sampled on `grid`.
pub fn solve_phi(q: &Potential, mu: f64, alpha: f64, grid: &[f64]) -> Result<SolutionTrace> {
    check_alpha(alpha)?;
    Solution::phi(q, mu, alpha).trace(grid)
}

/// `psi(x, mu, beta)` and `psi'` sampled on `grid`.
pub fn solve_psi(q: &Potential, mu: f64, beta: f64, grid: &[f64]) -> Result<SolutionTrace> {
    check_beta(beta)?;
    Solution::psi(q, mu, beta).trace(grid)
}

/// Wronskian of two traces: the value at `x = 0` and the largest drift
/// `max |W(x_j) - W(0)|` over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WronskianReport {
    pub value: f64,
    pub max_deviation: f64,
}

/// `W = phi psi' - phi' psi` evaluated along two traces on the same grid.
pub fn wronskian(phi: &SolutionTrace, psi: &SolutionTrace) -> Result<WronskianReport> {
    if phi.grid != psi.grid {
        return Err(Error::Grid("traces are sampled on different grids".into()));
    }
    let w = |j: usize| phi.y[j] * psi.yprime[j] - phi.yprime[j] * psi.y[j];
    let value = w(0);
    let max_deviation = (0..phi.grid.len()).map(|j| (w(j) - value).abs()).fold(0.0, f64::max);
    Ok(WronskianReport { value, max_deviation })
}

/// `phi(pi) cos(beta) + phi'(pi) sin(beta)`.
///
/// Vanishes exactly at the eigenvalues of `L(q, alpha, beta)`. It equals
/// `-W_{alpha,beta}(mu)`, so the Wronskian as a function of `mu` is
/// [`wronskian_fn`].
pub fn characteristic(q: &Potential, mu: f64, bp: BoundaryParams) -> f64 {
    let [y, yp] = propagate_to_end(q, mu, bp.phi_start());
    let (sb, cb) = sin_cos_exact(bp.beta());
    y * cb + yp * sb
}

/// `W_{alpha,beta}(mu) = phi psi' - phi' psi`, independent of `x`.
pub fn wronskian_fn(q: &Potential, mu: f64, bp: BoundaryParams) -> f64 {
    -characteristic(q, mu, bp)
}

fn propagate_to_end(q: &Potential, mu: f64, start: [f64; 2]) -> [f64; 2] {
    q.pieces()
        .fold(start, |v, (a, b, val)| Transfer::new(mu - val, b - a).apply(v))
}

/// Continuous Pruefer phase `theta(pi, mu)` of `phi(x, mu, alpha)`, where
/// `y = r sin(theta)`, `y' = r cos(theta)` and `theta(0) = pi - alpha`.
///
/// Strictly increasing in `mu`; `floor(theta / pi)` counts the zeros of
/// `phi` in `(0, pi]`.
pub fn pruefer_angle(q: &Potential, mu: f64, alpha: f64) -> f64 {
    let [s0, c0] = phi_start(alpha);
    let mut theta = s0.atan2(c0);
    for (a, b, val) in q.pieces() {
        theta = advance_angle(theta, mu - val, b - a);
    }
    theta
}

/// Moves the Pruefer angle across one piece with `y'' = -z y`.
fn advance_angle(theta: f64, z: f64, h: f64) -> f64 {
    if z > 0.0 && z * h * h >= DEGENERATE_THRESHOLD {
        // In the scaled frame tan(phi) = k y / y' the angle advances by k h
        // exactly; both frames agree on multiples of pi/2.
        let k = z.sqrt();
        let j = (theta / PI).floor();
        let t0 = theta - j * PI;
        let p0 = (k * t0.sin()).atan2(t0.cos());
        let p_end = j * PI + p0 + k * h;
        let j2 = (p_end / PI).floor();
        let p1 = p_end - j2 * PI;
        j2 * PI + p1.sin().atan2(k * p1.cos())
    } else {
        // Non-oscillatory piece: theta changes by less than pi in magnitude.
        let (s, c) = theta.sin_cos();
        let [y, yp] = if z < 0.0 && z * h * h <= -DEGENERATE_THRESHOLD {
            let k = (-z).sqrt();
            let th = (k * h).tanh();
            [s + c * th / k, k * s * th + c]
        } else {
            Transfer::new(z, h).apply([s, c])
        };
        let mut delta = y.atan2(yp) - theta;
        delta -= (delta / (2.0 * PI)).round() * 2.0 * PI;
        theta + delta
    }
}

/// Number of zeros of `phi(., mu, alpha)` in `(0, pi]`.
pub fn zero_count(q: &Potential, mu: f64, alpha: f64) -> usize {
    (pruefer_angle(q, mu, alpha) / PI).floor().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn step() -> Potential {
        Potential::from_parts(vec![0.0, PI / 2.0, PI], vec![1.0, 0.0]).unwrap()
    }

    /// Fixed-step RK4 for y'' = (q - mu) y; an integrator independent of the
    /// transfer matrices. Steps are aligned with the potential breakpoints.
    fn rk4_oracle(q: &Potential, mu: f64, start: [f64; 2], x_end: f64, steps_per_unit: usize) -> [f64; 2] {
        let mut v = start;
        for (a, b, val) in q.pieces() {
            if a >= x_end {
                break;
            }
            let b = b.min(x_end);
            let n = (((b - a) * steps_per_unit as f64).ceil() as usize).max(1);
            let h = (b - a) / n as f64;
            let f = |u: [f64; 2]| [u[1], (val - mu) * u[0]];
            for _ in 0..n {
                let k1 = f(v);
                let k2 = f([v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
                let k3 = f([v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
                let k4 = f([v[0] + h * k3[0], v[1] + h * k3[1]]);
                for i in 0..2 {
                    v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        v
    }

    #[test]
    fn phi_zero_potential_dirichlet() {
        let q = Potential::zero();
        let lam: f64 = 3.7;
        let grid = default_grid(&q, 64);
        let tr = solve_phi(&q, lam * lam, PI, &grid).unwrap();
        for (j, &x) in tr.grid.iter().enumerate() {
            assert_abs_diff_eq!(tr.y[j], (lam * x).sin() / lam, epsilon = 1e-14);
            assert_abs_diff_eq!(tr.yprime[j], (lam * x).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_zero_potential_neumann() {
        let q = Potential::zero();
        let lam: f64 = 2.25;
        let tr = solve_phi(&q, lam * lam, PI / 2.0, &default_grid(&q, 33)).unwrap();
        for (j, &x) in tr.grid.iter().enumerate() {
            assert_abs_diff_eq!(tr.y[j], (lam * x).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_constant_potential_matches_closed_form_and_rk4() {
        let c = 2.0;
        let q = Potential::constant(c);
        let mu = 11.0;
        let k = (mu - c).sqrt();
        let sol = Solution::phi(&q, mu, PI);
        for x in [0.3, 1.0, 2.2, PI] {
            let [y, yp] = sol.eval(x);
            assert_abs_diff_eq!(y, (k * x).sin() / k, epsilon = 1e-14);
            let oracle = rk4_oracle(&q, mu, [0.0, 1.0], x, 4000);
            assert_abs_diff_eq!(y, oracle[0], epsilon = 1e-10);
            assert_abs_diff_eq!(yp, oracle[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn step_potential_matches_rk4() {
        let q = step();
        for mu in [-3.0, 0.5, 1.0, 7.3, 40.0] {
            let sol = Solution::phi(&q, mu, 2.0);
            let oracle = rk4_oracle(&q, mu, [2.0f64.sin(), -(2.0f64.cos())], PI, 4000);
            let [y, yp] = sol.end();
            assert_abs_diff_eq!(y, oracle[0], epsilon = 1e-9);
            assert_abs_diff_eq!(yp, oracle[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn psi_examples() {
        let q = Potential::zero();
        let lam: f64 = 4.1;
        let grid = default_grid(&q, 50);
        let tr = solve_psi(&q, lam * lam, PI / 2.0, &grid).unwrap();
        for (j, &x) in grid.iter().enumerate() {
            assert_abs_diff_eq!(tr.y[j], (lam * (PI - x)).cos(), epsilon = 1e-13);
        }
        let tr = solve_psi(&q, lam * lam, 0.0, &grid).unwrap();
        for (j, &x) in grid.iter().enumerate() {
            assert_abs_diff_eq!(tr.y[j], (lam * (PI - x)).sin() / lam, epsilon = 1e-13);
        }
        let c = 1.5;
        let qc = Potential::constant(c);
        let mu = 9.0;
        let k = (mu - c).sqrt();
        let tr = solve_psi(&qc, mu, PI / 2.0, &grid).unwrap();
        for (j, &x) in grid.iter().enumerate() {
            assert_abs_diff_eq!(tr.y[j], (k * (PI - x)).cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn grid_errors() {
        let q = step();
        assert!(solve_phi(&q, 1.0, PI, &[]).is_err());
        let g = linspace(0.0, PI, 10); // misses pi/2
        assert!(matches!(solve_phi(&q, 1.0, PI, &g), Err(Error::Grid(_))));
        assert!(solve_phi(&q, 1.0, PI, &default_grid(&q, 10)).is_ok());
        assert!(solve_phi(&q, 1.0, 0.0, &default_grid(&q, 10)).is_err());
        assert!(solve_psi(&q, 1.0, PI, &default_grid(&q, 10)).is_err());
    }

    #[test]
    fn wronskian_examples() {
        let q = Potential::zero();
        let grid = default_grid(&q, 128);
        for lam in [0.7f64, 3.3, 10.0] {
            let mu = lam * lam;
            let phi = solve_phi(&q, mu, PI, &grid).unwrap();
            let psi = solve_psi(&q, mu, PI / 2.0, &grid).unwrap();
            let w = wronskian(&phi, &psi).unwrap();
            assert_abs_diff_eq!(w.value, -(lam * PI).cos(), epsilon = 1e-13);
            let psi0 = solve_psi(&q, mu, 0.0, &grid).unwrap();
            let w0 = wronskian(&phi, &psi0).unwrap();
            assert_abs_diff_eq!(w0.value, -(lam * PI).sin() / lam, epsilon = 1e-13);
            assert!(w0.max_deviation < 1e-12);
            assert_abs_diff_eq!(
                w.value,
                wronskian_fn(&q, mu, BoundaryParams::new(PI, PI / 2.0).unwrap()),
                epsilon = 1e-13
            );
        }
        let other = solve_phi(&q, 1.0, PI, &default_grid(&q, 10)).unwrap();
        let psi = solve_psi(&q, 1.0, 0.0, &default_grid(&q, 11)).unwrap();
        assert!(wronskian(&other, &psi).is_err());
    }

    #[test]
    fn characteristic_examples() {
        let q = Potential::zero();
        let dn = BoundaryParams::new(PI, PI / 2.0).unwrap();
        for n in 0..5 {
            let m = n as f64 + 0.5;
            assert_abs_diff_eq!(characteristic(&q, m * m, dn), 0.0, epsilon = 1e-13);
        }
        let dd = BoundaryParams::new(PI, 0.0).unwrap();
        for n in 1..5 {
            let m = n as f64;
            assert_abs_diff_eq!(characteristic(&q, m * m, dd), 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(characteristic(&q, 1.0, dn), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn pruefer_examples() {
        let q = Potential::zero();
        let theta = pruefer_angle(&q, 6.25, PI);
        assert_abs_diff_eq!(theta, 2.5 * PI, epsilon = 1e-12);
        assert_eq!(zero_count(&q, 6.25, PI), 2);
        assert!(pruefer_angle(&q, 6.3, PI) > theta);

        let c = 3.0;
        let qc = Potential::constant(c);
        for mu in [-2.0, 0.1, 4.0, 55.5] {
            assert_abs_diff_eq!(
                pruefer_angle(&qc, mu + c, 1.1),
                pruefer_angle(&q, mu, 1.1),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pruefer_counts_zeros_of_step_solution() {
        let q = step();
        let mu = 60.0;
        let sol = Solution::phi(&q, mu, PI);
        let xs = linspace(0.0, PI, 20001);
        let mut zeros = 0;
        for w in xs.windows(2) {
            if sol.value(w[0]) * sol.value(w[1]) < 0.0 {
                zeros += 1;
            }
        }
        assert_eq!(zero_count(&q, mu, PI), zeros);
    }

    #[test]
    fn square_integral_matches_quadrature() {
        use crate::numeric::simpson;
        let q = Potential::from_parts(vec![0.0, 0.4, 1.9, PI], vec![3.0, -2.0, 0.5]).unwrap();
        // Includes a piece where mu == q_i exactly and near-degenerate ones.
        for mu in [-5.0, 0.5, 0.5 + 1e-9, 3.0, 12.7, 400.0] {
            let sol = Solution::phi(&q, mu, 2.3);
            let quad: f64 = q
                .pieces()
                .map(|(a, b, _)| simpson(|x| sol.value(x).powi(2), a, b, 4000))
                .sum();
            let exact = sol.square_integral();
            assert!(
                (exact - quad).abs() <= 1e-9 * quad.max(1.0),
                "mu {mu}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn sinc_series_agrees_with_direct() {
        for t in [0.49, 0.3, 1e-3] {
            assert!((sinc_minus_one(t, -1.0) - (t.sin() / t - 1.0)).abs() < 1e-15);
            assert!((sinc_minus_one(t, 1.0) - (t.sinh() / t - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn leading_asymptotic_decay() {
        use crate::numeric::loglog_slope;
        let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![2.0, -1.0, 0.5]).unwrap();
        let xs = linspace(0.0, PI, 801);
        let lams: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
        let devs: Vec<f64> = lams
            .iter()
            .map(|&l| {
                let sol = Solution::phi(&q, l * l, PI);
                xs.iter()
                    .map(|&x| (sol.value(x) - (l * x).sin() / l).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let slope = loglog_slope(&lams, &devs, 0.0).unwrap();
        assert!(slope <= -1.8, "slope {slope}");
    }

    proptest! {
        #[test]
        fn transfer_is_unimodular(z in -400.0f64..400.0, h in -1.5f64..1.5) {
            let t = Transfer::new(z, h);
            let scale = t.c.abs().max(t.sp.abs()).max(1.0);
            prop_assert!((t.determinant() - 1.0).abs() <= 1e-12 * scale * scale);
        }

        #[test]
        fn pruefer_monotone_in_mu(mu in -20.0f64..500.0, d in 1e-3f64..5.0, alpha in 0.01f64..PI) {
            let q = Potential::from_parts(vec![0.0, 0.7, 2.0, PI], vec![4.0, -3.0, 1.0]).unwrap();
            prop_assert!(pruefer_angle(&q, mu + d, alpha) > pruefer_angle(&q, mu, alpha));
        }

        #[test]
        fn wronskian_is_constant(mu in -30.0f64..2000.0, alpha in 0.05f64..PI, beta in 0.0f64..3.1) {
            let q = Potential::from_parts(vec![0.0, 0.7, 2.0, PI], vec![4.0, -3.0, 1.0]).unwrap();
            let grid = default_grid(&q, 256);
            let phi = solve_phi(&q, mu, alpha, &grid).unwrap();
            let psi = solve_psi(&q, mu, beta, &grid).unwrap();
            let w = wronskian(&phi, &psi).unwrap();
            let scale = phi.y.iter().chain(&phi.yprime).fold(0.0f64, |m, v| m.max(v.abs()))
                * psi.y.iter().chain(&psi.yprime).fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(w.max_deviation <= 1e-12 * scale.max(1.0),
                "dev {} value {} scale {}", w.max_deviation, w.value, scale);
        }
    }
}
