//! Eigenvalues, norming constants and the ratio `psi_n = beta_n phi_n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{
    characteristic, default_grid, pruefer_angle, wronskian_fn, BoundaryParams, Solution, SolutionTrace, DEFAULT_MESH,
};
use crate::potential::Potential;
use crate::roots::bracketed_root;

/// Root refinement gives up after this many iterations.
pub const MAX_ITERATIONS: usize = 200;

/// Brackets are refined until their width in `lambda` is at most this.
pub const LAMBDA_TOLERANCE: f64 = 1e-10;

/// Largest accepted `max|psi - beta phi| / max|psi|`.
pub const RATIO_RESIDUAL_LIMIT: f64 = 1e-6;

/// Relative finite-difference step for `dW/dmu`.
pub const WDOT_STEP: f64 = 1e-5;

/// Eigenvalues with `|mu| < ZERO_GUARD` trigger the unit potential shift.
pub const ZERO_GUARD: f64 = 1e-6;

/// One spectral record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenpair {
    pub n: usize,
    /// `sqrt(mu)` when `mu >= 0`; for `mu < 0` this holds `-sqrt(|mu|)`, i.e.
    /// the imaginary part of `lambda` with its sign flipped as a flag.
    pub lambda: f64,
    pub mu: f64,
    /// `integral of phi_n^2`.
    pub a: f64,
    /// `integral of psi_n^2`.
    pub b: f64,
    pub beta_ratio: f64,
}

impl Eigenpair {
    /// True when `mu < 0`, so that `lambda` is purely imaginary.
    pub fn is_imaginary(&self) -> bool {
        self.mu < 0.0
    }
}

/// `lambda` for a given `mu`, sign-flagged when `mu < 0`.
pub fn signed_sqrt(mu: f64) -> f64 {
    if mu >= 0.0 {
        mu.sqrt()
    } else {
        -(-mu).sqrt()
    }
}

/// `theta(pi, mu) + beta - (n + 1) pi`: increasing in `mu`, zero at `mu_n`.
fn index_function(q: &Potential, bp: BoundaryParams, n: usize, mu: f64) -> f64 {
    pruefer_angle(q, mu, bp.alpha()) + bp.beta() - (n as f64 + 1.0) * PI
}

/// A `mu` below every eigenvalue.
fn lower_bound(q: &Potential, bp: BoundaryParams) -> f64 {
    let base = q.min_value();
    let mut step = 1.0;
    let mut lo = base - step;
    while index_function(q, bp, 0, lo) >= 0.0 {
        step *= 2.0;
        lo = base - step;
    }
    lo
}

/// A `mu` above `mu_n`.
fn upper_bound(q: &Potential, bp: BoundaryParams, n: usize) -> f64 {
    let base = q.max_value();
    let mut step = (n as f64 + 1.0).powi(2) + 1.0;
    let mut hi = base + step;
    while index_function(q, bp, n, hi) <= 0.0 {
        step *= 2.0;
        hi = base + step;
    }
    hi
}

fn refine(q: &Potential, bp: BoundaryParams, n: usize, lo: f64, hi: f64) -> Result<f64> {
    // d(mu) = 2 lambda d(lambda). The bracket is squeezed well past the
    // lambda tolerance because strongly negative ground states amplify any mu
    // error exponentially in the eigenfunction; a few ulps is the floor.
    let ulp = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    let tol = (1e-3 * LAMBDA_TOLERANCE * (2.0 * hi.abs().sqrt()).max(1.0)).max(8.0 * ulp);
    let root = bracketed_root(|mu| index_function(q, bp, n, mu), lo, hi, tol, MAX_ITERATIONS);
    if root.converged {
        Ok(root.x)
    } else {
        Err(Error::NoConvergence {
            index: n,
            iterations: root.iterations,
        })
    }
}

/// `mu_0 < ... < mu_n_max` of `L(q, alpha, beta)`.
///
/// Each index gets its own Pruefer bracket, so no eigenvalue is skipped or
/// found twice. Refinement runs in parallel over indices.
pub fn eigenvalues(q: &Potential, bp: BoundaryParams, n_max: usize) -> Result<Vec<f64>> {
    let lo = lower_bound(q, bp);
    (0..=n_max)
        .into_par_iter()
        .map(|n| refine(q, bp, n, lo, upper_bound(q, bp, n)))
        .collect()
}

/// Eigenpairs with indices `0..=n_max`, including norming constants and
/// `beta_n`.
pub fn find_eigenvalues(q: &Potential, bp: BoundaryParams, n_max: usize) -> Result<Vec<Eigenpair>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let mus = eigenvalues(q, bp, n_max)?;
    let grid = default_grid(q, DEFAULT_MESH);
    mus.into_par_iter()
        .enumerate()
        .map(|(n, mu)| complete_eigenpair(q, bp, n, mu, &grid))
        .collect()
}

fn complete_eigenpair(q: &Potential, bp: BoundaryParams, n: usize, mu: f64, grid: &[f64]) -> Result<Eigenpair> {
    let phi = Solution::phi(q, mu, bp.alpha());
    let psi = Solution::psi(q, mu, bp.beta());
    let ratio = beta_ratio(&phi.trace(grid)?, &psi.trace(grid)?)?;
    Ok(Eigenpair {
        n,
        lambda: signed_sqrt(mu),
        mu,
        a: phi.square_integral(),
        b: psi.square_integral(),
        beta_ratio: ratio,
    })
}

/// `(a_n, b_n) = (integral of phi_n^2, integral of psi_n^2)`, integrated
/// exactly piece by piece.
pub fn norming_constants(q: &Potential, bp: BoundaryParams, eig: &Eigenpair) -> (f64, f64) {
    (
        Solution::phi(q, eig.mu, bp.alpha()).square_integral(),
        Solution::psi(q, eig.mu, bp.beta()).square_integral(),
    )
}

/// Least-squares `beta_n` in `psi_n = beta_n phi_n`.
///
/// Fails with [`Error::RatioResidual`] when the traces are not
/// proportional, which means `mu` is not an eigenvalue.
pub fn beta_ratio(phi: &SolutionTrace, psi: &SolutionTrace) -> Result<f64> {
    if phi.grid != psi.grid {
        return Err(Error::Grid("traces are sampled on different grids".into()));
    }
    let num: f64 = phi.y.iter().zip(&psi.y).map(|(a, b)| a * b).sum();
    let den: f64 = phi.y.iter().map(|a| a * a).sum();
    let ratio = num / den;
    let psi_max = psi.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = phi
        .y
        .iter()
        .zip(&psi.y)
        .fold(0.0f64, |m, (a, b)| m.max((b - ratio * a).abs()));
    let residual = dev / psi_max;
    if residual > RATIO_RESIDUAL_LIMIT || residual.is_nan() {
        return Err(Error::RatioResidual {
            residual,
            threshold: RATIO_RESIDUAL_LIMIT,
        });
    }
    Ok(ratio)
}

/// `dW/dmu` at `mu` by central differences with step `WDOT_STEP * max(1, |mu|)`.
pub fn wronskian_derivative(q: &Potential, bp: BoundaryParams, mu: f64) -> f64 {
    let h = WDOT_STEP * mu.abs().max(1.0);
    (wronskian_fn(q, mu + h, bp) - wronskian_fn(q, mu - h, bp)) / (2.0 * h)
}

/// Relative discrepancy between `dW/dmu (mu_n)` and `beta_n a_n`.
pub fn wdot_identity_check(q: &Potential, bp: BoundaryParams, eig: &Eigenpair) -> f64 {
    let target = eig.beta_ratio * eig.a;
    (wronskian_derivative(q, bp, eig.mu) - target).abs() / target.abs()
}

/// `|characteristic(mu)|`, the residual of an eigenvalue.
pub fn eigen_residual(q: &Potential, bp: BoundaryParams, mu: f64) -> f64 {
    characteristic(q, mu, bp).abs()
}

/// Shifts `q` by `+1` when any of `mu_0..mu_n_max` is within `ZERO_GUARD` of
/// zero. Returns the potential to use and the shift applied (0 or 1).
pub fn shift_off_zero(q: &Potential, bp: BoundaryParams, n_max: usize) -> Result<(Potential, f64)> {
    let mus = eigenvalues(q, bp, n_max)?;
    if mus.iter().any(|m| m.abs() < ZERO_GUARD) {
        Ok((q.shifted(1.0), 1.0))
    } else {
        Ok((q.clone(), 0.0))
    }
}

/// `integral of y1 y2 over [0, pi]` by composite Simpson on each piece with
/// `panels_per_unit` panels per unit length.
pub fn inner_product(s1: &Solution<'_>, s2: &Solution<'_>, panels_per_unit: usize) -> f64 {
    use crate::numeric::simpson;
    s1.potential()
        .pieces()
        .map(|(a, b, _)| {
            let panels = (((b - a) * panels_per_unit as f64).ceil() as usize).max(2);
            simpson(|x| s1.value(x) * s2.value(x), a, b, panels)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivp::zero_count;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bp(a: f64, b: f64) -> BoundaryParams {
        BoundaryParams::new(a, b).unwrap()
    }

    fn step() -> Potential {
        Potential::from_parts(vec![0.0, PI / 2.0, PI], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_potential_dirichlet_neumann() {
        let e = find_eigenvalues(&Potential::zero(), bp(PI, PI / 2.0), 2).unwrap();
        assert_eq!(e.len(), 3);
        for (n, ep) in e.iter().enumerate() {
            assert_eq!(ep.n, n);
            assert_abs_diff_eq!(ep.lambda, n as f64 + 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_potential_dirichlet_dirichlet() {
        let e = find_eigenvalues(&Potential::zero(), bp(PI, 0.0), 2).unwrap();
        let mus: Vec<f64> = e.iter().map(|p| p.mu).collect();
        for (got, want) in mus.iter().zip([1.0, 4.0, 9.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_shift() {
        let e = find_eigenvalues(&Potential::constant(2.0), bp(PI, 0.0), 2).unwrap();
        for (got, want) in e.iter().map(|p| p.mu).zip([3.0, 6.0, 11.0]) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(find_eigenvalues(&Potential::zero(), bp(PI, 0.0), 0).is_err());
    }

    #[test]
    fn norming_constants_zero_potential() {
        let q = Potential::zero();
        for ep in find_eigenvalues(&q, bp(PI, PI / 2.0), 20).unwrap() {
            let m = ep.n as f64 + 0.5;
            assert_abs_diff_eq!(ep.a, PI / (2.0 * m * m), epsilon = 1e-12);
            assert_abs_diff_eq!(ep.b, PI / 2.0, epsilon = 1e-10);
            let sign = if ep.n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(ep.beta_ratio, sign * m, epsilon = 1e-8 * m);
            let (a, b) = norming_constants(&q, bp(PI, PI / 2.0), &ep);
            assert_eq!((a, b), (ep.a, ep.b));
        }
        for ep in find_eigenvalues(&q, bp(PI / 2.0, PI / 2.0), 10).unwrap().iter().skip(1) {
            assert_abs_diff_eq!(ep.a, PI / 2.0, epsilon = 1e-10);
            let sign = if ep.n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(ep.beta_ratio, sign, epsilon = 1e-8);
        }
    }

    #[test]
    fn b_equals_ratio_squared_times_a() {
        let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).unwrap();
        for (a, b) in [(PI, PI / 4.0), (PI / 4.0, 3.0 * PI / 4.0), (2.0, 0.0)] {
            for ep in find_eigenvalues(&q, bp(a, b), 30).unwrap() {
                let rel = (ep.b - ep.beta_ratio.powi(2) * ep.a).abs() / ep.b;
                assert!(rel < 1e-6, "n {} rel {rel}", ep.n);
                assert!(ep.a > 0.0 && ep.b > 0.0 && ep.beta_ratio != 0.0);
            }
        }
    }

    #[test]
    fn ratio_rejects_non_eigenvalue() {
        let q = Potential::zero();
        let grid = default_grid(&q, 64);
        let phi = Solution::phi(&q, 1.3, PI).trace(&grid).unwrap();
        let psi = Solution::psi(&q, 1.3, 0.0).trace(&grid).unwrap();
        assert!(matches!(beta_ratio(&phi, &psi), Err(Error::RatioResidual { .. })));
    }

    #[test]
    fn wdot_zero_potential_analytic() {
        let q = Potential::zero();
        let b = bp(PI, PI / 2.0);
        for ep in find_eigenvalues(&q, b, 30).unwrap() {
            let m = ep.n as f64 + 0.5;
            let sign = if ep.n % 2 == 0 { 1.0 } else { -1.0 };
            let analytic = sign * PI / (2.0 * m);
            assert!((wronskian_derivative(&q, b, ep.mu) - analytic).abs() <= 1e-6 * analytic.abs());
            assert!((ep.beta_ratio * ep.a - analytic).abs() <= 1e-6 * analytic.abs());
        }
        for ep in find_eigenvalues(&q, bp(PI, 0.0), 30).unwrap() {
            assert!(wdot_identity_check(&q, bp(PI, 0.0), &ep) < 1e-4);
        }
    }

    #[test]
    fn wdot_step_potential() {
        let q = step();
        for (a, b) in [(PI, PI / 4.0), (PI / 2.0, PI / 4.0), (1.0, 2.5)] {
            for ep in find_eigenvalues(&q, bp(a, b), 30).unwrap() {
                assert!(wdot_identity_check(&q, bp(a, b), &ep) < 1e-3);
            }
        }
    }

    #[test]
    fn negative_ground_state_is_flagged() {
        // Robin start with alpha = pi/4 pushes mu_0 below zero for q = 0.
        let e = find_eigenvalues(&Potential::zero(), bp(PI / 4.0, PI / 2.0), 3).unwrap();
        assert!(e[0].mu < 0.0);
        assert!(e[0].is_imaginary());
        assert_abs_diff_eq!(e[0].lambda, -(-e[0].mu).sqrt(), epsilon = 1e-15);
        // phi = cosh-like with tanh(k pi) = 1/k ... check via the characteristic.
        assert!(eigen_residual(&Potential::zero(), bp(PI / 4.0, PI / 2.0), e[0].mu) < 1e-8);
    }

    #[test]
    fn dirichlet_start_zero_counts_match_index() {
        let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).unwrap();
        for ep in find_eigenvalues(&q, bp(PI, PI / 3.0), 25).unwrap() {
            // theta(pi) lies in (n pi, (n + 1) pi); with alpha = pi the zero at
            // x = 0 is not counted, so phi_n has exactly n interior zeros.
            assert_eq!(zero_count(&q, ep.mu, PI), ep.n);
        }
    }

    #[test]
    fn orthogonality_on_two_step() {
        let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).unwrap();
        let b = bp(PI, PI / 4.0);
        let e = find_eigenvalues(&q, b, 12).unwrap();
        let sols: Vec<Solution> = e.iter().map(|p| Solution::phi(&q, p.mu, PI)).collect();
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let ip = inner_product(&sols[i], &sols[j], 600);
                assert!(ip.abs() <= 1e-6 * (e[i].a * e[j].a).sqrt(), "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn shift_applied_only_when_needed() {
        // alpha = beta = pi/2 with q = 0 has mu_0 = 0.
        let (q, c) = shift_off_zero(&Potential::zero(), bp(PI / 2.0, PI / 2.0), 3).unwrap();
        assert_eq!(c, 1.0);
        assert_abs_diff_eq!(q.mean(), 1.0, epsilon = 1e-15);
        let (_, c) = shift_off_zero(&Potential::zero(), bp(PI, PI / 2.0), 3).unwrap();
        assert_eq!(c, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn constant_shift_covariance(c in -3.0f64..3.0, alpha in 0.2f64..PI, beta in 0.0f64..3.0) {
            let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).unwrap();
            let b = bp(alpha, beta);
            let e0 = find_eigenvalues(&q, b, 15).unwrap();
            let e1 = find_eigenvalues(&q.shifted(c), b, 15).unwrap();
            for (x, y) in e0.iter().zip(&e1) {
                prop_assert!((y.mu - x.mu - c).abs() <= 1e-8 * (1.0 + x.mu.abs()).sqrt().max(1.0));
                prop_assert!((y.a - x.a).abs() <= 1e-8 * x.a);
            }
        }

        #[test]
        fn eigenvalues_strictly_increase(alpha in 0.1f64..PI, beta in 0.0f64..3.1) {
            let q = Potential::from_parts(vec![0.0, 0.5, PI], vec![-4.0, 2.0]).unwrap();
            let mus = eigenvalues(&q, bp(alpha, beta), 20).unwrap();
            prop_assert!(mus.windows(2).all(|w| w[1] > w[0]));
            for mu in &mus {
                // Residual divided by the slope is the implied error in mu.
                let slope = wronskian_derivative(&q, bp(alpha, beta), *mu).abs();
                let implied = eigen_residual(&q, bp(alpha, beta), *mu) / slope;
                prop_assert!(implied < 1e-9 * (1.0 + mu.abs()).sqrt(), "mu {} implied {}", mu, implied);
            }
        }
    }
}
