//! The shift `delta_n(alpha, beta)` with `lambda_n(0, alpha, beta) = n + delta_n`,
//! defined for `n >= 2` as the root of
//!
//! `delta = acos(cos a / sqrt(m^2 sin^2 a + cos^2 a)) / pi
//!        - acos(cos b / sqrt(m^2 sin^2 b + cos^2 b)) / pi`, `m = n + delta`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{check_alpha, check_beta};
use crate::numeric::sin_cos_exact;

/// Stop when `|delta - rhs(delta)|` is at most this.
pub const DELTA_TOLERANCE: f64 = 1e-12;

const DAMPING: f64 = 0.5;
const FIXED_POINT_ITERATIONS: usize = 200;

/// `delta_n` together with the trigonometric residuals `d_n`, `e_n`, `g_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaRecord {
    pub n: usize,
    pub delta: f64,
    /// `1 + cos(2 pi delta)`.
    pub d: f64,
    /// `sin(2 pi delta)`.
    pub e: f64,
    /// `2 e / (pi (2 pi (n + delta) - e))`.
    pub g: f64,
}

impl DeltaRecord {
    pub fn m(&self) -> f64 {
        self.n as f64 + self.delta
    }

    /// `|(pi/2 - e/(4m)) (2/pi + g) - 1|`.
    pub fn g_identity_residual(&self) -> f64 {
        ((PI / 2.0 - self.e / (4.0 * self.m())) * (2.0 / PI + self.g) - 1.0).abs()
    }

    /// `|1 / integral of sin^2(m t) over [0, pi] - (2/pi + g)|`, with the
    /// integral evaluated as `pi/2 - sin(2 pi m) / (4 m)`.
    pub fn sine_norm_residual(&self) -> f64 {
        let m = self.m();
        let norm = PI / 2.0 - (2.0 * PI * m).sin() / (4.0 * m);
        (1.0 / norm - (2.0 / PI + self.g)).abs()
    }
}

/// One boundary term `acos(cos t / sqrt(m^2 sin^2 t + cos^2 t)) / pi`.
fn angle_term(m: f64, sin_t: f64, cos_t: f64) -> f64 {
    let r = (m * m * sin_t * sin_t + cos_t * cos_t).sqrt();
    (cos_t / r).clamp(-1.0, 1.0).acos() / PI
}

/// Right-hand side of the delta equation.
pub fn delta_rhs(n: usize, alpha: f64, beta: f64, delta: f64) -> f64 {
    let m = n as f64 + delta;
    let (sa, ca) = sin_cos_exact(alpha);
    let (sb, cb) = sin_cos_exact(beta);
    angle_term(m, sa, ca) - angle_term(m, sb, cb)
}

fn check_index(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!(
            "delta_n is defined for n >= 2, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Solves the delta equation by damped fixed-point iteration from zero,
/// falling back to bisection of `delta - rhs(delta)` on `[-1, 1]`.
pub fn solve_delta(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_index(n)?;
    check_alpha(alpha)?;
    check_beta(beta)?;
    let rhs = |d: f64| delta_rhs(n, alpha, beta, d);

    let mut d = 0.0;
    for _ in 0..FIXED_POINT_ITERATIONS {
        let r = rhs(d);
        if (d - r).abs() <= DELTA_TOLERANCE {
            // One undamped step: the map is a strong contraction here.
            return Ok(r.clamp(-1.0, 1.0));
        }
        d = ((1.0 - DAMPING) * d + DAMPING * r).clamp(-1.0, 1.0);
    }

    let h = |d: f64| d - rhs(d);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut hlo, hhi) = (h(lo), h(hi));
    if hlo == 0.0 {
        return Ok(lo);
    }
    if hhi == 0.0 {
        return Ok(hi);
    }
    if hlo.signum() == hhi.signum() {
        return Err(Error::DeltaNoRoot { n, alpha, beta });
    }
    while hi - lo > DELTA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm == 0.0 {
            return Ok(mid);
        }
        if hm.signum() == hlo.signum() {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `1/2 + cot(beta) / (pi (n + 1/2))`, the large-`n` form of `delta_n(pi, beta)`.
pub fn delta_asymptotic(n: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < PI) {
        return Err(Error::InvalidBoundary(format!(
            "asymptotic delta needs beta in (0, pi), got {beta}"
        )));
    }
    let (s, c) = sin_cos_exact(beta);
    Ok(0.5 + c / s / (PI * (n as f64 + 0.5)))
}

/// `delta_n(alpha, beta)` with `d`, `e`, `g` built from it.
pub fn delta_record(n: usize, alpha: f64, beta: f64) -> Result<DeltaRecord> {
    let delta = solve_delta(n, alpha, beta)?;
    let m = n as f64 + delta;
    // 1 + cos(2x) = 2 cos^2(x) avoids cancellation near delta = 1/2.
    let (s, c) = sin_cos_exact(PI * delta);
    let d = 2.0 * c * c;
    let e = 2.0 * s * c;
    let g = 2.0 * e / (PI * (2.0 * PI * m - e));
    Ok(DeltaRecord { n, delta, d, e, g })
}

/// `d_n`, `e_n`, `g_n` for `alpha = pi`.
pub fn trig_residuals(n: usize, beta: f64) -> Result<DeltaRecord> {
    delta_record(n, PI, beta)
}

/// Records for `n = n_min..=n_max`.
pub fn delta_table(n_min: usize, n_max: usize, alpha: f64, beta: f64) -> Result<Vec<DeltaRecord>> {
    (n_min.max(2)..=n_max).map(|n| delta_record(n, alpha, beta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_cases() {
        for n in [2, 7, 100] {
            assert_eq!(solve_delta(n, PI, PI / 2.0).unwrap(), 0.5);
            assert_eq!(solve_delta(n, PI / 2.0, PI / 2.0).unwrap(), 0.0);
            assert_eq!(solve_delta(n, PI, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_delta(1, PI, 0.0).is_err());
        assert!(solve_delta(3, 0.0, 0.0).is_err());
        assert!(solve_delta(3, PI, PI).is_err());
        assert!(delta_asymptotic(3, 0.0).is_err());
    }

    #[test]
    fn residual_below_tolerance() {
        for &a in &[PI, 3.0 * PI / 4.0, PI / 2.0, PI / 4.0, 0.01] {
            for &b in &[0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, 3.13] {
                for n in [2, 3, 10, 57] {
                    let d = solve_delta(n, a, b).unwrap();
                    assert!((d - delta_rhs(n, a, b, d)).abs() <= DELTA_TOLERANCE);
                    assert!((-1.0..=1.0).contains(&d));
                }
            }
        }
    }

    #[test]
    fn asymptotic_values() {
        assert_eq!(delta_asymptotic(10, PI / 2.0).unwrap(), 0.5);
        assert_abs_diff_eq!(delta_asymptotic(10, PI / 4.0).unwrap(), 0.530316, epsilon = 1e-6);
        let gap = (solve_delta(10, PI, PI / 4.0).unwrap() - delta_asymptotic(10, PI / 4.0).unwrap()).abs();
        assert!(gap * 100.0 < 1.0, "gap {gap}");
    }

    #[test]
    fn asymptotic_gap_scaled_by_n_squared_is_bounded() {
        for beta in [PI / 8.0, PI / 4.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0] {
            let scaled: Vec<f64> = (10..=200)
                .map(|n| {
                    let gap = solve_delta(n, PI, beta).unwrap() - delta_asymptotic(n, beta).unwrap();
                    gap.abs() * (n * n) as f64
                })
                .collect();
            let head = scaled[..20].iter().cloned().fold(0.0, f64::max);
            let tail = scaled[scaled.len() - 20..].iter().cloned().fold(0.0, f64::max);
            assert!(tail <= 1.5 * head + 1e-9, "beta {beta}: {head} -> {tail}");
        }
    }

    #[test]
    fn trig_residual_examples() {
        let r = trig_residuals(12, PI / 2.0).unwrap();
        assert_eq!((r.d, r.e, r.g), (0.0, 0.0, 0.0));
        let r = trig_residuals(10, PI / 4.0).unwrap();
        let eps = r.delta - 0.5;
        assert_abs_diff_eq!(r.d, 2.0 * (PI * eps).sin().powi(2), epsilon = 1e-15);
        assert!(r.d > 0.0 && r.d < 0.05);
        assert!(r.e < 0.0);
        assert!(r.g_identity_residual() <= 1e-12);
        assert!(r.sine_norm_residual() <= 1e-12);
    }

    #[test]
    fn decay_orders() {
        for beta in [PI / 8.0, PI / 4.0, 3.0 * PI / 4.0] {
            let recs = delta_table(10, 200, PI, beta).unwrap();
            let dn2 = recs.iter().map(|r| r.d * (r.n * r.n) as f64).fold(0.0, f64::max);
            let en = recs.iter().map(|r| r.e.abs() * r.n as f64).fold(0.0, f64::max);
            let gn2 = recs.iter().map(|r| r.g.abs() * (r.n * r.n) as f64).fold(0.0, f64::max);
            let cot2 = (1.0 / beta.tan()).powi(2);
            let bound = 4.0 * (1.0 + cot2);
            assert!(dn2 < bound && en < bound && gn2 < bound, "{dn2} {en} {gn2}");
        }
    }

    proptest! {
        #[test]
        fn single_sign_change(n in 2usize..300, alpha in 0.001f64..PI, beta in 0.0f64..(PI - 0.001)) {
            let h = |d: f64| d - delta_rhs(n, alpha, beta, d);
            let samples: Vec<f64> = crate::numeric::linspace(-1.0, 1.0, 401).into_iter().map(h).collect();
            let changes = samples.windows(2).filter(|w| w[0].signum() != w[1].signum() && w[1] != 0.0).count();
            prop_assert!(changes <= 1);
            let d = solve_delta(n, alpha, beta).unwrap();
            prop_assert!(h(d).abs() <= DELTA_TOLERANCE);
        }

        #[test]
        fn g_identity(n in 2usize..500, beta in 0.01f64..3.13) {
            let r = trig_residuals(n, beta).unwrap();
            prop_assert!(r.g_identity_residual() <= 1e-12);
            prop_assert!(r.d.abs() <= 2.0 && r.e.abs() <= 1.0);
        }
    }
}
