//! Refined large-`n` asymptotics of `lambda_n`, `a_n` and `b_n`, the series
//! `l(x)` and `s(x)`, and the split of `l` into three parts when `alpha = pi`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::delta::{delta_record, solve_delta, DeltaRecord};
use crate::error::{Error, Result};
use crate::ivp::BoundaryParams;
use crate::numeric::{linspace, loglog_slope, simpson, sin_cos_exact};
use crate::potential::{Potential, Trig};
use crate::spectrum::{eigenvalues, find_eigenvalues};

/// Default index window for the decay fits.
pub const FIT_WINDOW: (usize, usize) = (10, 100);

/// Residuals at or below this are treated as exact and left out of fits.
pub const FIT_FLOOR: f64 = 1e-13;

fn m_of(n: usize, bp: BoundaryParams) -> Result<f64> {
    Ok(n as f64 + solve_delta(n, bp.alpha(), bp.beta())?)
}

fn l_from_m(q: &Potential, bp: BoundaryParams, m: f64) -> Result<f64> {
    let sign = if bp.alpha() == PI { -1.0 } else { 1.0 };
    Ok(sign * q.oscillatory_moment(m, Trig::Cos)? / (2.0 * PI * m))
}

fn s_from_m(q: &Potential, m: f64) -> f64 {
    -0.5 * q.ramp_sine_moment(2.0 * m)
}

/// `l_n = -+ 1/(2 pi m) * integral of q(x) cos(2 m x)`, `m = n + delta_n`;
/// minus for `alpha = pi`, plus otherwise.
pub fn l_term(q: &Potential, bp: BoundaryParams, n: usize) -> Result<f64> {
    l_from_m(q, bp, m_of(n, bp)?)
}

/// `s_n = -1/2 * integral of (pi - t) q(t) sin(2 m t)`.
pub fn s_term(q: &Potential, bp: BoundaryParams, n: usize) -> Result<f64> {
    Ok(s_from_m(q, m_of(n, bp)?))
}

/// `n + delta_n + [q] / (2 (n + delta_n)) + l_n`.
pub fn predict_lambda(q: &Potential, bp: BoundaryParams, n: usize) -> Result<f64> {
    let m = m_of(n, bp)?;
    Ok(m + q.mean() / (2.0 * m) + l_from_m(q, bp, m)?)
}

fn norming_from(m: f64, s: f64, angle: f64) -> f64 {
    let bracket = 1.0 + 2.0 * s / (PI * m);
    let (sn, cs) = sin_cos_exact(angle);
    PI / 2.0 * bracket * sn * sn + PI / (2.0 * m * m) * bracket * cs * cs
}

/// Two-term predictions of `(a_n, b_n)` with the `O(1/n^2)` remainders set
/// to zero.
pub fn predict_norming(q: &Potential, bp: BoundaryParams, n: usize) -> Result<(f64, f64)> {
    let m = m_of(n, bp)?;
    let s = s_from_m(q, m);
    Ok((norming_from(m, s, bp.alpha()), norming_from(m, s, bp.beta())))
}

/// Leading size of a norming constant: `pi/2 sin^2` when the sine is
/// nonzero, otherwise `pi / (2 m^2)`.
fn norming_scale(m: f64, angle: f64) -> f64 {
    let (s, _) = sin_cos_exact(angle);
    if s != 0.0 {
        PI / 2.0 * s * s
    } else {
        PI / (2.0 * m * m)
    }
}

/// One row of the comparison between computed and predicted quantities.
/// The `a`/`b` residuals are divided by the leading size of the constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub lambda_computed: f64,
    pub lambda_predicted: f64,
    pub residual: f64,
    pub a_computed: f64,
    pub a_predicted: f64,
    pub a_residual: f64,
    pub b_computed: f64,
    pub b_predicted: f64,
    pub b_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<AsymptoticRow>,
    pub window: (usize, usize),
    /// Least-squares slopes of `log|residual|` against `log n` over the
    /// window; `None` when fewer than three residuals exceed `FIT_FLOOR`.
    pub lambda_slope: Option<f64>,
    pub a_slope: Option<f64>,
    pub b_slope: Option<f64>,
    pub flags: Vec<String>,
}

/// Computed versus predicted `lambda_n`, `a_n`, `b_n` for `n = 2..=n_max`.
pub fn asymptotic_report(
    q: &Potential,
    bp: BoundaryParams,
    n_max: usize,
    window: (usize, usize),
) -> Result<AsymptoticReport> {
    if n_max < 2 || window.0 > window.1 {
        return Err(Error::InvalidArgument(format!(
            "need n_max >= 2 and an ordered window, got {n_max} and {window:?}"
        )));
    }
    let eig = find_eigenvalues(q, bp, n_max)?;
    let mut rows = Vec::with_capacity(n_max - 1);
    for ep in eig.iter().skip(2) {
        let n = ep.n;
        let m = m_of(n, bp)?;
        let lambda_predicted = m + q.mean() / (2.0 * m) + l_from_m(q, bp, m)?;
        let (a_predicted, b_predicted) = predict_norming(q, bp, n)?;
        rows.push(AsymptoticRow {
            n,
            lambda_computed: ep.lambda,
            lambda_predicted,
            residual: ep.lambda - lambda_predicted,
            a_computed: ep.a,
            a_predicted,
            a_residual: (ep.a - a_predicted) / norming_scale(m, bp.alpha()),
            b_computed: ep.b,
            b_predicted,
            b_residual: (ep.b - b_predicted) / norming_scale(m, bp.beta()),
        });
    }
    let fit = |col: fn(&AsymptoticRow) -> f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.n >= window.0 && r.n <= window.1)
            .map(|r| (r.n as f64, col(r)))
            .unzip();
        loglog_slope(&xs, &ys, FIT_FLOOR)
    };
    let mut flags = Vec::new();
    if bp.alpha() == PI && bp.beta() == 0.0 {
        flags.push("alpha = pi with beta = 0: l_n uses the alpha = pi sign".to_string());
    }
    if n_max < window.1 {
        flags.push(format!("n_max {n_max} is below the fit window end {}", window.1));
    }
    Ok(AsymptoticReport {
        alpha: bp.alpha(),
        beta: bp.beta(),
        lambda_slope: fit(|r| r.residual),
        a_slope: fit(|r| r.a_residual),
        b_slope: fit(|r| r.b_residual),
        rows,
        window,
        flags,
    })
}

/// Which of the two series to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// `l(x) = sum l_n sin(m x)`.
    L,
    /// `s(x) = sum s_n / m cos(m x)`.
    S,
}

/// Precomputed `m_n`, `l_n`, `s_n` for `n = 2..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerms {
    pub m: Vec<f64>,
    pub l: Vec<f64>,
    pub s: Vec<f64>,
}

impl SeriesTerms {
    pub fn new(q: &Potential, bp: BoundaryParams, n_max: usize) -> Result<Self> {
        let mut t = SeriesTerms {
            m: Vec::new(),
            l: Vec::new(),
            s: Vec::new(),
        };
        for n in 2..=n_max {
            let m = m_of(n, bp)?;
            t.m.push(m);
            t.l.push(l_from_m(q, bp, m)?);
            t.s.push(s_from_m(q, m));
        }
        Ok(t)
    }

    pub fn n_max(&self) -> usize {
        self.m.len() + 1
    }

    /// Partial sum through index `n_max` (clamped to the stored terms).
    pub fn eval(&self, kind: SeriesKind, x: f64, n_max: usize) -> f64 {
        let count = n_max.saturating_sub(1).min(self.m.len());
        (0..count)
            .map(|i| match kind {
                SeriesKind::L => self.l[i] * (self.m[i] * x).sin(),
                SeriesKind::S => self.s[i] / self.m[i] * (self.m[i] * x).cos(),
            })
            .sum()
    }
}

fn check_x(x: f64) -> Result<()> {
    if (0.0..=2.0 * PI).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x = {x} not in [0, 2 pi]")))
    }
}

/// Partial sum of `l` or `s` through `n_max` at `x` in `[0, 2 pi]`.
pub fn series_eval(kind: SeriesKind, q: &Potential, bp: BoundaryParams, x: f64, n_max: usize) -> Result<f64> {
    check_x(x)?;
    if n_max < 2 {
        return Err(Error::InvalidArgument("series truncation must be at least 2".into()));
    }
    Ok(SeriesTerms::new(q, bp, n_max)?.eval(kind, x, n_max))
}

/// Uniform-convergence diagnostics of a partial-sum family on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    pub n: usize,
    /// `max |S_2N(x) - S_N(x)|` over the sample grid.
    pub cauchy: f64,
    /// Discrete total variation of `S_N` on the sample grid.
    pub total_variation: f64,
}

/// Cauchy differences and total variation for each `N` in `ns`, sampled at
/// `points` points of `[a, b]`.
pub fn series_diagnostics(
    kind: SeriesKind,
    q: &Potential,
    bp: BoundaryParams,
    ns: &[usize],
    a: f64,
    b: f64,
    points: usize,
) -> Result<Vec<SeriesDiagnostics>> {
    check_x(a)?;
    check_x(b)?;
    let top = ns.iter().copied().max().unwrap_or(2) * 2;
    let terms = SeriesTerms::new(q, bp, top)?;
    let xs = linspace(a, b, points);
    Ok(ns
        .iter()
        .map(|&n| {
            let s_n: Vec<f64> = xs.iter().map(|&x| terms.eval(kind, x, n)).collect();
            let cauchy = xs
                .iter()
                .zip(&s_n)
                .map(|(&x, v)| (terms.eval(kind, x, 2 * n) - v).abs())
                .fold(0.0, f64::max);
            let total_variation = s_n.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            SeriesDiagnostics {
                n,
                cauchy,
                total_variation,
            }
        })
        .collect())
}

/// A continuous piecewise-linear function, exact trigonometric moments.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    /// Samples `f` at the sorted, deduplicated `knots` and interpolates.
    pub fn from_fn<F: Fn(f64) -> f64>(mut knots: Vec<f64>, f: F) -> Self {
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots.iter().map(|&t| f(t)).collect();
        Self { knots, values }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&x| x <= t).clamp(1, k.len() - 1);
        let (t0, t1) = (k[i - 1], k[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// `integral of f(t) trig(omega t)` over the knot range.
    pub fn moment(&self, omega: f64, kind: Trig) -> f64 {
        // (c0 + c1 t) sin(wt) -> -(c0 + c1 t) cos(wt)/w + c1 sin(wt)/w^2
        // (c0 + c1 t) cos(wt) ->  (c0 + c1 t) sin(wt)/w + c1 cos(wt)/w^2
        let mut total = 0.0;
        for i in 1..self.knots.len() {
            let (t0, t1) = (self.knots[i - 1], self.knots[i]);
            let (v0, v1) = (self.values[i - 1], self.values[i]);
            let slope = (v1 - v0) / (t1 - t0);
            let anti = |t: f64, v: f64| {
                let (s, c) = (omega * t).sin_cos();
                match kind {
                    Trig::Sin => -v * c / omega + slope * s / (omega * omega),
                    Trig::Cos => v * s / omega + slope * c / (omega * omega),
                }
            };
            total += anti(t1, v1) - anti(t0, v0);
        }
        total
    }
}

/// `sigma(t/2)` on `[0, pi]`.
fn sigma_half(q: &Potential) -> PiecewiseLinear {
    let mut knots = vec![0.0, PI];
    knots.extend(q.breakpoints().iter().filter(|&&x| x < PI / 2.0).map(|x| 2.0 * x));
    PiecewiseLinear::from_fn(knots, |t| q.sigma_unchecked(t / 2.0))
}

/// `sigma(pi - t/2)` on `[0, pi]`.
fn sigma_reflected_half(q: &Potential) -> PiecewiseLinear {
    let mut knots = vec![0.0, PI];
    knots.extend(
        q.breakpoints()
            .iter()
            .filter(|&&x| x > PI / 2.0)
            .map(|x| 2.0 * (PI - x)),
    );
    PiecewiseLinear::from_fn(knots, |t| q.sigma_unchecked(PI - t / 2.0))
}

/// `sigma(t/2) + sigma(pi - t/2)` on `[0, pi]`.
pub fn sigma_sum(q: &Potential) -> PiecewiseLinear {
    let mut knots = sigma_half(q).knots;
    knots.extend(sigma_reflected_half(q).knots);
    PiecewiseLinear::from_fn(knots, |t| q.sigma_unchecked(t / 2.0) + q.sigma_unchecked(PI - t / 2.0))
}

/// Per-index data of the `alpha = pi` decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionTerm {
    pub n: usize,
    pub m: f64,
    pub d: f64,
    pub e: f64,
    pub g: f64,
    /// `l_n` from the cosine moment of `q`.
    pub l: f64,
    /// `integral of (sigma(t/2) + sigma(pi - t/2)) sin(m t)` over `[0, pi]`.
    pub f1: f64,
    /// `integral of sigma(pi - t/2) sin(m t)`.
    pub f2: f64,
    /// `integral of sigma(pi - t/2) cos(m t)`.
    pub f3: f64,
    /// `f1 - d f2 + e f3`.
    pub f: f64,
}

/// The three coefficient families `l = l1 + l2 + l3` for `alpha = pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub beta: f64,
    pub sigma_pi: f64,
    pub terms: Vec<DecompositionTerm>,
}

fn check_open_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < PI {
        Ok(())
    } else {
        Err(Error::InvalidBoundary(format!(
            "decomposition needs beta in (0, pi), got {beta}"
        )))
    }
}

impl Decomposition {
    pub fn new(q: &Potential, beta: f64, n_max: usize) -> Result<Self> {
        check_open_beta(beta)?;
        let bp = BoundaryParams::new(PI, beta)?;
        let s_sum = sigma_sum(q);
        let s_ref = sigma_reflected_half(q);
        let mut terms = Vec::new();
        for n in 2..=n_max {
            let DeltaRecord { d, e, g, .. } = delta_record(n, PI, beta)?;
            let m = n as f64 + solve_delta(n, PI, beta)?;
            let f1 = s_sum.moment(m, Trig::Sin);
            let f2 = s_ref.moment(m, Trig::Sin);
            let f3 = s_ref.moment(m, Trig::Cos);
            terms.push(DecompositionTerm {
                n,
                m,
                d,
                e,
                g,
                l: l_from_m(q, bp, m)?,
                f1,
                f2,
                f3,
                f: f1 - d * f2 + e * f3,
            });
        }
        Ok(Self {
            beta,
            sigma_pi: q.sigma_unchecked(PI),
            terms,
        })
    }

    /// The `n`-th summands of `l1`, `l2`, `l3` at `x`.
    pub fn term_parts(&self, t: &DecompositionTerm, x: f64) -> (f64, f64, f64) {
        let sn = (t.m * x).sin();
        let l1 = self.sigma_pi / (2.0 * PI) * sn / t.m;
        let l2 = -self.sigma_pi * t.d / (2.0 * PI) * sn / t.m;
        let l3 = -t.f / (2.0 * PI) * sn;
        (l1, l2, l3)
    }

    fn upto(&self, n_max: usize) -> impl Iterator<Item = &DecompositionTerm> {
        self.terms.iter().filter(move |t| t.n <= n_max)
    }

    /// Largest `|l_n sin(m x) - (l1_n + l2_n + l3_n)|` over `n <= n_max`.
    pub fn termwise_gap(&self, x: f64, n_max: usize) -> f64 {
        self.upto(n_max)
            .map(|t| {
                let (a, b, c) = self.term_parts(t, x);
                (t.l * (t.m * x).sin() - (a + b + c)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Partial sums `(l1, l2, l3)` through `n_max`.
    pub fn partial_sums(&self, x: f64, n_max: usize) -> (f64, f64, f64) {
        self.upto(n_max).fold((0.0, 0.0, 0.0), |acc, t| {
            let (a, b, c) = self.term_parts(t, x);
            (acc.0 + a, acc.1 + b, acc.2 + c)
        })
    }

    /// Partial sum of `l` itself from the `l_n`.
    pub fn l_sum(&self, x: f64, n_max: usize) -> f64 {
        self.upto(n_max).map(|t| t.l * (t.m * x).sin()).sum()
    }

    /// `l3(2 pi - x) - l3(x)` minus the correction series
    /// `(1/2pi) sum d f sin(mx) - (1/2pi) sum e f cos(mx)`.
    pub fn l3_symmetry_gap(&self, x: f64, n_max: usize) -> f64 {
        let l3_at = |y: f64| self.partial_sums(y, n_max).2;
        let corr: f64 = self
            .upto(n_max)
            .map(|t| (t.d * t.f * (t.m * x).sin() - t.e * t.f * (t.m * x).cos()) / (2.0 * PI))
            .sum();
        (l3_at(2.0 * PI - x) - l3_at(x) - corr).abs()
    }

    /// `sum over n > n_max of |d_n| / m_n`, truncated at `cutoff`.
    pub fn l2_tail(beta: f64, n_max: usize, cutoff: usize) -> Result<f64> {
        check_open_beta(beta)?;
        let mut tail = 0.0;
        for n in (n_max + 1).max(2)..=cutoff {
            let r = delta_record(n, PI, beta)?;
            tail += r.d.abs() / r.m();
        }
        Ok(tail)
    }
}

/// `l1`, `l2`, `l3` partial sums through `n_max` at `x`.
pub fn decompose_l(q: &Potential, beta: f64, x: f64, n_max: usize) -> Result<(f64, f64, f64)> {
    check_x(x)?;
    Ok(Decomposition::new(q, beta, n_max)?.partial_sums(x, n_max))
}

/// Projection of `sigma(t/2) + sigma(pi - t/2)` on the two lowest
/// eigenfunctions of `L(0, pi, beta)`; `sin(lambda x)` for positive
/// eigenvalues, `sinh(kappa x)` for negative ones and `x` at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Sigma2 {
    mus: [f64; 2],
    coefs: [f64; 2],
}

fn free_mode(mu: f64, x: f64) -> f64 {
    if mu.abs() < 1e-14 {
        x
    } else if mu > 0.0 {
        (mu.sqrt() * x).sin()
    } else {
        ((-mu).sqrt() * x).sinh()
    }
}

impl Sigma2 {
    pub fn new(q: &Potential, beta: f64) -> Result<Self> {
        check_open_beta(beta)?;
        let bp = BoundaryParams::new(PI, beta)?;
        let mus = eigenvalues(&Potential::zero(), bp, 1)?;
        let s = sigma_sum(q);
        let mut coefs = [0.0; 2];
        for (k, &mu) in mus.iter().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for w in s.knots().windows(2) {
                num += simpson(|t| s.eval(t) * free_mode(mu, t), w[0], w[1], 64);
                den += simpson(|t| free_mode(mu, t).powi(2), w[0], w[1], 64);
            }
            coefs[k] = num / den;
        }
        Ok(Self {
            mus: [mus[0], mus[1]],
            coefs,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (0..2).map(|k| self.coefs[k] * free_mode(self.mus[k], x)).sum()
    }
}

/// The rearranged form of `l3` on `(0, pi]`:
/// `(-S(x) + sigma2(x))/4 + sum g f1 sin/4 + sum d f2 sin/(2pi) - sum e f3 sin/(2pi)`
/// with `S(x) = sigma(x/2) + sigma(pi - x/2)`. Agrees with the direct partial
/// sum of `l3` only in the limit `n_max -> infinity`.
pub fn l3_rearranged(q: &Potential, dec: &Decomposition, sigma2: &Sigma2, x: f64, n_max: usize) -> f64 {
    let s = q.sigma_unchecked(x / 2.0) + q.sigma_unchecked(PI - x / 2.0);
    let series: f64 = dec
        .upto(n_max)
        .map(|t| {
            let sn = (t.m * x).sin();
            t.g * t.f1 * sn / 4.0 + t.d * t.f2 * sn / (2.0 * PI) - t.e * t.f3 * sn / (2.0 * PI)
        })
        .sum();
    0.25 * (-s + sigma2.eval(x)) + series
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bp(a: f64, b: f64) -> BoundaryParams {
        BoundaryParams::new(a, b).unwrap()
    }

    fn step() -> Potential {
        Potential::from_parts(vec![0.0, PI / 2.0, PI], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn l_term_examples() {
        assert_abs_diff_eq!(
            l_term(&Potential::constant(3.0), bp(PI, PI / 2.0), 7).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(l_term(&Potential::zero(), bp(1.0, 2.0), 5).unwrap(), 0.0);
        let m = 10.0 + solve_delta(10, PI, PI / 4.0).unwrap();
        let want = -(m * PI).sin() / (2.0 * m * 2.0 * PI * m);
        assert_abs_diff_eq!(l_term(&step(), bp(PI, PI / 4.0), 10).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn s_term_examples() {
        assert_eq!(s_term(&Potential::zero(), bp(PI, 1.0), 4).unwrap(), 0.0);
        // q = 1, m = n + 1/2: integral of (pi - t) sin(2mt) = pi/(2m) - sin(2 pi m)/(4m^2).
        let n = 9;
        let m = n as f64 + 0.5;
        let want = -0.5 * (PI / (2.0 * m) - (2.0 * PI * m).sin() / (4.0 * m * m));
        assert_abs_diff_eq!(
            s_term(&Potential::constant(1.0), bp(PI, PI / 2.0), n).unwrap(),
            want,
            epsilon = 1e-14
        );
    }

    #[test]
    fn predict_lambda_constant_shift() {
        let p = predict_lambda(&Potential::constant(1.0), bp(PI, PI / 2.0), 10).unwrap();
        assert_abs_diff_eq!(p, 10.5 + 1.0 / 21.0, epsilon = 1e-12);
        let exact = (10.5f64 * 10.5 + 1.0).sqrt();
        let resid = (exact - p).abs();
        let model = 1.0 / (8.0 * 10.5f64.powi(3));
        assert!((resid - model).abs() < 0.2 * model);
        assert_abs_diff_eq!(
            predict_lambda(&Potential::zero(), bp(2.0, 1.0), 6).unwrap(),
            6.0 + solve_delta(6, 2.0, 1.0).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn predict_norming_zero_potential() {
        for n in 2..30 {
            let m = n as f64 + 0.5;
            let (a, b) = predict_norming(&Potential::zero(), bp(PI, PI / 2.0), n).unwrap();
            assert_abs_diff_eq!(a, PI / (2.0 * m * m), epsilon = 1e-15);
            assert_abs_diff_eq!(b, PI / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn report_step_potential_decays() {
        let r = asymptotic_report(&step(), bp(PI, PI / 4.0), 100, FIT_WINDOW).unwrap();
        assert_eq!(r.rows.first().unwrap().n, 2);
        assert!(r.rows.windows(2).all(|w| w[1].n == w[0].n + 1));
        assert!(r.lambda_slope.unwrap() <= -1.8, "{:?}", r.lambda_slope);
        assert!(r.a_slope.unwrap() <= -1.8, "{:?}", r.a_slope);
        assert!(r.b_slope.unwrap() <= -1.8, "{:?}", r.b_slope);
        assert!(r.flags.is_empty());
        let flagged = asymptotic_report(&step(), bp(PI, 0.0), 20, FIT_WINDOW).unwrap();
        assert_eq!(flagged.flags.len(), 2);
    }

    #[test]
    fn series_vanish_for_trivial_potentials() {
        for x in [0.3, 2.0, 5.5] {
            assert_eq!(
                series_eval(SeriesKind::L, &Potential::zero(), bp(PI, 1.0), x, 30).unwrap(),
                0.0
            );
            assert_eq!(
                series_eval(SeriesKind::S, &Potential::zero(), bp(PI, 1.0), x, 30).unwrap(),
                0.0
            );
            let l = series_eval(SeriesKind::L, &Potential::constant(2.0), bp(PI, PI / 2.0), x, 30).unwrap();
            assert!(l.abs() < 1e-14);
        }
        assert!(series_eval(SeriesKind::L, &step(), bp(PI, 1.0), 7.0, 30).is_err());
    }

    #[test]
    fn cauchy_differences_shrink() {
        let d = series_diagnostics(
            SeriesKind::L,
            &step(),
            bp(PI, PI / 4.0),
            &[25, 50, 100, 200],
            0.5,
            2.0 * PI - 0.5,
            400,
        )
        .unwrap();
        assert!(d.windows(2).all(|w| w[1].cauchy < w[0].cauchy), "{d:?}");
        let tv: Vec<f64> = d.iter().map(|r| r.total_variation).collect();
        assert!(tv[3] < 2.0 * tv[2], "{tv:?}");
    }

    #[test]
    fn piecewise_linear_moments_match_quadrature() {
        let f = PiecewiseLinear::from_fn(vec![0.0, 0.4, 1.7, PI], |t| (3.0 * t).cos() + t);
        for omega in [0.7, 3.0, 40.5] {
            for kind in [Trig::Sin, Trig::Cos] {
                let quad: f64 = f
                    .knots()
                    .windows(2)
                    .map(|w| {
                        simpson(
                            |t| {
                                f.eval(t)
                                    * if kind == Trig::Sin {
                                        (omega * t).sin()
                                    } else {
                                        (omega * t).cos()
                                    }
                            },
                            w[0],
                            w[1],
                            4000,
                        )
                    })
                    .sum();
                assert_abs_diff_eq!(f.moment(omega, kind), quad, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn sigma_helpers() {
        let q = step();
        let s = sigma_sum(&q);
        for t in [0.0, 0.5, 1.0, 2.0, PI] {
            let want = q.sigma(t / 2.0).unwrap() + q.sigma(PI - t / 2.0).unwrap();
            assert_abs_diff_eq!(s.eval(t), want, epsilon = 1e-14);
        }
    }

    #[test]
    fn decomposition_identities() {
        let q = step();
        for beta in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
            let dec = Decomposition::new(&q, beta, 200).unwrap();
            for x in [0.5, PI / 2.0, PI, 2.0 * PI - 0.5] {
                assert!(dec.termwise_gap(x, 200) <= 1e-10);
                let (a, b, c) = dec.partial_sums(x, 200);
                assert!((dec.l_sum(x, 200) - (a + b + c)).abs() <= 1e-8);
                assert!(dec.l3_symmetry_gap(x, 200) <= 1e-8);
            }
        }
        let (a, b, c) = decompose_l(&Potential::zero(), PI / 4.0, 1.0, 50).unwrap();
        assert_eq!((a, b, c), (0.0, 0.0, 0.0));
        assert!(Decomposition::new(&q, 0.0, 10).is_err());
    }

    #[test]
    fn l2_tail_decays_like_inverse_square() {
        let beta = PI / 4.0;
        let scaled: Vec<f64> = [20usize, 40, 80]
            .iter()
            .map(|&n| Decomposition::l2_tail(beta, n, 4000).unwrap() * (n * n) as f64)
            .collect();
        assert!(scaled.iter().all(|&v| v < 5.0), "{scaled:?}");
    }

    #[test]
    fn rearranged_l3_approaches_direct_sum() {
        let q = step();
        let beta = PI / 4.0;
        let dec = Decomposition::new(&q, beta, 800).unwrap();
        let s2 = Sigma2::new(&q, beta).unwrap();
        for x in [1.0, PI / 2.0, 2.5] {
            let direct = dec.partial_sums(x, 800).2;
            let other = l3_rearranged(&q, &dec, &s2, x, 800);
            assert!((direct - other).abs() < 5e-3, "x {x}: {direct} vs {other}");
        }
    }

    #[test]
    fn sigma2_uses_hyperbolic_mode_for_negative_ground_state() {
        // For beta close to pi the lowest eigenvalue of L(0, pi, beta) is negative.
        let s2 = Sigma2::new(&step(), 0.9 * PI).unwrap();
        assert!(s2.mus[0] < 0.0);
        assert!(s2.eval(1.0).is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn s_term_is_linear(n in 2usize..200, beta in 0.1f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
            let q1 = Potential::from_parts(vec![0.0, 1.0, PI], vec![c1, 0.0]).unwrap_or_else(|_| Potential::constant(c1));
            let q2 = Potential::from_parts(vec![0.0, 2.0, PI], vec![0.0, c2]).unwrap_or_else(|_| Potential::constant(c2));
            let b = bp(PI, beta);
            let lhs = s_term(&q1.sum(&q2), b, n).unwrap();
            let rhs = s_term(&q1, b, n).unwrap() + s_term(&q2, b, n).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
