//! Expansions `f = sum c_n phi_n` in the eigenfunctions of `L(q, alpha, beta)`
//! and their uniform convergence on subintervals and on all of `[0, pi]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{wronskian_fn, BoundaryParams, Solution};
use crate::numeric::{linspace, QuadratureRule};
use crate::potential::Potential;
use crate::spectrum::{find_eigenvalues, shift_off_zero, Eigenpair};

/// Sup norms are taken over this many equally spaced points.
pub const SUP_GRID: usize = 2048;

/// Fewest Simpson panels used for coefficients.
pub const MIN_PANELS: usize = 8192;

/// Target node density for coefficients, per eigenfunction wavelength.
pub const NODES_PER_WAVELENGTH: f64 = 64.0;

/// Coefficients are refused when nodes are sparser than this per wavelength.
pub const MIN_NODES_PER_WAVELENGTH: f64 = 8.0;

/// Smallest accepted length of a sampled target.
pub const MIN_SAMPLES: usize = 256;

/// The function being expanded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetFunction {
    Constant {
        value: f64,
    },
    /// `c0 + c1 x`.
    Linear {
        c0: f64,
        c1: f64,
    },
    /// Linear interpolation through `(x, y)`; `x` sorted and spanning `[0, pi]`.
    Sampled {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

impl TargetFunction {
    /// Samples `f` at `points` equally spaced points of `[0, pi]`.
    pub fn sampled<F: Fn(f64) -> f64>(f: F, points: usize) -> Result<Self> {
        let x = linspace(0.0, PI, points);
        let y = x.iter().map(|&t| f(t)).collect();
        let t = TargetFunction::Sampled { x, y };
        t.validate()?;
        Ok(t)
    }

    /// Sawtooth `(x mod period) - period/2` sampled at `points` points.
    pub fn sawtooth(period: f64, points: usize) -> Result<Self> {
        Self::sampled(|t| (t % period) - 0.5 * period, points)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("target function: {m}")));
        match self {
            TargetFunction::Constant { value } if !value.is_finite() => bad("non-finite value"),
            TargetFunction::Linear { c0, c1 } if !(c0.is_finite() && c1.is_finite()) => bad("non-finite coefficients"),
            TargetFunction::Sampled { x, y } => {
                if x.len() != y.len() {
                    return bad("x and y lengths differ");
                }
                if x.len() < MIN_SAMPLES {
                    return bad("fewer than 256 samples");
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("sample points are not strictly increasing");
                }
                if (x[0] - 0.0).abs() > 1e-12 || (x[x.len() - 1] - PI).abs() > 1e-12 {
                    return bad("samples must span [0, pi]");
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return bad("non-finite sample");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TargetFunction::Constant { value } => *value,
            TargetFunction::Linear { c0, c1 } => c0 + c1 * t,
            TargetFunction::Sampled { x, y } => {
                let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1);
                let (x0, x1) = (x[i - 1], x[i]);
                y[i - 1] + (y[i] - y[i - 1]) * (t - x0) / (x1 - x0)
            }
        }
    }

    pub fn at_start(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn at_end(&self) -> f64 {
        self.eval(PI)
    }

    /// The mirrored target `f(pi - x)`.
    pub fn reflected(&self) -> Self {
        match self {
            TargetFunction::Constant { value } => TargetFunction::Constant { value: *value },
            TargetFunction::Linear { c0, c1 } => TargetFunction::Linear {
                c0: c0 + c1 * PI,
                c1: -c1,
            },
            TargetFunction::Sampled { x, y } => TargetFunction::Sampled {
                x: x.iter().rev().map(|v| PI - v).collect(),
                y: y.iter().rev().copied().collect(),
            },
        }
    }

    /// Points where `f` may have a kink.
    fn kinks(&self) -> &[f64] {
        match self {
            TargetFunction::Sampled { x, .. } => x,
            _ => &[],
        }
    }
}

/// Quadrature rule for integrals against `phi_0..phi_n`: Simpson on the
/// union of the potential breakpoints and the target's kinks.
pub fn coefficient_rule(
    q: &Potential,
    f: &TargetFunction,
    top: &Eigenpair,
    panels: Option<usize>,
) -> Result<QuadratureRule> {
    let lambda = top.mu.max(0.0).sqrt();
    let wavelength = if lambda > 0.0 { 2.0 * PI / lambda } else { f64::INFINITY };
    let panels = panels.unwrap_or_else(|| {
        let dense = (NODES_PER_WAVELENGTH / 2.0 * PI / wavelength).ceil() as usize;
        dense.max(MIN_PANELS)
    });
    let mut points: Vec<f64> = q.breakpoints().to_vec();
    points.extend_from_slice(f.kinks());
    points.sort_by(f64::total_cmp);
    points.dedup();
    let rule = QuadratureRule::simpson(&points, panels);
    let required = wavelength / MIN_NODES_PER_WAVELENGTH;
    if rule.spacing > required {
        return Err(Error::CoarseGrid {
            spacing: rule.spacing,
            required,
        });
    }
    Ok(rule)
}

/// Eigenfunctions and coefficients of one expansion.
#[derive(Clone, Debug)]
pub struct Expansion<'q> {
    pub bp: BoundaryParams,
    pub eig: Vec<Eigenpair>,
    pub coefs: Vec<f64>,
    sols: Vec<Solution<'q>>,
    /// `integral of f^2` on the same quadrature rule.
    pub f_norm_sq: f64,
}

impl<'q> Expansion<'q> {
    /// Expands `f` through index `n_max`.
    pub fn new(q: &'q Potential, bp: BoundaryParams, f: &TargetFunction, n_max: usize) -> Result<Self> {
        Self::with_panels(q, bp, f, n_max, None)
    }

    /// As [`Expansion::new`] with an explicit Simpson panel count; fails with
    /// [`Error::CoarseGrid`] below 8 nodes per wavelength of `phi_n_max`.
    pub fn with_panels(
        q: &'q Potential,
        bp: BoundaryParams,
        f: &TargetFunction,
        n_max: usize,
        panels: Option<usize>,
    ) -> Result<Self> {
        f.validate()?;
        let eig = find_eigenvalues(q, bp, n_max.max(1))?;
        let eig: Vec<Eigenpair> = eig.into_iter().take(n_max + 1).collect();
        let rule = coefficient_rule(q, f, eig.last().unwrap(), panels)?;
        let fv: Vec<f64> = rule.nodes.iter().map(|&x| f.eval(x)).collect();
        let sols: Vec<Solution<'q>> = eig.iter().map(|e| Solution::phi(q, e.mu, bp.alpha())).collect();
        let coefs = sols
            .par_iter()
            .zip(&eig)
            .map(|(s, e)| {
                let ip: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&fv)
                    .map(|((&x, w), fx)| w * fx * s.value(x))
                    .sum();
                ip / e.a
            })
            .collect();
        let f_norm_sq = rule.integrate_values(&fv.iter().map(|v| v * v).collect::<Vec<_>>());
        Ok(Self {
            bp,
            eig,
            coefs,
            sols,
            f_norm_sq,
        })
    }

    pub fn n_max(&self) -> usize {
        self.coefs.len() - 1
    }

    /// `sum_{n <= n_max} c_n phi_n(x)`.
    pub fn partial_sum(&self, x: f64, n_max: usize) -> f64 {
        self.sols
            .iter()
            .zip(&self.coefs)
            .take(n_max + 1)
            .map(|(s, c)| c * s.value(x))
            .sum()
    }

    /// Partial sums at every `x` in `xs` for every truncation in `ns`
    /// (`result[k][j]` is `S_{ns[k]}(xs[j])`).
    pub fn partial_sums(&self, xs: &[f64], ns: &[usize]) -> Vec<Vec<f64>> {
        let cols: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&x| {
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(ns.len());
                let mut next = 0;
                for (n, (s, c)) in self.sols.iter().zip(&self.coefs).enumerate() {
                    if next == ns.len() {
                        break;
                    }
                    acc += c * s.value(x);
                    while next < ns.len() && ns[next] == n {
                        out.push(acc);
                        next += 1;
                    }
                }
                out
            })
            .collect();
        (0..ns.len()).map(|k| cols.iter().map(|c| c[k]).collect()).collect()
    }

    /// Cumulative `sum_{n <= N} c_n^2 a_n` for every `N`.
    pub fn parseval_partials(&self) -> Vec<f64> {
        self.coefs
            .iter()
            .zip(&self.eig)
            .scan(0.0, |acc, (c, e)| {
                *acc += c * c * e.a;
                Some(*acc)
            })
            .collect()
    }
}

/// The subinterval on which uniform convergence is expected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subinterval {
    /// `[a, pi]`, the setting where every eigenfunction vanishes at 0.
    Right(f64),
    /// `[0, b]`, the mirrored setting.
    Left(f64),
}

impl Subinterval {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Subinterval::Right(a) => (a, PI),
            Subinterval::Left(b) => (0.0, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub n: usize,
    pub err_restricted: f64,
    pub err_full: f64,
    /// `max |S_N|` over `[0, pi]`.
    pub sup_partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub interval: Subinterval,
    pub rows: Vec<ExpansionRow>,
    pub coefficients: Vec<f64>,
    pub parseval: Vec<f64>,
    pub f_norm_sq: f64,
}

/// Sup-norm errors of the partial sums for each `N` in `ns` (strictly
/// increasing) on the subinterval and on `[0, pi]`.
pub fn convergence_report(
    q: &Potential,
    bp: BoundaryParams,
    f: &TargetFunction,
    ns: &[usize],
    interval: Subinterval,
) -> Result<ExpansionReport> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "N list must be non-empty and strictly increasing".into(),
        ));
    }
    let (lo, hi) = interval.bounds();
    if !(lo < hi && (0.0..=PI).contains(&lo) && (0.0..=PI).contains(&hi)) {
        return Err(Error::InvalidArgument(format!("bad subinterval {interval:?}")));
    }
    let exp = Expansion::new(q, bp, f, *ns.last().unwrap())?;
    Ok(report_from(&exp, f, ns, interval))
}

/// Same as [`convergence_report`] but reusing an existing expansion.
pub fn report_from(exp: &Expansion<'_>, f: &TargetFunction, ns: &[usize], interval: Subinterval) -> ExpansionReport {
    let (lo, hi) = interval.bounds();
    let xr = linspace(lo, hi, SUP_GRID);
    let xf = linspace(0.0, PI, SUP_GRID);
    let sr = exp.partial_sums(&xr, ns);
    let sf = exp.partial_sums(&xf, ns);
    let sup_err = |xs: &[f64], s: &[f64]| {
        xs.iter()
            .zip(s)
            .map(|(&x, v)| (f.eval(x) - v).abs())
            .fold(0.0, f64::max)
    };
    let rows = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| ExpansionRow {
            n,
            err_restricted: sup_err(&xr, &sr[k]),
            err_full: sup_err(&xf, &sf[k]),
            sup_partial_sum: sf[k].iter().fold(0.0f64, |m, v| m.max(v.abs())),
        })
        .collect();
    ExpansionReport {
        interval,
        rows,
        coefficients: exp.coefs.clone(),
        parseval: exp.parseval_partials(),
        f_norm_sq: exp.f_norm_sq,
    }
}

/// `psi(x, 0) / W(0) + sum_{n <= N} phi_n(x) / (mu_n a_n)` for `alpha = pi`;
/// tends to zero on `(0, pi]`.
#[derive(Clone, Debug)]
pub struct PhiN<'q> {
    q: &'q Potential,
    beta: f64,
    w0: f64,
    eig: Vec<Eigenpair>,
}

/// Below this `|W(0)|` zero counts as an eigenvalue.
pub const W0_GUARD: f64 = 1e-10;

impl<'q> PhiN<'q> {
    pub fn new(q: &'q Potential, beta: f64, n_max: usize) -> Result<Self> {
        let bp = BoundaryParams::new(PI, beta)?;
        let w0 = wronskian_fn(q, 0.0, bp);
        if w0.abs() < W0_GUARD {
            return Err(Error::ZeroEigenvalue(w0.abs()));
        }
        let eig = find_eigenvalues(q, bp, n_max.max(1))?
            .into_iter()
            .take(n_max + 1)
            .collect();
        Ok(Self { q, beta, w0, eig })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let head = Solution::psi(self.q, 0.0, self.beta).value(x) / self.w0;
        let tail: f64 = self
            .eig
            .iter()
            .map(|e| Solution::phi(self.q, e.mu, PI).value(x) / (e.mu * e.a))
            .sum();
        head + tail
    }
}

/// Evaluates `phi_N(x)`; fails with [`Error::ZeroEigenvalue`] if zero is an
/// eigenvalue of `L(q, pi, beta)`.
pub fn phi_n_check(q: &Potential, beta: f64, x: f64, n_max: usize) -> Result<f64> {
    Ok(PhiN::new(q, beta, n_max)?.eval(x))
}

/// As [`phi_n_check`], first shifting `q` by one if an eigenvalue through
/// `n_max` is within the zero guard. Returns the value and the shift.
pub fn phi_n_check_shifted(q: &Potential, beta: f64, x: f64, n_max: usize) -> Result<(f64, f64)> {
    let (qs, shift) = shift_off_zero(q, BoundaryParams::new(PI, beta)?, n_max)?;
    Ok((phi_n_check(&qs, beta, x, n_max)?, shift))
}
