//! End-to-end checks of the toolkit against closed forms and
//! self-consistency identities. Each check reports pass/fail with the
//! measured quantity; tolerances are fixed here.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{asymptotic_report, Decomposition, FIT_WINDOW};
use crate::corpus::{self, Entry};
use crate::delta::solve_delta;
use crate::error::Result;
use crate::expansion::{convergence_report, Subinterval, TargetFunction};
use crate::greens::{residue_check, zone_bound_check};
use crate::ivp::{default_grid, solve_phi, solve_psi, wronskian, BoundaryParams, Solution, DEFAULT_MESH};
use crate::numeric::QuadratureRule;
use crate::potential::Potential;
use crate::spectrum::{eigenvalues, find_eigenvalues, signed_sqrt, wronskian_derivative};

pub const SLOPE_LIMIT: f64 = -1.8;
pub const TOTAL_BUDGET_SECONDS: f64 = 300.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

struct Check {
    id: usize,
    name: &'static str,
    run: fn(&[Entry]) -> Result<(bool, String)>,
}

const CHECKS: [Check; 11] = [
    Check {
        id: 1,
        name: "closed-form spectra",
        run: closed_form_spectra,
    },
    Check {
        id: 2,
        name: "constant shift",
        run: constant_shift,
    },
    Check {
        id: 3,
        name: "eigenvalue remainder",
        run: eigenvalue_remainder,
    },
    Check {
        id: 4,
        name: "norming remainder",
        run: norming_remainder,
    },
    Check {
        id: 5,
        name: "expansion, Dirichlet at 0",
        run: expansion_right,
    },
    Check {
        id: 6,
        name: "expansion, Dirichlet at pi",
        run: expansion_left,
    },
    Check {
        id: 7,
        name: "residue identity",
        run: residue_identity,
    },
    Check {
        id: 8,
        name: "Wronskian derivative",
        run: wdot_identity,
    },
    Check {
        id: 9,
        name: "zone bounds",
        run: zone_bounds,
    },
    Check {
        id: 10,
        name: "l decomposition",
        run: decomposition,
    },
    Check {
        id: 11,
        name: "orthogonality and Wronskian",
        run: orthogonality,
    },
];

/// Runs every check on `corpus`, calling `report` after each one.
/// The last outcome is the total-runtime check.
pub fn run_all<F: FnMut(&Outcome)>(corpus: &[Entry], mut report: F) -> Vec<Outcome> {
    let start = Instant::now();
    let mut out = Vec::new();
    for c in &CHECKS {
        let t = Instant::now();
        let (passed, detail) = match (c.run)(corpus) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let o = Outcome {
            id: c.id,
            name: c.name,
            passed,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        };
        report(&o);
        out.push(o);
    }
    let total = start.elapsed().as_secs_f64();
    let o = Outcome {
        id: 12,
        name: "suite runtime",
        passed: total < TOTAL_BUDGET_SECONDS,
        detail: format!("{total:.1} s, limit {TOTAL_BUDGET_SECONDS} s"),
        seconds: total,
    };
    report(&o);
    out.push(o);
    out
}

fn bp(alpha: f64, beta: f64) -> BoundaryParams {
    BoundaryParams::new(alpha, beta).expect("angles in range")
}

const QUARTERS_ALPHA: [f64; 4] = [PI, 3.0 * PI / 4.0, PI / 2.0, PI / 4.0];
const QUARTERS_BETA: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
const ASYMPTOTIC_ANGLES: [(f64, f64); 3] = [(PI, PI / 4.0), (PI, PI / 2.0), (PI / 2.0, PI / 4.0)];

fn closed_form_spectra(_: &[Entry]) -> Result<(bool, String)> {
    const TOL: f64 = 1e-8;
    const TIME_LIMIT: f64 = 30.0;
    let t = Instant::now();
    let q = Potential::zero();
    let mut worst: f64 = 0.0;
    for &a in &QUARTERS_ALPHA {
        for &b in &QUARTERS_BETA {
            let mus = eigenvalues(&q, bp(a, b), 50)?;
            for (n, &mu) in mus.iter().enumerate().skip(2) {
                let exact = n as f64 + solve_delta(n, a, b)?;
                worst = worst.max((signed_sqrt(mu) - exact).abs());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        worst <= TOL && secs < TIME_LIMIT,
        format!("max |lambda - (n + delta)| = {worst:.3e} (tol {TOL:e}), {secs:.2} s"),
    ))
}

fn constant_shift(_: &[Entry]) -> Result<(bool, String)> {
    const MU_TOL: f64 = 1e-7;
    const A_TOL: f64 = 1e-7;
    let (mut dmu, mut da): (f64, f64) = (0.0, 0.0);
    for (a, b) in [(PI, PI / 2.0), (PI / 2.0, PI / 4.0), (3.0 * PI / 4.0, 0.0)] {
        let base = find_eigenvalues(&Potential::zero(), bp(a, b), 50)?;
        for c in [1.0, 2.0, -1.0] {
            let shifted = find_eigenvalues(&Potential::constant(c), bp(a, b), 50)?;
            for (e0, e1) in base.iter().zip(&shifted) {
                dmu = dmu.max((e1.mu - e0.mu - c).abs());
                da = da.max((e1.a - e0.a).abs() / e0.a);
            }
        }
    }
    Ok((
        dmu <= MU_TOL && da <= A_TOL,
        format!("max |dmu - c| = {dmu:.3e}, max rel |da| = {da:.3e}"),
    ))
}

fn remainder_slopes(corpus: &[Entry]) -> Result<Vec<(String, [Option<f64>; 3])>> {
    let jobs: Vec<(&Entry, (f64, f64))> = corpus
        .iter()
        .flat_map(|e| ASYMPTOTIC_ANGLES.iter().map(move |&ab| (e, ab)))
        .collect();
    jobs.par_iter()
        .map(|(e, (a, b))| {
            let r = asymptotic_report(&e.q, bp(*a, *b), FIT_WINDOW.1, FIT_WINDOW)?;
            Ok((
                format!("{} ({a:.4}, {b:.4})", e.name),
                [r.lambda_slope, r.a_slope, r.b_slope],
            ))
        })
        .collect()
}

fn slope_ok(s: Option<f64>) -> bool {
    // No residual above the fit floor means the remainder is already at rounding level.
    !matches!(s, Some(v) if v > SLOPE_LIMIT)
}

fn fmt_slope(s: Option<f64>) -> String {
    s.map_or("below floor".into(), |v| format!("{v:.3}"))
}

fn eigenvalue_remainder(corpus: &[Entry]) -> Result<(bool, String)> {
    const REL_TOL: f64 = 0.2;
    let slopes = remainder_slopes(corpus)?;
    let worst = slopes
        .iter()
        .filter_map(|(_, s)| s[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ok = slopes.iter().all(|(_, s)| slope_ok(s[0]));
    let bad: Vec<&str> = slopes
        .iter()
        .filter(|(_, s)| !slope_ok(s[0]))
        .map(|(n, _)| n.as_str())
        .collect();

    let r = asymptotic_report(&Potential::constant(1.0), bp(PI, PI / 2.0), 10, FIT_WINDOW)?;
    let row = r.rows.iter().find(|r| r.n == 10).expect("row 10");
    let expected = 1.0 / (8.0 * 10.5f64.powi(3));
    let rel = (row.residual.abs() - expected).abs() / expected;
    ok &= rel <= REL_TOL;
    Ok((
        ok,
        format!(
            "worst slope {worst:.3} (limit {SLOPE_LIMIT}){}; q = 1 residual at n = 10 off by {:.1}% (tol 20%)",
            if bad.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", bad.join(", "))
            },
            rel * 100.0
        ),
    ))
}

fn norming_remainder(corpus: &[Entry]) -> Result<(bool, String)> {
    const EXACT_TOL: f64 = 1e-10;
    let slopes = remainder_slopes(corpus)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in &slopes {
        if !(slope_ok(s[1]) && slope_ok(s[2])) {
            ok = false;
            parts.push(format!("{name}: a {} b {}", fmt_slope(s[1]), fmt_slope(s[2])));
        }
    }
    let worst = slopes
        .iter()
        .flat_map(|(_, s)| [s[1], s[2]])
        .flatten()
        .fold(f64::NEG_INFINITY, f64::max);

    let eig = find_eigenvalues(&Potential::zero(), bp(PI, PI / 2.0), 100)?;
    let mut exact_gap: f64 = 0.0;
    for e in &eig {
        let m = e.n as f64 + 0.5;
        exact_gap = exact_gap
            .max((e.a - PI / (2.0 * m * m)).abs())
            .max((e.b - PI / 2.0).abs());
    }
    ok &= exact_gap <= EXACT_TOL;
    Ok((
        ok,
        format!(
            "worst slope {worst:.3} (limit {SLOPE_LIMIT}){}; q = 0 closed form gap {exact_gap:.3e} (tol {EXACT_TOL:e})",
            if parts.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", parts.join("; "))
            }
        ),
    ))
}

const N_LIST: [usize; 4] = [25, 50, 100, 200];

fn monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn expansion_right(_: &[Entry]) -> Result<(bool, String)> {
    const SUB_TOL: f64 = 0.05;
    const FULL_TOL: f64 = 1e-12;
    const LINEAR_TOL: f64 = 0.02;
    let q = Potential::zero();
    let b = bp(PI, PI / 2.0);
    let f = TargetFunction::Constant { value: PI / 2.0 };
    let r = convergence_report(&q, b, &f, &N_LIST, Subinterval::Right(0.5))?;
    let sub: Vec<f64> = r.rows.iter().map(|r| r.err_restricted).collect();
    let full_gap = r.rows.iter().map(|r| (r.err_full - PI / 2.0).abs()).fold(0.0, f64::max);
    let lin = convergence_report(
        &q,
        b,
        &TargetFunction::Linear { c0: 0.0, c1: 1.0 },
        &N_LIST,
        Subinterval::Right(0.5),
    )?;
    let lin_err = lin.rows.last().unwrap().err_full;
    let ok = *sub.last().unwrap() <= SUB_TOL && monotone(&sub) && full_gap <= FULL_TOL && lin_err <= LINEAR_TOL;
    Ok((
        ok,
        format!(
            "f = pi/2: [0.5, pi] errors {:?}, |err on [0, pi] - pi/2| <= {full_gap:.1e}; f = x: err {lin_err:.3e} at N = 200",
            sub.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn expansion_left(_: &[Entry]) -> Result<(bool, String)> {
    const FULL_TOL: f64 = 0.02;
    const SUB_TOL: f64 = 0.05;
    const ENDPOINT_FLOOR: f64 = 1.0;
    let q = Potential::zero();
    let b = bp(PI / 2.0, 0.0);
    let mirror = convergence_report(
        &q,
        b,
        &TargetFunction::Linear { c0: PI, c1: -1.0 },
        &N_LIST,
        Subinterval::Left(PI - 0.5),
    )?;
    let mirror_err = mirror.rows.last().unwrap().err_full;
    let c = convergence_report(
        &q,
        b,
        &TargetFunction::Constant { value: PI / 2.0 },
        &N_LIST,
        Subinterval::Left(PI - 0.5),
    )?;
    let sub: Vec<f64> = c.rows.iter().map(|r| r.err_restricted).collect();
    let endpoint = c.rows.iter().map(|r| r.err_full).fold(f64::INFINITY, f64::min);
    let ok = mirror_err <= FULL_TOL && *sub.last().unwrap() <= SUB_TOL && endpoint >= ENDPOINT_FLOOR;
    Ok((
        ok,
        format!(
            "f = pi - x: err {mirror_err:.3e} at N = 200; f = pi/2: [0, pi - 0.5] err {:.3e}, err on [0, pi] stays >= {endpoint:.3}",
            sub.last().unwrap()
        ),
    ))
}

fn residue_identity(_: &[Entry]) -> Result<(bool, String)> {
    const REL_TOL: f64 = 1e-2;
    const EXACT_TOL: f64 = 1e-6;
    let f = TargetFunction::Constant { value: PI / 2.0 };
    let potentials = [Potential::zero(), corpus::step()];
    let mut jobs = Vec::new();
    for q in &potentials {
        for beta in [PI / 4.0, PI / 2.0] {
            let eig = find_eigenvalues(q, bp(PI, beta), 10)?;
            for e in eig {
                for x in [1.0, PI / 2.0] {
                    jobs.push((q, beta, e, x));
                }
            }
        }
    }
    let checks: Vec<_> = jobs
        .par_iter()
        .map(|(q, beta, e, x)| residue_check(q, *beta, e, &f, *x))
        .collect::<Result<_>>()?;
    let worst = checks.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    let gap = checks.iter().map(|c| c.side_gap).fold(0.0, f64::max);

    let eig = find_eigenvalues(&Potential::zero(), bp(PI, PI / 2.0), 1)?;
    let exact = residue_check(&Potential::zero(), PI / 2.0, &eig[0], &f, PI / 2.0)?;
    let exact_gap = (exact.estimate - 2f64.sqrt()).abs();
    let ok = worst <= REL_TOL && gap <= REL_TOL && exact_gap <= EXACT_TOL;
    Ok((
        ok,
        format!("max relative error {worst:.3e}, left/right gap {gap:.3e} (tol {REL_TOL:e}); sqrt 2 case off by {exact_gap:.3e}"),
    ))
}

fn wdot_identity(corpus: &[Entry]) -> Result<(bool, String)> {
    const REL_TOL: f64 = 1e-3;
    const EXACT_TOL: f64 = 1e-6;
    let mut worst: f64 = 0.0;
    for e in corpus {
        for (a, b) in ASYMPTOTIC_ANGLES {
            let b = bp(a, b);
            let eig = find_eigenvalues(&e.q, b, 30)?;
            for p in &eig {
                let target = p.beta_ratio * p.a;
                worst = worst.max((wronskian_derivative(&e.q, b, p.mu) - target).abs() / target.abs());
            }
        }
    }
    let b = bp(PI, PI / 2.0);
    let q = Potential::zero();
    let mut exact_gap: f64 = 0.0;
    for p in find_eigenvalues(&q, b, 30)? {
        let m = p.n as f64 + 0.5;
        let sign = if p.n % 2 == 0 { 1.0 } else { -1.0 };
        let want = sign * PI / (2.0 * m);
        exact_gap = exact_gap
            .max((wronskian_derivative(&q, b, p.mu) - want).abs())
            .max((p.beta_ratio * p.a - want).abs());
    }
    Ok((
        worst <= REL_TOL && exact_gap <= EXACT_TOL,
        format!("max relative error {worst:.3e} (tol {REL_TOL:e}); q = 0 closed form gap {exact_gap:.3e}"),
    ))
}

fn zone_bounds(_: &[Entry]) -> Result<(bool, String)> {
    const GRID: usize = 400;
    const TIME_LIMIT: f64 = 5.0;
    let t = Instant::now();
    let r = zone_bound_check(GRID);
    let secs = t.elapsed().as_secs_f64();
    Ok((
        r.violations == 0 && r.checked > 0 && secs < TIME_LIMIT,
        format!(
            "{} violations in {} points, min ratio {:.3}, {secs:.2} s",
            r.violations, r.checked, r.min_ratio
        ),
    ))
}

fn decomposition(_: &[Entry]) -> Result<(bool, String)> {
    const TERM_TOL: f64 = 1e-10;
    const SUM_TOL: f64 = 1e-8;
    const N: usize = 200;
    let q = corpus::step();
    let xs = [0.5, PI / 2.0, PI, 2.0 * PI - 0.5];
    let (mut term, mut sum): (f64, f64) = (0.0, 0.0);
    for beta in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
        let d = Decomposition::new(&q, beta, N)?;
        for &x in &xs {
            term = term.max(d.termwise_gap(x, N));
            let (l1, l2, l3) = d.partial_sums(x, N);
            sum = sum.max((d.l_sum(x, N) - (l1 + l2 + l3)).abs());
        }
    }
    Ok((
        term <= TERM_TOL && sum <= SUM_TOL,
        format!("term-wise gap {term:.3e} (tol {TERM_TOL:e}), partial-sum gap {sum:.3e} (tol {SUM_TOL:e})"),
    ))
}

fn orthogonality(corpus: &[Entry]) -> Result<(bool, String)> {
    const ORTHO_TOL: f64 = 1e-6;
    const WRONSKIAN_TOL: f64 = 1e-9;
    const N: usize = 30;
    let mut ortho: f64 = 0.0;
    let mut wdrift: f64 = 0.0;
    for e in corpus {
        for (a, b) in ASYMPTOTIC_ANGLES {
            let eig = find_eigenvalues(&e.q, bp(a, b), N)?;
            let rule = QuadratureRule::simpson(e.q.breakpoints(), 8192);
            let vals: Vec<Vec<f64>> = eig
                .iter()
                .map(|p| {
                    let s = Solution::phi(&e.q, p.mu, a);
                    rule.nodes.iter().map(|&x| s.value(x)).collect()
                })
                .collect();
            for i in 0..eig.len() {
                for j in i + 1..eig.len() {
                    let prod: Vec<f64> = vals[i].iter().zip(&vals[j]).map(|(u, v)| u * v).collect();
                    let ip = rule.integrate_values(&prod);
                    ortho = ortho.max(ip.abs() / (eig[i].a * eig[j].a).sqrt());
                }
            }
            let grid = default_grid(&e.q, DEFAULT_MESH);
            for p in &eig {
                let phi = solve_phi(&e.q, p.mu, a, &grid)?;
                let psi = solve_psi(&e.q, p.mu, b, &grid)?;
                let w = wronskian(&phi, &psi)?;
                let sup =
                    |t: &crate::ivp::SolutionTrace| t.y.iter().chain(&t.yprime).fold(0.0f64, |m, v| m.max(v.abs()));
                wdrift = wdrift.max(w.max_deviation / (sup(&phi) * sup(&psi)));
            }
        }
    }
    Ok((
        ortho <= ORTHO_TOL && wdrift <= WRONSKIAN_TOL,
        format!("max |<phi_n, phi_m>| / sqrt(a_n a_m) = {ortho:.3e} (tol {ORTHO_TOL:e}); Wronskian drift {wdrift:.3e} (tol {WRONSKIAN_TOL:e})"),
    ))
}
