//! Bracketed scalar root finding.

/// Outcome of [`bracketed_root`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs (or one of them is zero).
///
/// A few bisection steps shrink the bracket, then Illinois-modified regula
/// falsi takes over; every iterate stays inside the current bracket. Stops
/// when the bracket is no wider than `tol` or `f` is exactly zero.
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Root {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Root {
            x: lo,
            iterations: 0,
            converged: true,
        };
    }
    if fhi == 0.0 {
        return Root {
            x: hi,
            iterations: 0,
            converged: true,
        };
    }
    debug_assert!(flo.signum() != fhi.signum(), "root not bracketed");
    const BISECTIONS: usize = 8;
    let mut side = 0i8;
    for it in 1..=max_iter {
        let x = if it <= BISECTIONS {
            0.5 * (lo + hi)
        } else {
            let s = hi - fhi * (hi - lo) / (fhi - flo);
            if s > lo && s < hi {
                s
            } else {
                0.5 * (lo + hi)
            }
        };
        let fx = f(x);
        if fx == 0.0 {
            return Root {
                x,
                iterations: it,
                converged: true,
            };
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= tol {
            return Root {
                x: 0.5 * (lo + hi),
                iterations: it,
                converged: true,
            };
        }
        // Regula falsi converges from one side; nudge the far endpoint in so
        // the bracket width itself shrinks below tol.
        if it > BISECTIONS && (hi - lo) < 64.0 * tol {
            let probe = if side == -1 { lo + 0.5 * tol } else { hi - 0.5 * tol };
            if probe > lo && probe < hi {
                let fp = f(probe);
                if fp == 0.0 {
                    return Root {
                        x: probe,
                        iterations: it,
                        converged: true,
                    };
                }
                if fp.signum() == flo.signum() {
                    lo = probe;
                    flo = fp;
                } else {
                    hi = probe;
                    fhi = fp;
                }
                if hi - lo <= tol {
                    return Root {
                        x: 0.5 * (lo + hi),
                        iterations: it,
                        converged: true,
                    };
                }
            }
        }
    }
    Root {
        x: 0.5 * (lo + hi),
        iterations: max_iter,
        converged: false,
    }
}
