//! Piecewise-constant potentials on `[0, pi]` and their exact integrals.
//!
//! Every integral in this module is evaluated from closed-form per-piece
//! antiderivatives, so accuracy does not degrade with the oscillation
//! frequency.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that JSON pieces tile `[0, pi]`.
pub const TILING_TOLERANCE: f64 = 1e-12;

/// Which trigonometric kernel an oscillatory moment uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One constant piece as it appears in a potential file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PotentialFile {
    pieces: Vec<Piece>,
}

/// A real potential `q` that is constant on each of `K` pieces of `[0, pi]`.
///
/// Breakpoints satisfy `0 = x_0 < x_1 < ... < x_K = pi`; `values[i]` is the
/// value of `q` on `(x_i, x_{i+1})`. Adjacent pieces never share a value.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Potential {
    /// Builds a canonical potential from pieces that tile `[0, pi]`.
    ///
    /// Pieces may be given in any order. Endpoints within
    /// [`TILING_TOLERANCE`] of each other (or of `0`, `pi`) are snapped.
    pub fn build(pieces: &[Piece]) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPotential("no pieces".into()));
        }
        let mut sorted = pieces.to_vec();
        sorted.sort_by(|a, b| a.from.total_cmp(&b.from));

        let mut breakpoints = Vec::with_capacity(sorted.len() + 1);
        let mut values = Vec::with_capacity(sorted.len());

        let first = sorted[0].from;
        if first.abs() > TILING_TOLERANCE {
            return Err(Error::InvalidPotential(format!(
                "first piece starts at {first}, expected 0"
            )));
        }
        breakpoints.push(0.0);
        for (i, p) in sorted.iter().enumerate() {
            if !(p.from.is_finite() && p.to.is_finite() && p.value.is_finite()) {
                return Err(Error::InvalidPotential(format!("piece {i} is not finite")));
            }
            if p.to <= p.from {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} is empty or reversed: [{}, {}]",
                    p.from, p.to
                )));
            }
            if i > 0 {
                let gap = p.from - sorted[i - 1].to;
                if gap > TILING_TOLERANCE {
                    return Err(Error::InvalidPotential(format!(
                        "gap between {} and {}",
                        sorted[i - 1].to,
                        p.from
                    )));
                }
                if gap < -TILING_TOLERANCE {
                    return Err(Error::InvalidPotential(format!("pieces overlap near {}", p.from)));
                }
            }
            breakpoints.push(p.to);
            values.push(p.value);
        }
        let last = *breakpoints.last().unwrap();
        if (last - PI).abs() > TILING_TOLERANCE {
            return Err(Error::InvalidPotential(format!(
                "last piece ends at {last}, expected pi"
            )));
        }
        *breakpoints.last_mut().unwrap() = PI;
        Self::from_parts(breakpoints, values)
    }

    /// Builds from raw breakpoints and values, merging equal neighbours.
    pub fn from_parts(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != PI {
            return Err(Error::InvalidPotential(
                "breakpoints must start at 0 and end at pi".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite value".into()));
        }

        let mut bp = vec![0.0];
        let mut vals: Vec<f64> = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if vals.last() == Some(&v) {
                *bp.last_mut().unwrap() = breakpoints[i + 1];
            } else {
                vals.push(v);
                bp.push(breakpoints[i + 1]);
            }
        }
        Ok(Self {
            breakpoints: bp,
            values: vals,
        })
    }

    /// `q = c` on all of `[0, pi]`.
    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![0.0, PI],
            values: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Samples `f` at the midpoints of `pieces` equal subintervals.
    pub fn sampled<F: Fn(f64) -> f64>(f: F, pieces: usize) -> Result<Self> {
        let pieces = pieces.max(1);
        let h = PI / pieces as f64;
        let mut bp: Vec<f64> = (0..=pieces).map(|i| h * i as f64).collect();
        bp[pieces] = PI;
        let values = (0..pieces).map(|i| f(h * (i as f64 + 0.5))).collect();
        Self::from_parts(bp, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(left, right, value)` over the pieces.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    pub fn to_pieces(&self) -> Vec<Piece> {
        self.pieces()
            .map(|(from, to, value)| Piece { from, to, value })
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the piece containing `x`; interior breakpoints belong to the
    /// piece on their right, and `pi` to the last piece.
    pub fn piece_index(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.clamp(1, self.values.len()) - 1
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.piece_index(x)]
    }

    /// `q + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `q(pi - x)`.
    pub fn reflected(&self) -> Self {
        let mut bp: Vec<f64> = self.breakpoints.iter().rev().map(|b| PI - b).collect();
        bp[0] = 0.0;
        *bp.last_mut().unwrap() = PI;
        let values = self.values.iter().rev().copied().collect();
        Self::from_parts(bp, values).expect("reflection preserves validity")
    }

    /// Pointwise sum `q + other` on the union of breakpoints.
    pub fn sum(&self, other: &Potential) -> Self {
        let mut bp: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        let values = bp
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.value_at(mid) + other.value_at(mid)
            })
            .collect();
        Self::from_parts(bp, values).expect("union of valid potentials is valid")
    }

    /// The mean value `[q] = (1/pi) * integral of q over [0, pi]`.
    pub fn mean(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum::<f64>() / PI
    }

    /// Cumulative integral `sigma(x) = integral of q over [0, x]`.
    pub fn sigma(&self, x: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        Ok(self.sigma_unchecked(x))
    }

    pub(crate) fn sigma_unchecked(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, v) in self.pieces() {
            if x <= a {
                break;
            }
            acc += v * (x.min(b) - a);
        }
        acc
    }

    /// `integral of q(x) * trig(2 m x) over [0, pi]`, exact per piece.
    pub fn oscillatory_moment(&self, m: f64, kind: Trig) -> Result<f64> {
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "oscillatory moment needs m > 0, got {m}"
            )));
        }
        Ok(self.trig_moment(2.0 * m, kind))
    }

    /// `integral of q(x) * trig(omega x) over [0, pi]` for any `omega != 0`.
    pub(crate) fn trig_moment(&self, omega: f64, kind: Trig) -> f64 {
        // sin B - sin A = 2 cos((A+B)/2) sin((B-A)/2), and similarly for cos.
        let half = 0.5 * omega;
        self.pieces()
            .map(|(a, b, v)| {
                let s = (half * (b - a)).sin();
                let c = match kind {
                    Trig::Cos => (half * (a + b)).cos(),
                    Trig::Sin => (half * (a + b)).sin(),
                };
                v * 2.0 * c * s / omega
            })
            .sum()
    }

    /// `integral of (pi - t) q(t) sin(omega t) over [0, pi]`, exact per piece.
    pub fn ramp_sine_moment(&self, omega: f64) -> f64 {
        // d/dt [-(pi - t) cos(wt)/w - sin(wt)/w^2] = (pi - t) sin(wt)
        let anti = |t: f64| {
            let (s, c) = (omega * t).sin_cos();
            -(PI - t) * c / omega - s / (omega * omega)
        };
        self.pieces().map(|(a, b, v)| v * (anti(b) - anti(a))).sum()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PotentialFile = serde_json::from_str(text)?;
        Self::build(&file.pieces)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = PotentialFile {
            pieces: self.to_pieces(),
        };
        serde_json::to_string_pretty(&file).expect("potential serializes")
    }
}
