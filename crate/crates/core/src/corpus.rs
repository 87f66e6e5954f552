//! Named potentials and forcing functions used by the validation suite.

use std::f64::consts::PI;

use crate::error::Result;
use crate::expansion::TargetFunction;
use crate::potential::Potential;

/// Pieces in the sampled smooth potential.
pub const SMOOTH_PIECES: usize = 2048;

/// Samples in the sawtooth forcing.
pub const SAWTOOTH_SAMPLES: usize = 2049;

/// `1` on `[0, pi/2]`, `0` after.
pub fn step() -> Potential {
    Potential::from_parts(vec![0.0, PI / 2.0, PI], vec![1.0, 0.0]).expect("valid step")
}

/// `1` on `[0, 1]`, `3` on `[1, 2]`, `0` after.
pub fn two_step() -> Potential {
    Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).expect("valid two-step")
}

/// Midpoint samples of `2 cos(3x) + x` on `SMOOTH_PIECES` equal pieces.
pub fn sampled_smooth() -> Potential {
    Potential::sampled(|x| 2.0 * (3.0 * x).cos() + x, SMOOTH_PIECES).expect("valid sampled potential")
}

/// Sawtooth with period `pi/3`.
pub fn sawtooth() -> Result<TargetFunction> {
    TargetFunction::sawtooth(PI / 3.0, SAWTOOTH_SAMPLES)
}

/// A named potential.
#[derive(Clone, Debug)]
pub struct Entry {
    pub name: &'static str,
    pub q: Potential,
}

/// The non-constant potentials exercised by the asymptotic checks.
pub fn default_corpus() -> Vec<Entry> {
    vec![
        Entry {
            name: "step",
            q: step(),
        },
        Entry {
            name: "two-step",
            q: two_step(),
        },
        Entry {
            name: "sampled-smooth",
            q: sampled_smooth(),
        },
    ]
}

/// Looks up a corpus by name; only `default` exists.
pub fn by_name(name: &str) -> Option<Vec<Entry>> {
    match name {
        "default" => Some(default_corpus()),
        _ => None,
    }
}
