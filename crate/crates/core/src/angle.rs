//! Parsing of boundary angles such as `pi/2`, `3pi/4`, `0` or `1.0471975`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parses `[k][*]pi[/d]` (for example `pi`, `3pi/4`, `2*pi/3`) or a decimal
/// number in radians. `pi` fractions are evaluated as `k * PI / d`, so
/// `pi/2` is exactly `FRAC_PI_2`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || Error::InvalidArgument(format!("cannot parse angle '{text}'"));
    if let Some(pos) = t.find("pi") {
        let (head, tail) = (&t[..pos], &t[pos + 2..]);
        let head = head.trim().trim_end_matches('*').trim();
        let num: f64 = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse().map_err(|_| bad())?,
        };
        let tail = tail.trim();
        let den: f64 = if tail.is_empty() {
            1.0
        } else {
            let d = tail.strip_prefix('/').ok_or_else(bad)?;
            d.trim().parse().map_err(|_| bad())?
        };
        if den == 0.0 {
            return Err(bad());
        }
        let v = num * PI / den;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    } else {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    }
}
