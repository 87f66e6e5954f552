//! Small numerical helpers shared by the modules: grids, Simpson sums and
//! log-log slope fitting.

/// `count` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (count - 1) as f64;
            let mut out: Vec<f64> = (0..count).map(|i| a + step * i as f64).collect();
            out[count - 1] = b;
            out
        }
    }
}

/// Simpson's rule on one panel given the endpoint and midpoint values.
#[inline]
pub fn simpson_panel(h: f64, left: f64, mid: f64, right: f64) -> f64 {
    h / 6.0 * (left + 4.0 * mid + right)
}

/// Composite Simpson integral of `f` over `[a, b]` with `panels` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut left = f(a);
    for i in 0..panels {
        let x0 = a + h * i as f64;
        let x1 = if i + 1 == panels { b } else { x0 + h };
        let right = f(x1);
        total += simpson_panel(x1 - x0, left, f(0.5 * (x0 + x1)), right);
        left = right;
    }
    total
}

/// Least-squares slope of `ln|y|` against `ln x`.
///
/// Points with `|y| <= floor` are dropped; `None` if fewer than three remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > floor && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Exact trigonometric values for the angles that matter most here
/// (multiples of pi/2), so that e.g. `sin(pi)` is exactly zero.
pub fn sin_cos_exact(angle: f64) -> (f64, f64) {
    let quarter = angle / std::f64::consts::FRAC_PI_2;
    let r = quarter.round();
    if (quarter - r).abs() < 1e-15 {
        match (r as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        angle.sin_cos()
    }
}

/// Composite Simpson nodes and weights over a set of subdivision points.
///
/// Each segment between consecutive points gets a number of panels
/// proportional to its length (at least one), so integrands that are only
/// piecewise smooth are never integrated across a kink.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest distance between neighbouring nodes.
    pub spacing: f64,
}

impl QuadratureRule {
    /// `points` must be sorted; `panels` is the target total panel count.
    pub fn simpson(points: &[f64], panels: usize) -> Self {
        let (a, b) = (points[0], points[points.len() - 1]);
        let mut nodes = vec![a];
        let mut weights = vec![0.0];
        let mut spacing: f64 = 0.0;
        for w in points.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let k = ((len / (b - a) * panels as f64).ceil() as usize).max(1);
            let h = len / k as f64;
            spacing = spacing.max(h / 2.0);
            for i in 0..k {
                let x0 = w[0] + h * i as f64;
                let x1 = if i + 1 == k { w[1] } else { x0 + h };
                *weights.last_mut().unwrap() += h / 6.0;
                nodes.push(0.5 * (x0 + x1));
                weights.push(4.0 * h / 6.0);
                nodes.push(x1);
                weights.push(h / 6.0);
            }
        }
        Self {
            nodes,
            weights,
            spacing,
        }
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}
