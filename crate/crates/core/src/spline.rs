//! Natural cubic spline interpolation and Chebyshev-Lobatto grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Natural cubic spline through `(x_i, y_i)` (zero second derivative at both
/// ends). Evaluates to `None` outside `[x_0, x_{n-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} knots but {} values",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidArgument("spline needs at least 2 knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        let n = self.x.len();
        if !(t >= self.x[0] && t <= self.x[n - 1]) {
            return None;
        }
        let i = (self.x.partition_point(|&xk| xk <= t)).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        Some(
            a * self.y[i]
                + b * self.y[i + 1]
                + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0,
        )
    }
}

/// Chebyshev-Lobatto points on `[a, b]`, ascending, endpoints included.
pub fn chebyshev_knots(n: usize, window: (f64, f64)) -> Result<Vec<f64>> {
    let (a, b) = window;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 Chebyshev points, got {n}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid window ({a}, {b})")));
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let last = (n - 1) as f64;
    let mut knots: Vec<f64> = (0..n)
        .map(|k| {
            // Evaluate with sin on the mirrored angle for exact symmetry about the midpoint.
            let s = (PI * (2.0 * k as f64 - last) / (2.0 * last)).sin();
            mid + half * s
        })
        .collect();
    knots[0] = a;
    knots[n - 1] = b;
    Ok(knots)
}
