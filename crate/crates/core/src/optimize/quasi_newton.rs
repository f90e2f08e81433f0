//! Box-constrained limited-memory BFGS with finite-difference gradients.
//!
//! Steps follow the projected path P(x + t·d), where P clips onto the box and
//! d is the L-BFGS direction restricted to the variables not held at an
//! active bound. Gradients are central differences with a relative step,
//! falling back to one-sided differences next to a bound.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct QuasiNewton {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Stop when the largest relative coordinate change of an accepted step
    /// falls below this.
    pub param_tol: f64,
    /// Stop when the projected gradient's max-norm falls below this.
    pub grad_tol: f64,
    pub max_evals: usize,
    pub memory: usize,
}

#[derive(Debug, Clone)]
pub struct QuasiNewtonResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl QuasiNewton {
    fn project(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    fn gradient<F>(&self, f: &F, x: &[f64], fx: f64, evals: &mut usize) -> Vec<f64>
    where
        F: Fn(&[Vec<f64>]) -> Vec<f64>,
    {
        let n = x.len();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
        let floor = 0.05 * scale;
        let steps: Vec<f64> = x.iter().map(|v| self.fd_step * v.abs().max(floor)).collect();
        let mut probes = Vec::with_capacity(2 * n);
        // (index into probes of +h, of -h)
        let mut layout = Vec::with_capacity(n);
        for i in 0..n {
            let h = steps[i];
            let up = x[i] + h <= self.upper[i];
            let down = x[i] - h >= self.lower[i];
            let mut plus = None;
            let mut minus = None;
            if up {
                let mut p = x.to_vec();
                p[i] += h;
                plus = Some(probes.len());
                probes.push(p);
            }
            if down {
                let mut p = x.to_vec();
                p[i] -= h;
                minus = Some(probes.len());
                probes.push(p);
            }
            layout.push((plus, minus));
        }
        *evals += probes.len();
        let values = f(&probes);
        layout
            .iter()
            .zip(&steps)
            .map(|(&(plus, minus), &h)| match (plus, minus) {
                (Some(p), Some(m)) => (values[p] - values[m]) / (2.0 * h),
                (Some(p), None) => (values[p] - fx) / h,
                (None, Some(m)) => (fx - values[m]) / h,
                (None, None) => 0.0,
            })
            .collect()
    }

    fn active(&self, x: &[f64], g: &[f64]) -> Vec<bool> {
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (xi, gi))| (*xi <= self.lower[i] && *gi > 0.0) || (*xi >= self.upper[i] && *gi < 0.0))
            .collect()
    }

    /// Minimize `f`, which evaluates a batch of points at once.
    pub fn minimize<F>(&self, f: F, start: &[f64]) -> QuasiNewtonResult
    where
        F: Fn(&[Vec<f64>]) -> Vec<f64>,
    {
        let sanitize = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
        let mut evals = 0;
        let mut x = start.to_vec();
        self.project(&mut x);
        let mut fx = sanitize(f(std::slice::from_ref(&x))[0]);
        evals += 1;
        let mut g = self.gradient(&f, &x, fx, &mut evals);
        let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut converged = false;
        let mut iterations = 0;

        while evals < self.max_evals {
            let active = self.active(&x, &g);
            let pg_norm = g
                .iter()
                .zip(&active)
                .filter(|(_, a)| !**a)
                .fold(0.0f64, |m, (gi, _)| m.max(gi.abs()));
            if pg_norm <= self.grad_tol {
                converged = true;
                break;
            }

            let mut d = self.direction(&g, &active, &history);
            let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                history.clear();
                d = g.iter().zip(&active).map(|(gi, a)| if *a { 0.0 } else { -gi }).collect();
            }
            if history.is_empty() {
                // Unscaled first step: limit the largest move to 10% of the variable scale.
                let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let xscale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
                if dmax > 0.0 {
                    let t = 0.1 * xscale / dmax;
                    d.iter_mut().for_each(|v| *v *= t);
                }
            }

            // Backtracking Armijo search along the projected path.
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                if evals >= self.max_evals {
                    break;
                }
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                self.project(&mut trial);
                let decrease: f64 = trial.iter().zip(&x).zip(&g).map(|((a, b), gi)| (a - b) * gi).sum();
                let ft = sanitize(f(std::slice::from_ref(&trial))[0]);
                evals += 1;
                if ft <= fx + 1e-4 * decrease && ft < fx {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            let Some((x_new, f_new)) = accepted else {
                if history.is_empty() {
                    // Steepest descent failed too: stationary up to FD accuracy.
                    converged = evals < self.max_evals;
                    break;
                }
                history.clear();
                continue;
            };
            iterations += 1;

            let rel_step = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-3))
                .fold(0.0f64, f64::max);
            let g_new = self.gradient(&f, &x_new, f_new, &mut evals);
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|v| v * v).sum();
            let yy: f64 = y.iter().map(|v| v * v).sum();
            if sy > 1e-10 * (ss * yy).sqrt() {
                history.push_back((s, y, 1.0 / sy));
                if history.len() > self.memory {
                    history.pop_front();
                }
            }
            x = x_new;
            fx = f_new;
            g = g_new;
            if rel_step < self.param_tol {
                converged = true;
                break;
            }
        }
        QuasiNewtonResult { x, value: fx, evaluations: evals, converged, iterations }
    }

    fn direction(&self, g: &[f64], active: &[bool], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
        let mask = |v: &mut Vec<f64>| {
            for (vi, a) in v.iter_mut().zip(active) {
                if *a {
                    *vi = 0.0;
                }
            }
        };
        let mut q = g.to_vec();
        mask(&mut q);
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot_masked(s, &q, active);
            for ((qi, yi), act) in q.iter_mut().zip(y).zip(active) {
                if !act {
                    *qi -= a * yi;
                }
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let yy = dot_masked(y, y, active);
            if yy > 0.0 {
                let gamma = dot_masked(s, y, active) / yy;
                if gamma > 0.0 {
                    q.iter_mut().for_each(|v| *v *= gamma);
                }
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot_masked(y, &q, active);
            for ((qi, si), act) in q.iter_mut().zip(s).zip(active) {
                if !act {
                    *qi += (a - b) * si;
                }
            }
        }
        mask(&mut q);
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

fn dot_masked(a: &[f64], b: &[f64], active: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(active)
        .filter(|(_, act)| !**act)
        .map(|((x, y), _)| x * y)
        .sum()
}
