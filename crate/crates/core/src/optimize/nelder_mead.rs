//! Box-constrained Nelder-Mead simplex minimization.
//!
//! Trial points are projected onto the box before evaluation, which keeps
//! every evaluated point feasible without distorting the simplex logic.

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Initial simplex edge as a fraction of each box side.
    pub initial_step: f64,
    /// Stop when every simplex edge is below this fraction of the box side
    /// and the value spread is below `value_tol`.
    pub param_tol: f64,
    pub value_tol: f64,
    pub max_evals: usize,
}

impl NelderMead {
    fn project(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, start: &[f64]) -> NelderMeadResult {
        let n = start.len();
        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };

        let mut x0 = start.to_vec();
        self.project(&mut x0);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(&x0, &mut evals);
        simplex.push((x0.clone(), v0));
        for i in 0..n {
            let mut x = x0.clone();
            let side = self.upper[i] - self.lower[i];
            let step = self.initial_step * side;
            // Step inward if the start sits on the upper face.
            x[i] = if x[i] + step <= self.upper[i] { x[i] + step } else { x[i] - step };
            self.project(&mut x);
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if self.has_converged(&simplex) {
                converged = true;
                break;
            }
            let worst = simplex[n].clone();
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
            };

            let mut xr = along(alpha);
            self.project(&mut xr);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let mut xe = along(gamma);
                self.project(&mut xe);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            // Contraction, outside or inside.
            let (mut xc, threshold) = if fr < worst.1 { (along(rho), fr) } else { (along(-rho), worst.1) };
            self.project(&mut xc);
            let fc = eval(&xc, &mut evals);
            if fc < threshold {
                simplex[n] = (xc, fc);
                continue;
            }
            // Shrink toward the best vertex.
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let mut x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + sigma * (v - b)).collect();
                self.project(&mut x);
                let v = eval(&x, &mut evals);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if !converged {
            converged = self.has_converged(&simplex);
        }
        let (x, value) = simplex.swap_remove(0);
        NelderMeadResult { x, value, evaluations: evals, converged }
    }

    fn has_converged(&self, sorted: &[(Vec<f64>, f64)]) -> bool {
        let spread = sorted[sorted.len() - 1].1 - sorted[0].1;
        if !(spread <= self.value_tol) {
            return false;
        }
        let best = &sorted[0].0;
        sorted[1..].iter().all(|(x, _)| {
            x.iter().zip(best).enumerate().all(|(i, (a, b))| {
                (a - b).abs() <= self.param_tol * (self.upper[i] - self.lower[i])
            })
        })
    }
}
