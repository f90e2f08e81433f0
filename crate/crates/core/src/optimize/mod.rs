//! Control-field optimization: three-parameter Gaussian pulses by multi-start
//! Nelder-Mead, and free-form spline shapes by bounded quasi-Newton ascent.

mod cache;
mod nelder_mead;
mod quasi_newton;

use std::f64::consts::PI;

use rand::Rng;
use rand_mt::Mt64;
use serde::{Deserialize, Serialize};

use crate::control::{ControlEnvelope, GaussianControl, SplineControl, DEFAULT_SPLINE_WINDOW};
use crate::dynamics::{efficiency, MemoryParams, SolverConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub use cache::{format_record, parse_record, OptimumCache};
pub use nelder_mead::{NelderMead, NelderMeadResult};
pub use quasi_newton::{QuasiNewton, QuasiNewtonResult};

/// Relative finite-difference step for shape gradients.
pub const SHAPE_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of multi-start runs (Gaussian) ; ignored by shape optimization.
    pub restarts: usize,
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Relative parameter change below which a run counts as converged.
    pub param_tolerance: f64,
    /// Per-parameter (min, max). Gaussian: θ, Δτ, τ_FWHM. Shape: a single
    /// pair applied to every spline value.
    pub bounds: Vec<(f64, f64)>,
    /// Seed of the random restart points.
    pub seed: u64,
    /// Window of the Chebyshev grid for shape optimization.
    pub spline_window: (f64, f64),
    /// Discretization used for every efficiency evaluation.
    pub solver: SolverConfig,
    #[serde(skip)]
    pub execution: Execution,
}

impl OptimizerConfig {
    /// Defaults for the Gaussian search: θ ∈ [0.05π, 8π], Δτ ∈ [-3, 4],
    /// τ_FWHM ∈ [0.02, 5], five restarts.
    pub fn gaussian() -> Self {
        Self {
            restarts: 5,
            max_evals: 400,
            param_tolerance: 1e-4,
            bounds: vec![(0.05 * PI, 8.0 * PI), (-3.0, 4.0), (0.02, 5.0)],
            seed: 0,
            spline_window: DEFAULT_SPLINE_WINDOW,
            solver: SolverConfig::default(),
            execution: Execution::default(),
        }
    }

    /// Defaults for shape optimization: spline values in [0, 200].
    pub fn shape() -> Self {
        Self { restarts: 1, max_evals: 20_000, param_tolerance: 1e-6, bounds: vec![(0.0, 200.0)], ..Self::gaussian() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.max_evals < 10 {
            return Err(Error::InvalidArgument(format!("max_evals must be >= 10, got {}", self.max_evals)));
        }
        if !(self.param_tolerance > 0.0) {
            return Err(Error::InvalidArgument("param_tolerance must be > 0".into()));
        }
        if self.bounds.is_empty() {
            return Err(Error::InvalidArgument("bounds must not be empty".into()));
        }
        for (lo, hi) in &self.bounds {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(Error::InvalidArgument(format!("invalid bound ({lo}, {hi})")));
            }
        }
        self.solver.validate()
    }
}

/// Best control found for a memory point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumRecord {
    pub memory: MemoryParams,
    pub control: ControlEnvelope,
    pub efficiency: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl OptimumRecord {
    pub fn gaussian(&self) -> Option<GaussianControl> {
        match &self.control {
            ControlEnvelope::Gaussian(g) => Some(*g),
            _ => None,
        }
    }
}

/// Heuristic start points (θ, Δτ, τ_FWHM) for the three resonant protocols:
/// absorb-then-transfer, Autler-Townes splitting, EIT.
const PROTOCOL_STARTS: [(f64, f64, f64); 3] = [(PI, 1.0, 0.4), (2.0 * PI, 0.0, 1.0), (6.0 * PI, -0.5, 2.0)];

fn to_search(gc: &GaussianControl) -> [f64; 3] {
    [gc.theta.ln(), gc.delay, gc.fwhm.ln()]
}

fn from_search(u: &[f64]) -> GaussianControl {
    GaussianControl { theta: u[0].exp(), delay: u[1], fwhm: u[2].exp() }
}

/// Start points in search coordinates; a prefix of the same sequence for any
/// number of restarts.
fn gaussian_starts(cfg: &OptimizerConfig, lower: &[f64; 3], upper: &[f64; 3]) -> Vec<[f64; 3]> {
    let mut rng = Mt64::new(cfg.seed);
    (0..cfg.restarts)
        .map(|k| match PROTOCOL_STARTS.get(k) {
            Some(&(theta, delay, fwhm)) => {
                let mut u = to_search(&GaussianControl { theta, delay, fwhm });
                for i in 0..3 {
                    u[i] = u[i].clamp(lower[i], upper[i]);
                }
                u
            }
            None => {
                let mut u = [0.0; 3];
                for i in 0..3 {
                    u[i] = rng.random_range(lower[i]..=upper[i]);
                }
                u
            }
        })
        .collect()
}

fn eval_or_zero(m: MemoryParams, ctrl: &ControlEnvelope, solver: &SolverConfig) -> f64 {
    efficiency(m, ctrl, solver).unwrap_or(0.0)
}

/// Maximize storage efficiency over Gaussian controls (θ, Δτ, τ_FWHM).
///
/// Each restart runs Nelder-Mead in (ln θ, Δτ, ln τ_FWHM); restarts run
/// concurrently and the best is returned, earliest restart winning ties.
pub fn optimize_gaussian(m: MemoryParams, cfg: &OptimizerConfig) -> Result<OptimumRecord> {
    cfg.validate()?;
    if cfg.bounds.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "Gaussian optimization needs 3 bounds, got {}",
            cfg.bounds.len()
        )));
    }
    if cfg.bounds[0].0 <= 0.0 || cfg.bounds[2].0 <= 0.0 {
        return Err(Error::InvalidArgument("pulse area and duration bounds must be positive".into()));
    }
    let lower = [cfg.bounds[0].0.ln(), cfg.bounds[1].0, cfg.bounds[2].0.ln()];
    let upper = [cfg.bounds[0].1.ln(), cfg.bounds[1].1, cfg.bounds[2].1.ln()];
    let starts = gaussian_starts(cfg, &lower, &upper);
    let nm = NelderMead {
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        initial_step: 0.1,
        param_tol: cfg.param_tolerance,
        value_tol: 1e-7,
        max_evals: cfg.max_evals,
    };
    let runs = cfg.execution.map(starts.len(), |k| {
        nm.minimize(|u| -eval_or_zero(m, &from_search(u).into(), &cfg.solver), &starts[k])
    });
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.value < best.value { r } else { best })
        .expect("at least one restart");
    Ok(OptimumRecord {
        memory: m,
        control: from_search(&best.x).into(),
        efficiency: (-best.value).clamp(0.0, 1.0),
        evaluations,
        converged: best.converged,
    })
}

/// Maximize storage efficiency over the values of an `n`-point Chebyshev
/// spline, starting from `init` sampled at the knots.
///
/// The returned efficiency is never below that of the sampled initial shape.
pub fn optimize_shape(m: MemoryParams, n: usize, init: &ControlEnvelope, cfg: &OptimizerConfig) -> Result<OptimumRecord> {
    cfg.validate()?;
    if n < 4 {
        return Err(Error::InvalidArgument(format!("shape optimization needs N >= 4, got {n}")));
    }
    let (lo, hi) = cfg.bounds[0];
    if lo < 0.0 {
        return Err(Error::InvalidArgument("spline values must be bounded below by >= 0".into()));
    }
    let template = match init {
        ControlEnvelope::Spline(s) if s.len() == n => s.clone(),
        _ => SplineControl::sampled(n, cfg.spline_window, |t| init.rabi(t).clamp(lo, hi))?,
    };
    let knots = template.knots().to_vec();
    let x0: Vec<f64> = template.values().iter().map(|v| v.clamp(lo, hi)).collect();

    let shape = |x: &[f64]| -> ControlEnvelope {
        // Values are already inside [lo, hi]; the constructor cannot fail.
        SplineControl::new(knots.clone(), x.to_vec()).map(Into::into).unwrap_or(ControlEnvelope::Zero)
    };
    let objective = |xs: &[Vec<f64>]| -> Vec<f64> {
        cfg.execution.map(xs.len(), |k| -eval_or_zero(m, &shape(&xs[k]), &cfg.solver))
    };
    let qn = QuasiNewton {
        lower: vec![lo; n],
        upper: vec![hi; n],
        fd_step: SHAPE_FD_STEP,
        param_tol: cfg.param_tolerance,
        grad_tol: 1e-8,
        max_evals: cfg.max_evals,
        memory: 10,
    };
    let result = qn.minimize(objective, &x0);
    Ok(OptimumRecord {
        memory: m,
        control: shape(&result.x),
        efficiency: (-result.value).clamp(0.0, 1.0),
        evaluations: result.evaluations,
        converged: result.converged,
    })
}
