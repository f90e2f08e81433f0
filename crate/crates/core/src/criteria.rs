//! Storage efficiency exposed as sensitivity criteria.
//!
//! Evaluation failures (invalid parameters, divergence) map to NaN so that
//! the sensitivity engine reports them as poisoned samples.

use crate::control::{ControlEnvelope, GaussianControl, SplineControl};
use crate::dynamics::{efficiency, MemoryParams, SolverConfig};
use crate::error::Result;
use crate::sensitivity::{Criterion, SensitivityBox};

/// η as a function of the memory parameters (d, g) for a fixed control.
#[derive(Debug, Clone)]
pub struct MemoryCriterion {
    pub control: ControlEnvelope,
    pub solver: SolverConfig,
}

impl Criterion for MemoryCriterion {
    fn dimension(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        MemoryParams::new(x[0], x[1])
            .and_then(|m| efficiency(m, &self.control, &self.solver))
            .unwrap_or(f64::NAN)
    }
}

/// η as a function of Gaussian control parameters (θ, Δτ, τ_FWHM).
#[derive(Debug, Clone, Copy)]
pub struct GaussianCriterion {
    pub memory: MemoryParams,
    pub solver: SolverConfig,
}

impl Criterion for GaussianCriterion {
    fn dimension(&self) -> usize {
        3
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        GaussianControl::new(x[0], x[1], x[2])
            .and_then(|c| efficiency(self.memory, &c.into(), &self.solver))
            .unwrap_or(f64::NAN)
    }
}

/// η as a function of the spline values at fixed knots.
#[derive(Debug, Clone)]
pub struct SplineCriterion {
    pub memory: MemoryParams,
    pub knots: Vec<f64>,
    pub solver: SolverConfig,
}

impl Criterion for SplineCriterion {
    fn dimension(&self) -> usize {
        self.knots.len()
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        SplineControl::new(self.knots.clone(), x.to_vec())
            .and_then(|c| efficiency(self.memory, &c.into(), &self.solver))
            .unwrap_or(f64::NAN)
    }
}

/// Reference scale for the delay axis of a Gaussian-control box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayScale {
    /// Half-width ε·|Δτ|, like the other axes.
    Relative,
    /// Half-width ε times the signal duration (the time unit).
    #[default]
    Signal,
}

/// Box of half-widths ε·θ, ε·(delay scale), ε·τ_FWHM about a Gaussian control.
pub fn gaussian_box(c: &GaussianControl, epsilon: f64, m: usize, delay: DelayScale) -> Result<SensitivityBox> {
    let delay_scale = match delay {
        DelayScale::Relative => c.delay.abs(),
        DelayScale::Signal => 1.0,
    };
    SensitivityBox::scaled(c.as_array().to_vec(), epsilon, &[c.theta, delay_scale, c.fwhm], m)
}
