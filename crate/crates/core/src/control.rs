//! Control-field envelopes: Gaussian pulses parameterized by area, delay and
//! duration, and arbitrary shapes given by spline points on a Chebyshev grid.
//!
//! Envelopes are real, non-negative Rabi amplitudes Ω(τ) in units of the
//! inverse signal duration. The pulse area convention is θ = 2∫Ω dτ, so a
//! π-area pulse fully exchanges excitation between polarization and spin wave.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_f64;
use crate::quadrature;
use crate::spline::NaturalCubicSpline;

pub use crate::spline::chebyshev_knots;

/// Relative tolerance used for envelope integrals.
pub const AREA_REL_TOL: f64 = 1e-8;

/// Half-width, in units of σ, beyond which a Gaussian envelope is treated as
/// zero (e^{-100} relative to the peak).
const GAUSSIAN_CUTOFF_SIGMAS: f64 = 10.0;

/// Default window of spline-shaped controls.
pub const DEFAULT_SPLINE_WINDOW: (f64, f64) = (-2.0, 6.0);

/// Gaussian control pulse Ω(τ) = Ω₀ exp(-(τ-Δτ)²/σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianControl {
    /// Pulse area θ (radians).
    pub theta: f64,
    /// Delay of the pulse center relative to the signal center.
    pub delay: f64,
    /// Amplitude full width at half maximum.
    pub fwhm: f64,
}

impl GaussianControl {
    pub fn new(theta: f64, delay: f64, fwhm: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse area must be >= 0, got {theta}")));
        }
        if !delay.is_finite() {
            return Err(Error::InvalidArgument(format!("delay must be finite, got {delay}")));
        }
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidArgument(format!("control FWHM must be > 0, got {fwhm}")));
        }
        Ok(Self { theta, delay, fwhm })
    }

    /// Gaussian width σ = FWHM / (2√ln2).
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
    }

    /// Peak amplitude Ω₀ = θ / (2√π σ).
    pub fn peak(&self) -> f64 {
        self.theta / (2.0 * PI.sqrt() * self.sigma())
    }

    pub fn rabi(&self, tau: f64) -> f64 {
        let x = (tau - self.delay) / self.sigma();
        self.peak() * (-x * x).exp()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta, self.delay, self.fwhm]
    }
}

/// Arbitrary control shape: natural cubic spline through non-negative values
/// at fixed knots, zero outside the knot span and clipped below at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineControl {
    spline: NaturalCubicSpline,
}

impl SplineControl {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "spline control needs at least 4 points, got {}",
                knots.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("spline values must be finite and >= 0, got {v}")));
        }
        Ok(Self { spline: NaturalCubicSpline::new(&knots, &values)? })
    }

    /// Chebyshev-spaced spline over `window` whose values sample `f` at the knots.
    pub fn sampled(n: usize, window: (f64, f64), f: impl Fn(f64) -> f64) -> Result<Self> {
        let knots = chebyshev_knots(n, window)?;
        let values = knots.iter().map(|&t| f(t).max(0.0)).collect();
        Self::new(knots, values)
    }

    pub fn knots(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn len(&self) -> usize {
        self.spline.knots().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn window(&self) -> (f64, f64) {
        let k = self.spline.knots();
        (k[0], k[k.len() - 1])
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.knots().to_vec(), values)
    }

    pub fn rabi(&self, tau: f64) -> f64 {
        self.spline.eval(tau).map_or(0.0, |v| v.max(0.0))
    }
}

/// A control-field Rabi envelope Ω(τ).
#[derive(Debug, Clone, PartialEq)]
pub enum ControlEnvelope {
    Zero,
    Gaussian(GaussianControl),
    Spline(SplineControl),
}

impl ControlEnvelope {
    pub fn gaussian(gc: GaussianControl) -> Self {
        ControlEnvelope::Gaussian(gc)
    }

    pub fn rabi(&self, tau: f64) -> f64 {
        match self {
            ControlEnvelope::Zero => 0.0,
            ControlEnvelope::Gaussian(g) => g.rabi(tau),
            ControlEnvelope::Spline(s) => s.rabi(tau),
        }
    }

    /// Interval outside of which the envelope is (numerically) zero.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            ControlEnvelope::Zero => None,
            ControlEnvelope::Gaussian(g) => {
                let half = GAUSSIAN_CUTOFF_SIGMAS * g.sigma();
                Some((g.delay - half, g.delay + half))
            }
            ControlEnvelope::Spline(s) => Some(s.window()),
        }
    }

    /// Natural subdivision points inside `window` for quadrature.
    fn breakpoints(&self, window: (f64, f64)) -> Vec<f64> {
        let (a, b) = window;
        let mut pts = vec![a, b];
        match self {
            ControlEnvelope::Zero => {}
            ControlEnvelope::Gaussian(g) => {
                let s = g.sigma();
                let steps = 2.0 * GAUSSIAN_CUTOFF_SIGMAS;
                for k in 0..=steps as usize {
                    pts.push(g.delay + (k as f64 - GAUSSIAN_CUTOFF_SIGMAS) * s);
                }
            }
            ControlEnvelope::Spline(s) => pts.extend_from_slice(s.knots()),
        }
        clean_breakpoints(pts, window)
    }

    /// Duration scale used to choose the solver time step.
    pub fn time_scale(&self) -> Option<f64> {
        match self {
            ControlEnvelope::Gaussian(g) => Some(g.fwhm),
            _ => None,
        }
    }

    /// Write the envelope as two-column `tau,omega` CSV sampled at `points`
    /// equally spaced times across `window`.
    pub fn export_csv<W: Write>(&self, mut out: W, window: (f64, f64), points: usize) -> Result<()> {
        if points < 2 || !(window.0 < window.1) {
            return Err(Error::InvalidArgument("export needs >= 2 points on a non-empty window".into()));
        }
        writeln!(out, "tau,omega")?;
        let step = (window.1 - window.0) / (points - 1) as f64;
        for k in 0..points {
            let t = if k + 1 == points { window.1 } else { window.0 + k as f64 * step };
            writeln!(out, "{},{}", format_f64(t), format_f64(self.rabi(t)))?;
        }
        Ok(())
    }
}

impl From<GaussianControl> for ControlEnvelope {
    fn from(g: GaussianControl) -> Self {
        ControlEnvelope::Gaussian(g)
    }
}

impl From<SplineControl> for ControlEnvelope {
    fn from(s: SplineControl) -> Self {
        ControlEnvelope::Spline(s)
    }
}

fn clean_breakpoints(mut pts: Vec<f64>, window: (f64, f64)) -> Vec<f64> {
    pts.retain(|p| *p >= window.0 && *p <= window.1);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn integrate_pieces(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks
        .windows(2)
        .map(|w| quadrature::integrate(&f, w[0], w[1], AREA_REL_TOL))
        .sum()
}

/// Construct the envelope of a Gaussian control.
pub fn gaussian_envelope(gc: GaussianControl) -> ControlEnvelope {
    ControlEnvelope::Gaussian(gc)
}

/// Spline-shaped envelope.
pub fn spline_envelope(sc: SplineControl) -> ControlEnvelope {
    ControlEnvelope::Spline(sc)
}

/// Pulse area θ = 2∫Ω dτ over `window`.
pub fn pulse_area(ctrl: &ControlEnvelope, window: (f64, f64)) -> f64 {
    if matches!(ctrl, ControlEnvelope::Zero) || !(window.0 < window.1) {
        return 0.0;
    }
    let breaks = ctrl.breakpoints(window);
    2.0 * integrate_pieces(|t| ctrl.rabi(t), &breaks)
}

/// Overlap fidelity |∫f₁*f₂|² / (∫|f₁|² ∫|f₂|²) of two complex envelopes,
/// integrated piecewise between `breaks`.
pub fn overlap_fidelity_with<F1, F2>(f1: F1, f2: F2, breaks: &[f64]) -> Result<f64>
where
    F1: Fn(f64) -> Complex64,
    F2: Fn(f64) -> Complex64,
{
    let e1 = integrate_pieces(|t| f1(t).norm_sqr(), breaks);
    let e2 = integrate_pieces(|t| f2(t).norm_sqr(), breaks);
    if !(e1 > 0.0) {
        return Err(Error::UndefinedFidelity(1));
    }
    if !(e2 > 0.0) {
        return Err(Error::UndefinedFidelity(2));
    }
    let re = integrate_pieces(|t| (f1(t).conj() * f2(t)).re, breaks);
    let im = integrate_pieces(|t| (f1(t).conj() * f2(t)).im, breaks);
    Ok(((re * re + im * im) / (e1 * e2)).clamp(0.0, 1.0))
}

/// Overlap fidelity of two control envelopes over the union of their supports.
pub fn overlap_fidelity(c1: &ControlEnvelope, c2: &ControlEnvelope) -> Result<f64> {
    let s1 = c1.support().ok_or(Error::UndefinedFidelity(1))?;
    let s2 = c2.support().ok_or(Error::UndefinedFidelity(2))?;
    let window = (s1.0.min(s2.0), s1.1.max(s2.1));
    let mut breaks = c1.breakpoints(window);
    breaks.extend(c2.breakpoints(window));
    let breaks = clean_breakpoints(breaks, window);
    overlap_fidelity_with(
        |t| Complex64::new(c1.rabi(t), 0.0),
        |t| Complex64::new(c2.rabi(t), 0.0),
        &breaks,
    )
}

/// Neighborhood used to average overlap fidelity around a memory point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityMapSpec {
    /// Radius in decades of (log₁₀ d, log₁₀ g).
    pub radius: f64,
    pub sample_count: usize,
}

impl Default for FidelityMapSpec {
    fn default() -> Self {
        Self { radius: 0.1, sample_count: 32 }
    }
}

impl FidelityMapSpec {
    pub fn new(radius: f64, sample_count: usize) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {radius}")));
        }
        if sample_count < 1 {
            return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
        }
        Ok(Self { radius, sample_count })
    }

    /// Memory points spread uniformly over the disk around `m` (sunflower
    /// lattice in log₁₀ coordinates).
    pub fn neighbors(&self, m: crate::dynamics::MemoryParams) -> Vec<crate::dynamics::MemoryParams> {
        let golden = PI * (3.0 - 5f64.sqrt());
        let (ld, lg) = (m.d.log10(), m.g.log10());
        (0..self.sample_count)
            .map(|k| {
                let r = self.radius * ((k as f64 + 0.5) / self.sample_count as f64).sqrt();
                let phi = golden * k as f64;
                crate::dynamics::MemoryParams {
                    d: 10f64.powf(ld + r * phi.cos()),
                    g: 10f64.powf(lg + r * phi.sin()),
                }
            })
            .collect()
    }
}

/// Supplier of optimal Gaussian controls at arbitrary memory points.
pub trait GaussianOptima {
    fn gaussian_optimum(&self, m: crate::dynamics::MemoryParams) -> Result<GaussianControl>;
}

impl<F> GaussianOptima for F
where
    F: Fn(crate::dynamics::MemoryParams) -> Result<GaussianControl>,
{
    fn gaussian_optimum(&self, m: crate::dynamics::MemoryParams) -> Result<GaussianControl> {
        self(m)
    }
}

/// Average overlap fidelity between the optimal control at `m` and the optimal
/// controls at neighboring memory points.
pub fn mean_overlap_fidelity<O: GaussianOptima + ?Sized>(
    m: crate::dynamics::MemoryParams,
    spec: &FidelityMapSpec,
    optima: &O,
) -> Result<f64> {
    if !(m.d > 0.0 && m.g > 0.0) {
        return Err(Error::InvalidArgument("fidelity maps need d > 0 and g > 0".into()));
    }
    let center = gaussian_envelope(optima.gaussian_optimum(m)?);
    let mut total = 0.0;
    let neighbors = spec.neighbors(m);
    for n in &neighbors {
        let other = gaussian_envelope(optima.gaussian_optimum(*n)?);
        total += overlap_fidelity(&center, &other)?;
    }
    Ok(total / neighbors.len() as f64)
}
