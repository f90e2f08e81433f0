//! Variance-based sensitivity analysis of a scalar criterion h(X).
//!
//! * Fluctuations: Monte Carlo mean and standard deviation of h under random
//!   relative perturbations of X about a center point.
//! * One-at-a-time (OAT): variance of h along each axis with the others fixed.
//! * Sobol': first-order, second-order and higher-order variance fractions
//!   from an exact ANOVA decomposition on a uniform tensor grid.

use rand_distr::{Distribution, StandardNormal};
use rand_mt::Mt64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Total variance below which Sobol' indices are undefined.
pub const DEGENERATE_VARIANCE: f64 = 1e-14;

/// Largest dimension accepted by the tensor-grid Sobol' decomposition.
pub const MAX_SOBOL_DIMENSION: usize = 4;

/// A deterministic scalar performance criterion over N parameters.
pub trait Criterion: Sync {
    fn dimension(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> f64;
}

/// Criterion backed by a closure.
pub struct FnCriterion<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnCriterion<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Criterion for FnCriterion<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

fn evaluate_all<C: Criterion + ?Sized>(h: &C, points: &[Vec<f64>], exec: Execution) -> Result<Vec<f64>> {
    let values = exec.map(points.len(), |k| h.evaluate(&points[k]));
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::PoisonedSample(k)),
        None => Ok(values),
    }
}

fn check_dimension<C: Criterion + ?Sized>(h: &C, n: usize) -> Result<()> {
    if h.dimension() != n {
        return Err(Error::InvalidArgument(format!(
            "criterion has dimension {} but the analysis has {n} parameters",
            h.dimension()
        )));
    }
    Ok(())
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Correlation structure of parameter fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Every coordinate gets its own standard-normal draw.
    Independent,
    /// Two coordinates (d, g) move in opposite directions with one shared
    /// draw, keeping the product d·g fixed to first order.
    AtomNumberPreserving,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(NoiseMode::Independent),
            "atom-number-preserving" => Ok(NoiseMode::AtomNumberPreserving),
            other => Err(Error::InvalidArgument(format!("unknown noise mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSpec {
    pub center: Vec<f64>,
    /// Relative standard deviation of each coordinate.
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub mode: NoiseMode,
    #[serde(skip)]
    pub execution: Execution,
}

impl FluctuationSpec {
    pub fn new(center: Vec<f64>, epsilon: f64, samples: usize, seed: u64, mode: NoiseMode) -> Result<Self> {
        let spec = Self { center, epsilon, samples, seed, mode, execution: Execution::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.samples < 1 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if self.center.is_empty() {
            return Err(Error::InvalidArgument("center must not be empty".into()));
        }
        if self.mode == NoiseMode::AtomNumberPreserving && self.center.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "atom-number-preserving noise needs 2 parameters, got {}",
                self.center.len()
            )));
        }
        Ok(())
    }
}

/// Draw the fluctuated parameter vectors. Sample k is the k-th block of
/// draws from a Mersenne Twister (MT19937-64) stream seeded with `spec.seed`.
pub fn sample_fluctuations(spec: &FluctuationSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = Mt64::new(spec.seed);
    let eps = spec.epsilon;
    let samples = (0..spec.samples)
        .map(|_| match spec.mode {
            NoiseMode::Independent => spec
                .center
                .iter()
                .map(|x| {
                    let u: f64 = StandardNormal.sample(&mut rng);
                    x * (1.0 + eps * u)
                })
                .collect(),
            NoiseMode::AtomNumberPreserving => {
                let u: f64 = StandardNormal.sample(&mut rng);
                vec![spec.center[0] * (1.0 + eps * u), spec.center[1] * (1.0 - eps * u)]
            }
        })
        .collect();
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
}

/// Monte Carlo mean and spread of `h` over `sample_fluctuations(spec)`.
pub fn fluctuation_stats<C: Criterion + ?Sized>(h: &C, spec: &FluctuationSpec) -> Result<FluctuationReport> {
    check_dimension(h, spec.center.len())?;
    let points = sample_fluctuations(spec)?;
    let samples = evaluate_all(h, &points, spec.execution)?;
    let (mean, var) = mean_and_variance(&samples);
    Ok(FluctuationReport { mean, std_dev: var.sqrt(), samples, seed: spec.seed })
}

/// Per-axis ranges sampled on a uniform grid of `m` points (m odd, so the
/// center is a grid node).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBox {
    pub center: Vec<f64>,
    pub ranges: Vec<(f64, f64)>,
    pub m: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl SensitivityBox {
    /// Axis i spans x̄ᵢ(1 ± ε).
    pub fn relative(center: Vec<f64>, epsilon: f64, m: usize) -> Result<Self> {
        let scales: Vec<f64> = center.iter().map(|x| x.abs()).collect();
        Self::scaled(center, epsilon, &scales, m)
    }

    /// Axis i spans x̄ᵢ ± ε·scaleᵢ, for parameters whose natural reference
    /// is not their own magnitude.
    pub fn scaled(center: Vec<f64>, epsilon: f64, scales: &[f64], m: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
        }
        if scales.len() != center.len() {
            return Err(Error::InvalidArgument("one scale per axis required".into()));
        }
        let ranges = center.iter().zip(scales).map(|(x, s)| (x - epsilon * s, x + epsilon * s)).collect();
        Self::from_ranges(center, ranges, m)
    }

    pub fn from_ranges(center: Vec<f64>, ranges: Vec<(f64, f64)>, m: usize) -> Result<Self> {
        if m < 3 || m.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("grid count must be odd and >= 3, got {m}")));
        }
        if center.is_empty() || ranges.len() != center.len() {
            return Err(Error::InvalidArgument("one range per axis required".into()));
        }
        if ranges.iter().any(|(a, b)| !a.is_finite() || !b.is_finite() || a > b) {
            return Err(Error::InvalidArgument("ranges must be finite with min <= max".into()));
        }
        Ok(Self { center, ranges, m, execution: Execution::default() })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// The m grid values along `axis`: midpoints of m equal cells, so that
    /// uniform weights are a midpoint quadrature of the uniform distribution
    /// on the range. The middle node is the center of the range.
    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        let (a, b) = self.ranges[axis];
        let mid = 0.5 * (a + b);
        let h = (b - a) / self.m as f64;
        let half = (self.m / 2) as f64;
        (0..self.m).map(|k| mid + (k as f64 - half) * h).collect()
    }
}

/// Variance and standard deviation of `h` along one axis, others at center.
pub fn oat_variance<C: Criterion + ?Sized>(h: &C, bx: &SensitivityBox, axis: usize) -> Result<(f64, f64)> {
    check_dimension(h, bx.dimension())?;
    if axis >= bx.dimension() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {}", bx.dimension())));
    }
    let points: Vec<Vec<f64>> = bx
        .axis_nodes(axis)
        .into_iter()
        .map(|v| {
            let mut x = bx.center.clone();
            x[axis] = v;
            x
        })
        .collect();
    let values = evaluate_all(h, &points, bx.execution)?;
    let (_, var) = mean_and_variance(&values);
    Ok((var, var.sqrt()))
}

/// OAT variances for every axis.
pub fn oat_all<C: Criterion + ?Sized>(h: &C, bx: &SensitivityBox) -> Result<Vec<(f64, f64)>> {
    (0..bx.dimension()).map(|i| oat_variance(h, bx, i)).collect()
}

/// Sobol' variances and indices. Second-order matrices are symmetric with a
/// zero diagonal; `v_highest` collects every interaction of order three and
/// above (exactly V₁₂₃ for three parameters, zero for two).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolReport {
    pub v_tot: f64,
    pub v_first: Vec<f64>,
    pub v_second: Vec<Vec<f64>>,
    pub v_highest: f64,
    pub s_first: Vec<f64>,
    pub s_second: Vec<Vec<f64>>,
    pub s_highest: f64,
    /// V_tot minus the sum of independently computed terms of every order,
    /// before the highest-order term is assigned by closure.
    pub closure_residual: f64,
    pub seed: Option<u64>,
}

impl SobolReport {
    /// Σ S over all orders.
    pub fn total_index(&self) -> f64 {
        let n = self.s_first.len();
        let mut s = self.s_first.iter().sum::<f64>() + self.s_highest;
        for i in 0..n {
            for j in i + 1..n {
                s += self.s_second[i][j];
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Values of `h` on the full tensor grid, row-major with axis 0 slowest.
struct TensorGrid {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl TensorGrid {
    fn index_to_coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for axis in (0..self.n).rev() {
            c[axis] = idx % self.m;
            idx /= self.m;
        }
        c
    }

    /// Mean of h over all axes not in `subset` (a bit mask), as a flat array
    /// over the subset's axes in ascending axis order.
    fn marginal(&self, subset: usize) -> Vec<f64> {
        let axes: Vec<usize> = (0..self.n).filter(|a| subset & (1 << a) != 0).collect();
        let size = self.m.pow(axes.len() as u32);
        let mut sums = vec![0.0; size];
        for (idx, v) in self.values.iter().enumerate() {
            let c = self.index_to_coords(idx);
            let key = axes.iter().fold(0, |k, &a| k * self.m + c[a]);
            sums[key] += v;
        }
        let count = (self.values.len() / size) as f64;
        sums.iter_mut().for_each(|s| *s /= count);
        sums
    }
}

pub fn sobol_decompose<C: Criterion + ?Sized>(h: &C, bx: &SensitivityBox) -> Result<SobolReport> {
    let n = bx.dimension();
    check_dimension(h, n)?;
    if n > MAX_SOBOL_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "tensor-grid Sobol' decomposition supports at most {MAX_SOBOL_DIMENSION} parameters, got {n}"
        )));
    }
    let m = bx.m;
    let nodes: Vec<Vec<f64>> = (0..n).map(|a| bx.axis_nodes(a)).collect();
    let total = m.pow(n as u32);
    let grid_shape = TensorGrid { n, m, values: Vec::new() };
    let points: Vec<Vec<f64>> = (0..total)
        .map(|idx| grid_shape.index_to_coords(idx).iter().enumerate().map(|(a, &k)| nodes[a][k]).collect())
        .collect();
    let values = evaluate_all(h, &points, bx.execution)?;
    let grid = TensorGrid { n, m, values };

    let (_, v_tot) = mean_and_variance(&grid.values);
    if !(v_tot >= DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance(v_tot));
    }

    // Marginal means for every subset of axes.
    let subsets = 1usize << n;
    let marginals: Vec<Vec<f64>> = (0..subsets).map(|s| grid.marginal(s)).collect();
    let var_of = |s: usize| mean_and_variance(&marginals[s]).1;

    let v_first: Vec<f64> = (0..n).map(|i| var_of(1 << i)).collect();
    let mut v_second = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = var_of((1 << i) | (1 << j)) - v_first[i] - v_first[j];
            v_second[i][j] = v;
            v_second[j][i] = v;
        }
    }

    // Independent higher-order terms: ANOVA components by Möbius inversion of
    // the marginals, f_u = M_u - Σ_{v ⊊ u} f_v, with V_u = mean(f_u²).
    let mut components: Vec<Vec<f64>> = vec![Vec::new(); subsets];
    let mut v_higher_direct = 0.0;
    for u in 0..subsets {
        let u_axes: Vec<usize> = (0..n).filter(|a| u & (1 << a) != 0).collect();
        let mut f = marginals[u].clone();
        #[allow(clippy::needless_range_loop)]
        for v in 0..u {
            if v & !u != 0 {
                continue;
            }
            // Broadcast the component over u's axes and subtract.
            let v_pos: Vec<usize> = u_axes
                .iter()
                .enumerate()
                .filter(|(_, a)| v & (1 << **a) != 0)
                .map(|(p, _)| p)
                .collect();
            for (key, fk) in f.iter_mut().enumerate() {
                let mut digits = vec![0; u_axes.len()];
                let mut r = key;
                for p in (0..u_axes.len()).rev() {
                    digits[p] = r % m;
                    r /= m;
                }
                let vkey = v_pos.iter().fold(0, |k, &p| k * m + digits[p]);
                *fk -= components[v][vkey];
            }
        }
        if u_axes.len() >= 3 {
            v_higher_direct += f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64;
        }
        components[u] = f;
    }

    let lower: f64 = v_first.iter().sum::<f64>()
        + (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| v_second[i][j]).sum::<f64>();
    let closure_residual = v_tot - lower - v_higher_direct;
    let v_highest = if n >= 3 { v_tot - lower } else { 0.0 };

    let s_first = v_first.iter().map(|v| v / v_tot).collect();
    let s_second = v_second.iter().map(|row| row.iter().map(|v| v / v_tot).collect()).collect();
    Ok(SobolReport {
        v_tot,
        v_first,
        v_second,
        v_highest,
        s_first,
        s_second,
        s_highest: v_highest / v_tot,
        closure_residual,
        seed: None,
    })
}

/// Least-squares slope p of σ = p·ε through the origin.
pub fn fit_slope(epsilons: &[f64], sigmas: &[f64]) -> Result<f64> {
    if epsilons.len() != sigmas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} epsilon values but {} sigma values",
            epsilons.len(),
            sigmas.len()
        )));
    }
    if epsilons.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points to fit a slope".into()));
    }
    if epsilons.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidArgument("epsilon values must be non-negative".into()));
    }
    let see: f64 = epsilons.iter().map(|e| e * e).sum();
    if see == 0.0 {
        return Err(Error::InvalidArgument("all epsilon values are zero".into()));
    }
    let ses: f64 = epsilons.iter().zip(sigmas).map(|(e, s)| e * s).sum();
    Ok(ses / see)
}
