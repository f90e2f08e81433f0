//! Parameter-plane sweeps: per-point optimization with caching, one analysis
//! per (d, g) grid point, protocol labels and CSV/JSON output.
//!
//! Output directory layout:
//!
//! * `manifest.json` — config echo, seed, version, classifier thresholds
//! * `<kind>.csv` — one row per successful grid point
//! * `optima.cache` — optimum records (see [`crate::optimize::OptimumCache`])
//! * `errors.csv` — `d,g,error` for every failed point
//! * `sobol_d<d>_g<g>.json`, `shape_oat_d<d>_g<g>.csv`, `envelope_d<d>_g<g>.csv`
//!   — per-point detail, depending on the analysis

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::control::{mean_overlap_fidelity, ControlEnvelope, FidelityMapSpec, GaussianControl};
use crate::criteria::{gaussian_box, DelayScale, GaussianCriterion, MemoryCriterion, SplineCriterion};
use crate::dynamics::{efficiency, MemoryParams, SolverConfig};
use crate::error::{Error, Result};
use crate::exec::{with_workers, Execution};
use crate::numfmt::format_f64;
use crate::optimize::{optimize_gaussian, optimize_shape, OptimizerConfig, OptimumCache, OptimumRecord};
use crate::sensitivity::{
    fluctuation_stats, oat_variance, sobol_decompose, FluctuationSpec, NoiseMode, SensitivityBox,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CACHE_FILE: &str = "optima.cache";
pub const ERRORS_FILE: &str = "errors.csv";

/// Samples per envelope export.
pub const ENVELOPE_POINTS: usize = 901;

/// Pulse-area and timing thresholds of [`classify_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolThresholds {
    pub att_area: (f64, f64),
    pub att_min_delay_over_fwhm: f64,
    pub ats_area: (f64, f64),
    pub ats_max_abs_delay_over_fwhm: f64,
    pub eit_min_dg: f64,
    pub eit_min_area: f64,
}

pub const PROTOCOL_THRESHOLDS: ProtocolThresholds = ProtocolThresholds {
    att_area: (0.75 * PI, 1.25 * PI),
    att_min_delay_over_fwhm: 0.5,
    ats_area: (1.6 * PI, 2.4 * PI),
    ats_max_abs_delay_over_fwhm: 1.0,
    eit_min_dg: 10.0,
    eit_min_area: 2.4 * PI,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProtocolLabel {
    #[serde(rename = "EIT")]
    Eit,
    #[serde(rename = "ATS")]
    Ats,
    #[serde(rename = "ATT")]
    Att,
    #[serde(rename = "mixed")]
    Mixed,
}

impl ProtocolLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolLabel::Eit => "EIT",
            ProtocolLabel::Ats => "ATS",
            ProtocolLabel::Att => "ATT",
            ProtocolLabel::Mixed => "mixed",
        }
    }
}

impl fmt::Display for ProtocolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EIT" => Ok(ProtocolLabel::Eit),
            "ATS" => Ok(ProtocolLabel::Ats),
            "ATT" => Ok(ProtocolLabel::Att),
            "mixed" => Ok(ProtocolLabel::Mixed),
            other => Err(Error::Parse(format!("unknown protocol label `{other}`"))),
        }
    }
}

/// Label a Gaussian optimum by the storage protocol it resembles.
pub fn classify_protocol(m: MemoryParams, optimum: &OptimumRecord) -> Result<ProtocolLabel> {
    let c = optimum.gaussian().ok_or_else(|| {
        Error::UnsupportedParameterization("protocol labels are defined for Gaussian optima only".into())
    })?;
    Ok(classify_gaussian(m, &c))
}

fn classify_gaussian(m: MemoryParams, c: &GaussianControl) -> ProtocolLabel {
    let t = &PROTOCOL_THRESHOLDS;
    let within = |(lo, hi): (f64, f64)| c.theta >= lo && c.theta <= hi;
    if within(t.att_area) && c.delay > t.att_min_delay_over_fwhm * c.fwhm {
        ProtocolLabel::Att
    } else if within(t.ats_area) && c.delay.abs() <= t.ats_max_abs_delay_over_fwhm * c.fwhm {
        ProtocolLabel::Ats
    } else if m.d * m.g >= t.eit_min_dg && c.theta > t.eit_min_area {
        ProtocolLabel::Eit
    } else {
        ProtocolLabel::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisKind {
    Optimize,
    Fluctuations,
    Oat,
    Sobol,
    ShapeOat,
    Fidelity,
}

impl AnalysisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisKind::Optimize => "optimize",
            AnalysisKind::Fluctuations => "fluctuations",
            AnalysisKind::Oat => "oat",
            AnalysisKind::Sobol => "sobol",
            AnalysisKind::ShapeOat => "shape-oat",
            AnalysisKind::Fidelity => "fidelity",
        }
    }

    /// Metric columns written after `d,g,protocol`.
    pub fn metric_names(self) -> &'static [&'static str] {
        match self {
            AnalysisKind::Optimize => &["eta", "theta", "delay", "fwhm", "converged"],
            AnalysisKind::Fluctuations => &["eta", "mean", "std"],
            AnalysisKind::Oat => &["eta", "sigma_area", "sigma_delay", "sigma_fwhm"],
            AnalysisKind::Sobol => &[
                "eta",
                "s_area",
                "s_delay",
                "s_fwhm",
                "s_area_delay",
                "s_area_fwhm",
                "s_delay_fwhm",
                "s_highest",
                "closure_residual",
            ],
            AnalysisKind::ShapeOat => &["eta", "sigma_max", "tau_max", "sigma_rms"],
            AnalysisKind::Fidelity => &["eta", "fidelity"],
        }
    }

    fn data_file(self) -> String {
        format!("{}.csv", self.as_str().replace('-', "_"))
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimize" => Ok(AnalysisKind::Optimize),
            "fluctuations" => Ok(AnalysisKind::Fluctuations),
            "oat" => Ok(AnalysisKind::Oat),
            "sobol" => Ok(AnalysisKind::Sobol),
            "shape-oat" => Ok(AnalysisKind::ShapeOat),
            "fidelity" => Ok(AnalysisKind::Fidelity),
            other => Err(Error::Config(format!("unknown analysis kind `{other}`"))),
        }
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k + 1 == n => hi,
            k => 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub d_axis: Vec<f64>,
    pub g_axis: Vec<f64>,
    pub kind: AnalysisKind,
    /// Relative standard deviation of memory-parameter fluctuations.
    pub eps_m: f64,
    /// Relative half-width of control-parameter boxes.
    pub eps_g: f64,
    /// Monte Carlo samples per fluctuation analysis.
    pub samples: usize,
    pub seed: u64,
    /// Grid points per axis for OAT and Sobol' analyses.
    pub grid_m: usize,
    pub noise_mode: NoiseMode,
    pub delay_scale: DelayScale,
    /// Spline points for shape optimization.
    pub shape_points: usize,
    pub fidelity: FidelityMapSpec,
    /// Discretization for every reported efficiency and analysis.
    pub solver: SolverConfig,
    /// Gaussian search; its `solver` is used only during the search.
    pub optimizer: OptimizerConfig,
    pub shape_optimizer: OptimizerConfig,
    /// Write the optimal control of every point as a (τ, Ω) CSV.
    pub envelopes: bool,
    /// Extra optimum cache to read before optimizing (never written).
    pub cache_in: Option<PathBuf>,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_axis: log_axis(1.0, 100.0, 20),
            g_axis: log_axis(0.01, 3.0, 18),
            kind: AnalysisKind::Optimize,
            eps_m: 0.05,
            eps_g: 0.05,
            samples: 1000,
            seed: 0,
            grid_m: 33,
            noise_mode: NoiseMode::AtomNumberPreserving,
            delay_scale: DelayScale::Signal,
            shape_points: 51,
            fidelity: FidelityMapSpec::default(),
            solver: SolverConfig::default(),
            optimizer: OptimizerConfig { solver: SolverConfig::coarse(), ..OptimizerConfig::gaussian() },
            shape_optimizer: OptimizerConfig {
                solver: SolverConfig::coarse(),
                max_evals: 5000,
                ..OptimizerConfig::shape()
            },
            envelopes: false,
            cache_in: None,
            out: PathBuf::from("qmem-out"),
            workers: 0,
        }
    }
}

impl SweepConfig {
    /// Parse a config document. A manifest written by [`run`] is accepted too,
    /// in which case its config echo is used.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))?;
        let value = match value.get("config") {
            Some(inner) if value.get("manifest_version").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let axis_ok = |axis: &[f64]| {
            !axis.is_empty()
                && axis.iter().all(|v| v.is_finite() && *v > 0.0)
                && axis.windows(2).all(|w| w[0] < w[1])
        };
        if !axis_ok(&self.d_axis) || !axis_ok(&self.g_axis) {
            return Err(Error::Config("d and g axes must be non-empty, positive and strictly ascending".into()));
        }
        if !(self.eps_m >= 0.0) || !self.eps_m.is_finite() {
            return Err(Error::Config(format!("eps_m must be >= 0, got {}", self.eps_m)));
        }
        if !(self.eps_g > 0.0) || !self.eps_g.is_finite() {
            return Err(Error::Config(format!("eps_g must be > 0, got {}", self.eps_g)));
        }
        if self.samples < 1 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if self.grid_m < 3 || self.grid_m.is_multiple_of(2) {
            return Err(Error::Config(format!("grid_m must be odd and >= 3, got {}", self.grid_m)));
        }
        if self.shape_points < 4 {
            return Err(Error::Config(format!("shape_points must be >= 4, got {}", self.shape_points)));
        }
        FidelityMapSpec::new(self.fidelity.radius, self.fidelity.sample_count).map_err(config_error)?;
        self.solver.validate().map_err(config_error)?;
        self.optimizer.validate().map_err(config_error)?;
        self.shape_optimizer.validate().map_err(config_error)?;
        if self.optimizer.bounds.len() != 3 {
            return Err(Error::Config("Gaussian optimizer needs three bounds".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<MemoryParams> {
        self.d_axis
            .iter()
            .flat_map(|&d| self.g_axis.iter().map(move |&g| MemoryParams { d, g }))
            .collect()
    }

    /// The manifest document: everything needed to reproduce the data files.
    pub fn manifest(&self) -> Result<serde_json::Value> {
        let mut config = serde_json::to_value(self)?;
        if let Some(obj) = config.as_object_mut() {
            // Execution details that do not influence any output.
            obj.remove("out");
            obj.remove("workers");
        }
        let files: BTreeSet<String> =
            [MANIFEST_FILE.to_string(), CACHE_FILE.into(), ERRORS_FILE.into(), self.kind.data_file()].into();
        Ok(serde_json::json!({
            "manifest_version": 1,
            "tool": "qmem",
            "version": env!("CARGO_PKG_VERSION"),
            "kind": self.kind,
            "seed": self.seed,
            "points": self.d_axis.len() * self.g_axis.len(),
            "protocol_thresholds": PROTOCOL_THRESHOLDS,
            "files": files,
            "config": config,
        }))
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Seed of grid point `index`, mixed from the master seed (SplitMix64).
pub fn point_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One heat-map row.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRow {
    pub d: f64,
    pub g: f64,
    pub protocol: ProtocolLabel,
    pub metrics: Vec<(String, f64)>,
}

fn heatmap_header(metrics: &[String]) -> Vec<String> {
    ["d", "g", "protocol"].iter().map(|s| s.to_string()).chain(metrics.iter().cloned()).collect()
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Write rows as `d,g,protocol,<metrics>` sorted by (d, g), with numbers in
/// shortest round-trip decimal.
pub fn emit_heatmap(rows: &[HeatmapRow], path: &Path) -> Result<()> {
    let first = rows.first().ok_or_else(|| Error::InvalidArgument("no rows to emit".into()))?;
    let names: Vec<String> = first.metrics.iter().map(|(n, _)| n.clone()).collect();
    for r in rows {
        if r.metrics.len() != names.len() || r.metrics.iter().zip(&names).any(|((n, _), m)| n != m) {
            return Err(Error::Schema(format!("row at d={}, g={} has different metric columns", r.d, r.g)));
        }
    }
    let mut sorted: Vec<&HeatmapRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.g.total_cmp(&b.g)));
    let records: Vec<Vec<String>> = sorted
        .iter()
        .map(|r| {
            [format_f64(r.d), format_f64(r.g), r.protocol.to_string()]
                .into_iter()
                .chain(r.metrics.iter().map(|(_, v)| format_f64(*v)))
                .collect()
        })
        .collect();
    write_csv(path, &heatmap_header(&names), &records)
}

/// Parse a file written by [`emit_heatmap`].
pub fn read_heatmap(path: &Path) -> Result<Vec<HeatmapRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.len() < 3 || header[..3] != ["d", "g", "protocol"] {
        return Err(Error::Schema(format!("unexpected heat-map header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let metrics = header[3..]
            .iter()
            .zip(rec.iter().skip(3))
            .map(|(n, v)| Ok((n.clone(), num(v)?)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(HeatmapRow { d: num(&rec[0])?, g: num(&rec[1])?, protocol: rec[2].parse()?, metrics });
    }
    Ok(rows)
}

/// A grid point whose analysis failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub d: f64,
    pub g: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<HeatmapRow>,
    pub errors: Vec<PointError>,
    pub data_file: PathBuf,
}

impl SweepOutcome {
    pub fn is_partial(&self) -> bool {
        !self.errors.is_empty()
    }
}

/// Shared optimum store: records of this run plus a read-only seed cache.
struct Optima<'a> {
    cfg: &'a SweepConfig,
    cache: Mutex<OptimumCache>,
    seeded: OptimumCache,
}

impl Optima<'_> {
    fn lookup(&self, m: MemoryParams, spline: bool) -> Option<OptimumRecord> {
        let pick = |c: &OptimumCache| if spline { c.spline(m).cloned() } else { c.gaussian(m).cloned() };
        let own = pick(&self.cache.lock().unwrap_or_else(|p| p.into_inner()));
        own.or_else(|| pick(&self.seeded))
    }

    fn store(&self, rec: OptimumRecord) {
        self.cache.lock().unwrap_or_else(|p| p.into_inner()).insert(rec);
    }

    fn gaussian(&self, m: MemoryParams) -> Result<OptimumRecord> {
        if let Some(rec) = self.lookup(m, false) {
            self.store(rec.clone());
            return Ok(rec);
        }
        let mut rec = optimize_gaussian(m, &self.cfg.optimizer)?;
        rec.efficiency = efficiency(m, &rec.control, &self.cfg.solver)?;
        self.store(rec.clone());
        Ok(rec)
    }

    fn shape(&self, m: MemoryParams, init: &ControlEnvelope) -> Result<OptimumRecord> {
        if let Some(rec) = self.lookup(m, true) {
            if let ControlEnvelope::Spline(s) = &rec.control {
                if s.len() == self.cfg.shape_points {
                    self.store(rec.clone());
                    return Ok(rec);
                }
            }
        }
        let mut rec = optimize_shape(m, self.cfg.shape_points, init, &self.cfg.shape_optimizer)?;
        rec.efficiency = efficiency(m, &rec.control, &self.cfg.solver)?;
        self.store(rec.clone());
        Ok(rec)
    }
}

fn number_tag(d: f64, g: f64) -> String {
    format!("d{}_g{}", format_f64(d), format_f64(g))
}

fn analyze_point(cfg: &SweepConfig, optima: &Optima, index: usize, m: MemoryParams) -> Result<HeatmapRow> {
    let rec = optima.gaussian(m)?;
    let gc = rec.gaussian().ok_or_else(|| Error::UnsupportedParameterization("expected a Gaussian optimum".into()))?;
    let protocol = classify_gaussian(m, &gc);
    let out = &cfg.out;
    let tag = number_tag(m.d, m.g);
    let mut exported = rec.control.clone();
    let values: Vec<f64> = match cfg.kind {
        AnalysisKind::Optimize => vec![
            rec.efficiency,
            gc.theta,
            gc.delay,
            gc.fwhm,
            if rec.converged { 1.0 } else { 0.0 },
        ],
        AnalysisKind::Fluctuations => {
            let h = MemoryCriterion { control: rec.control.clone(), solver: cfg.solver };
            let spec = FluctuationSpec::new(
                vec![m.d, m.g],
                cfg.eps_m,
                cfg.samples,
                point_seed(cfg.seed, index),
                cfg.noise_mode,
            )?;
            let r = fluctuation_stats(&h, &spec)?;
            vec![rec.efficiency, r.mean, r.std_dev]
        }
        AnalysisKind::Oat => {
            let h = GaussianCriterion { memory: m, solver: cfg.solver };
            let bx = gaussian_box(&gc, cfg.eps_g, cfg.grid_m, cfg.delay_scale)?;
            let mut v = vec![rec.efficiency];
            for axis in 0..3 {
                v.push(oat_variance(&h, &bx, axis)?.1);
            }
            v
        }
        AnalysisKind::Sobol => {
            let h = GaussianCriterion { memory: m, solver: cfg.solver };
            let bx = gaussian_box(&gc, cfg.eps_g, cfg.grid_m, cfg.delay_scale)?;
            let r = sobol_decompose(&h, &bx)?;
            fs::write(out.join(format!("sobol_{tag}.json")), r.to_json()? + "\n")?;
            vec![
                rec.efficiency,
                r.s_first[0],
                r.s_first[1],
                r.s_first[2],
                r.s_second[0][1],
                r.s_second[0][2],
                r.s_second[1][2],
                r.s_highest,
                r.closure_residual,
            ]
        }
        AnalysisKind::ShapeOat => {
            let shape = optima.shape(m, &rec.control)?;
            let ControlEnvelope::Spline(s) = &shape.control else {
                return Err(Error::UnsupportedParameterization("expected a spline optimum".into()));
            };
            let h = SplineCriterion { memory: m, knots: s.knots().to_vec(), solver: cfg.solver };
            let bx = SensitivityBox::relative(s.values().to_vec(), cfg.eps_g, cfg.grid_m)?;
            let sigmas = (0..s.len()).map(|k| Ok(oat_variance(&h, &bx, k)?.1)).collect::<Result<Vec<f64>>>()?;
            let detail: Vec<Vec<String>> = s
                .knots()
                .iter()
                .zip(s.values())
                .zip(&sigmas)
                .map(|((t, v), sg)| vec![format_f64(*t), format_f64(*v), format_f64(*sg)])
                .collect();
            write_csv(
                &out.join(format!("shape_oat_{tag}.csv")),
                &["tau".into(), "xi".into(), "sigma".into()],
                &detail,
            )?;
            let (kmax, smax) = sigmas
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
            let rms = (sigmas.iter().map(|v| v * v).sum::<f64>() / sigmas.len() as f64).sqrt();
            exported = shape.control.clone();
            vec![shape.efficiency, smax, s.knots()[kmax], rms]
        }
        AnalysisKind::Fidelity => {
            let provider = |n: MemoryParams| -> Result<GaussianControl> {
                optima.gaussian(n)?.gaussian().ok_or(Error::MissingOptimum { d: n.d, g: n.g })
            };
            let f = mean_overlap_fidelity(m, &cfg.fidelity, &provider)?;
            vec![rec.efficiency, f]
        }
    };
    if cfg.envelopes {
        let file = fs::File::create(out.join(format!("envelope_{tag}.csv")))?;
        exported.export_csv(std::io::BufWriter::new(file), cfg.solver.window, ENVELOPE_POINTS)?;
    }
    let metrics = cfg.kind.metric_names().iter().map(|s| s.to_string()).zip(values).collect();
    Ok(HeatmapRow { d: m.d, g: m.g, protocol, metrics })
}

/// Run a sweep and write its files into `cfg.out`.
///
/// Configuration problems are reported as [`Error::Config`] and output
/// directory problems as [`Error::Io`], both before any computation.
/// Failures at individual points are collected in the outcome and the
/// errors file.
pub fn run(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let seeded = match &cfg.cache_in {
        Some(p) => OptimumCache::load(p).map_err(config_error)?,
        None => OptimumCache::new(),
    };
    let out = &cfg.out;
    fs::create_dir_all(out)?;
    let manifest = serde_json::to_string_pretty(&cfg.manifest()?)? + "\n";
    fs::write(out.join(MANIFEST_FILE), manifest)?;

    let cache_path = out.join(CACHE_FILE);
    let optima = Optima { cfg, cache: Mutex::new(OptimumCache::load(&cache_path)?), seeded };
    let points = cfg.points();
    let results = with_workers(cfg.workers, || {
        Execution::Parallel.map(points.len(), |k| analyze_point(cfg, &optima, k, points[k]))
    });

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (m, r) in points.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(PointError { d: m.d, g: m.g, message: e.to_string() }),
        }
    }

    let data_file = out.join(cfg.kind.data_file());
    if rows.is_empty() {
        let names: Vec<String> = cfg.kind.metric_names().iter().map(|s| s.to_string()).collect();
        write_csv(&data_file, &heatmap_header(&names), &[])?;
    } else {
        emit_heatmap(&rows, &data_file)?;
    }
    let error_rows: Vec<Vec<String>> =
        errors.iter().map(|e| vec![format_f64(e.d), format_f64(e.g), e.message.clone()]).collect();
    write_csv(&out.join(ERRORS_FILE), &["d".into(), "g".into(), "error".into()], &error_rows)?;
    optima.cache.into_inner().unwrap_or_else(|p| p.into_inner()).save(&cache_path)?;

    rows.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.g.total_cmp(&b.g)));
    Ok(SweepOutcome { rows, errors, data_file })
}
