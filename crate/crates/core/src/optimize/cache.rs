//! Plain-text cache of optimal controls, one record per line:
//!
//! ```text
//! <d> <g> <kind> <count> <params...> <eta> <converged>
//! ```
//!
//! `kind` is `gaussian` (params θ Δτ τ_FWHM) or `spline` (params: window
//! start, window end, then the N spline values on the Chebyshev grid).
//! Numbers are written in shortest round-trip decimal, so parsing a line
//! reproduces the in-memory values bit for bit. Lines starting with `#` are
//! comments.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::OptimumRecord;
use crate::control::{chebyshev_knots, ControlEnvelope, GaussianControl, SplineControl};
use crate::dynamics::MemoryParams;
use crate::error::{Error, Result};
use crate::numfmt::format_f64;

pub fn format_record(rec: &OptimumRecord) -> Result<String> {
    let (kind, params): (&str, Vec<f64>) = match &rec.control {
        ControlEnvelope::Gaussian(g) => ("gaussian", g.as_array().to_vec()),
        ControlEnvelope::Spline(s) => {
            let (a, b) = s.window();
            let mut p = vec![a, b];
            p.extend_from_slice(s.values());
            ("spline", p)
        }
        ControlEnvelope::Zero => {
            return Err(Error::UnsupportedParameterization("cannot cache a zero control".into()))
        }
    };
    let mut line = format!("{} {} {} {}", format_f64(rec.memory.d), format_f64(rec.memory.g), kind, params.len());
    for p in params {
        line.push(' ');
        line.push_str(&format_f64(p));
    }
    line.push_str(&format!(" {} {}", format_f64(rec.efficiency), rec.converged));
    Ok(line)
}

pub fn parse_record(line: &str) -> Result<OptimumRecord> {
    let bad = |what: &str| Error::Parse(format!("{what} in cache line `{line}`"));
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 6 {
        return Err(bad("too few fields"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
    let memory = MemoryParams::new(num(fields[0])?, num(fields[1])?)?;
    let count: usize = fields[3].parse().map_err(|_| bad("bad parameter count"))?;
    if fields.len() != 4 + count + 2 {
        return Err(bad("field count does not match parameter count"));
    }
    let params = fields[4..4 + count].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
    let control: ControlEnvelope = match fields[2] {
        "gaussian" if count == 3 => GaussianControl::new(params[0], params[1], params[2])?.into(),
        "spline" if count >= 6 => {
            let knots = chebyshev_knots(count - 2, (params[0], params[1]))?;
            SplineControl::new(knots, params[2..].to_vec())?.into()
        }
        other => return Err(bad(&format!("unknown kind `{other}` with {count} parameters"))),
    };
    let efficiency = num(fields[4 + count])?;
    let converged = fields[5 + count].parse::<bool>().map_err(|_| bad("bad converged flag"))?;
    Ok(OptimumRecord { memory, control, efficiency, evaluations: 0, converged })
}

fn kind_of(c: &ControlEnvelope) -> &'static str {
    match c {
        ControlEnvelope::Gaussian(_) => "gaussian",
        ControlEnvelope::Spline(_) => "spline",
        ControlEnvelope::Zero => "zero",
    }
}

/// Optimal controls keyed by exact memory point and parameterization kind.
#[derive(Debug, Clone, Default)]
pub struct OptimumCache {
    records: BTreeMap<(u64, u64, &'static str), OptimumRecord>,
}

impl OptimumCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load a cache file; a missing file gives an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cache = Self::new();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e.into()),
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            cache.insert(parse_record(line)?);
        }
        Ok(cache)
    }

    /// Write every record, ordered by (d, g, kind).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for rec in self.records.values() {
            writeln!(out, "{}", format_record(rec)?)?;
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn insert(&mut self, rec: OptimumRecord) {
        let key = (rec.memory.d.to_bits(), rec.memory.g.to_bits(), kind_of(&rec.control));
        self.records.insert(key, rec);
    }

    pub fn gaussian(&self, m: MemoryParams) -> Option<&OptimumRecord> {
        self.records.get(&(m.d.to_bits(), m.g.to_bits(), "gaussian"))
    }

    pub fn spline(&self, m: MemoryParams) -> Option<&OptimumRecord> {
        self.records.get(&(m.d.to_bits(), m.g.to_bits(), "spline"))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &OptimumRecord> {
        self.records.values()
    }
}

impl crate::control::GaussianOptima for OptimumCache {
    fn gaussian_optimum(&self, m: MemoryParams) -> Result<GaussianControl> {
        self.gaussian(m)
            .and_then(|r| r.gaussian())
            .ok_or(Error::MissingOptimum { d: m.d, g: m.g })
    }
}
