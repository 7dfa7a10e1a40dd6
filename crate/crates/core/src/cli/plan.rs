//! Configuration documents and their validation into a [`RunPlan`].
//!
//! A configuration is a TOML table whose keys are the fields of
//! [`ConfigDoc`]. Unknown keys are rejected. Command-line flags are merged
//! over the file table before validation, and the resolved plan is written
//! back as a complete [`ConfigDoc`] in the run manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{DtPolicy, InitialData};
use crate::error::{Error, Result};
use crate::spectral::DimMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    Diagnose,
    Converge,
    AlphaSweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Diagnose => "diagnose",
            Experiment::Converge => "converge",
            Experiment::AlphaSweep => "alpha-sweep",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `dt = "auto"` or a positive number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSpec {
    Fixed(f64),
    Named(String),
}

/// The configuration keys; every field optional on input, every field
/// present in a resolved document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    /// Grid points per axis.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub points: Option<i64>,
    /// `"2.5d"` or `"3d"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Friedrichs radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Horizon.
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<DtSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    /// `zero`, `orszag-tang`, `random`, `single-mode` or `snapshot`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    /// Wavevector of the `single-mode` data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<[i32; 3]>,
    /// HMHD1 input for `data = "snapshot"` and for `diagnose`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Steps between snapshots; 0 writes only the final state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger_every: Option<i64>,
    /// Steps between the compared times of a cutoff sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Hall-term coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freeze_velocity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Preset(InitialData),
    Snapshot(PathBuf),
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub experiment: Experiment,
    pub points: usize,
    pub dim: DimMode,
    pub alpha: f64,
    pub cutoff: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub dt: DtPolicy,
    pub cfl: f64,
    pub dt_max: f64,
    pub data: DataSource,
    /// Preset name as written in the config.
    pub data_name: String,
    pub amplitude: f64,
    pub seed: u64,
    pub spectrum_slope: f64,
    pub band: f64,
    pub mode: [i32; 3],
    pub snapshot: Option<PathBuf>,
    pub output: PathBuf,
    pub snapshot_every: usize,
    pub ledger_every: usize,
    pub sample_every: usize,
    pub cutoffs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub hall: f64,
    pub freeze_velocity: bool,
    pub jobs: usize,
    /// Non-fatal findings, such as `σ <= 1 + d/2`.
    pub warnings: Vec<String>,
}

pub const DEFAULT_POINTS: usize = 64;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_HORIZON: f64 = 0.25;
pub const DEFAULT_AMPLITUDE: f64 = 1.0;
pub const DEFAULT_SLOPE: f64 = 2.0;
pub const DEFAULT_BAND: f64 = 4.0;

/// Default Sobolev index, above `1 + d/2` in each mode.
pub fn default_sigma(dim: DimMode) -> f64 {
    match dim {
        DimMode::TwoPointFiveD => 2.5,
        DimMode::ThreeD => 2.75,
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::config(key, message)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be a positive finite number, got {v}")))
    }
}

fn count(key: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| bad(key, format!("must be a non-negative integer, got {v}")))
}

fn parse_dim(s: &str) -> Result<DimMode> {
    match s.to_ascii_lowercase().as_str() {
        "2.5d" | "2.5" | "2d" => Ok(DimMode::TwoPointFiveD),
        "3d" | "3" => Ok(DimMode::ThreeD),
        other => Err(bad("dim", format!("expected \"2.5d\" or \"3d\", got {other:?}"))),
    }
}

/// Dimension mode and `N` from an HMHD1 header.
fn snapshot_header(path: &Path) -> Result<(DimMode, usize)> {
    use std::io::Read;
    let mut head = [0u8; 10];
    std::fs::File::open(path)
        .and_then(|mut f| f.read_exact(&mut head))
        .map_err(|e| Error::io(path, e))?;
    let what = "HMHD1 snapshot header";
    if &head[..4] != crate::spectral::snapshot::MAGIC {
        return Err(Error::format(what, format!("{} lacks the HMHD magic", path.display())));
    }
    let dim = match head[5] {
        2 => DimMode::TwoPointFiveD,
        3 => DimMode::ThreeD,
        c => return Err(Error::format(what, format!("unknown dimension mode {c}"))),
    };
    Ok((dim, u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize))
}

impl ConfigDoc {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| bad("<document>", e.message().to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        ConfigDoc::deserialize(toml::Value::Table(table)).map_err(|e| {
            let msg = e.message().to_string();
            let key = unknown_field(&msg).unwrap_or_else(|| "<document>".to_string());
            bad(&key, msg)
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config documents serialize")
    }

    /// Validates and fills defaults.
    pub fn resolve(&self) -> Result<RunPlan> {
        let mut warnings = Vec::new();
        let experiment = self.experiment.unwrap_or(Experiment::Run);
        let data_name = self.data.clone().unwrap_or_else(|| {
            if experiment == Experiment::Diagnose {
                "snapshot".into()
            } else {
                "orszag-tang".into()
            }
        });
        let uses_snapshot = data_name == "snapshot" || experiment == Experiment::Diagnose;
        if uses_snapshot && self.snapshot.is_none() {
            return Err(bad("snapshot", format!("required by {}", if experiment == Experiment::Diagnose {
                "the diagnose experiment"
            } else {
                "data = \"snapshot\""
            })));
        }

        let mut dim = match &self.dim {
            Some(s) => parse_dim(s)?,
            None => DimMode::TwoPointFiveD,
        };
        let mut points = match self.points {
            Some(v) => count("N", v)?,
            None => DEFAULT_POINTS,
        };
        if uses_snapshot {
            let path = self.snapshot.as_ref().expect("checked above");
            let (sdim, sn) = snapshot_header(path)?;
            if self.points.is_some() && points != sn {
                return Err(bad("N", format!("N = {points} differs from the snapshot's N = {sn}")));
            }
            if self.dim.is_some() && dim != sdim {
                return Err(bad("dim", format!("dim = {dim} differs from the snapshot's {sdim}")));
            }
            dim = sdim;
            points = sn;
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(bad("N", format!("must be a power of two >= 8, got {points}")));
        }
        let limit = points as f64 / 3.0;

        let alpha = positive("alpha", self.alpha.unwrap_or(DEFAULT_ALPHA))?;
        let cutoff = self.n.unwrap_or((points / 3) as f64);
        if !(cutoff > 0.0 && cutoff <= limit) {
            return Err(bad("n", format!("must satisfy 0 < n <= N/3 = {limit:.4}, got {cutoff}")));
        }
        let sigma = self.sigma.unwrap_or_else(|| default_sigma(dim));
        if !sigma.is_finite() {
            return Err(bad("sigma", "must be finite"));
        }
        let critical = 1.0 + dim.spatial_dims() as f64 / 2.0;
        if sigma <= critical {
            warnings.push(format!(
                "sigma = {sigma} does not exceed 1 + d/2 = {critical}; the gradient embedding bound is not available"
            ));
        }
        let horizon = positive("T", self.horizon.unwrap_or(DEFAULT_HORIZON))?;
        let dt = match &self.dt {
            None => DtPolicy::Auto,
            Some(DtSpec::Named(s)) if s == "auto" => DtPolicy::Auto,
            Some(DtSpec::Named(s)) => return Err(bad("dt", format!("expected \"auto\" or a number, got {s:?}"))),
            Some(DtSpec::Fixed(v)) => DtPolicy::Fixed(positive("dt", *v)?),
        };
        let cfl = positive("cfl", self.cfl.unwrap_or(0.3))?;
        let dt_max = positive("dt_max", self.dt_max.unwrap_or(0.01))?;
        let amplitude = positive("amplitude", self.amplitude.unwrap_or(DEFAULT_AMPLITUDE))?;
        let seed = match self.seed {
            Some(s) => u64::try_from(s).map_err(|_| bad("seed", format!("must be non-negative, got {s}")))?,
            None => 0,
        };
        let spectrum_slope = self.spectrum_slope.unwrap_or(DEFAULT_SLOPE);
        if !spectrum_slope.is_finite() {
            return Err(bad("spectrum_slope", "must be finite"));
        }
        let band = self.band.unwrap_or(DEFAULT_BAND);
        if !(band >= 1.0 && band.is_finite()) {
            return Err(bad("band", format!("must be at least 1, got {band}")));
        }
        let mode = self.mode.unwrap_or([1, 0, 0]);
        let data = match data_name.as_str() {
            "zero" => DataSource::Preset(InitialData::Zero),
            "orszag-tang" => DataSource::Preset(InitialData::OrszagTang { amplitude }),
            "random" => DataSource::Preset(InitialData::Random {
                amplitude,
                seed,
                slope: spectrum_slope,
                band,
            }),
            "single-mode" => {
                let half = (points / 2) as i32;
                let ok = mode != [0, 0, 0]
                    && mode.iter().all(|&k| k > -half && k <= half)
                    && (dim == DimMode::ThreeD || mode[2] == 0);
                if !ok {
                    return Err(bad("mode", format!("{mode:?} is not a nonzero wavevector of the grid")));
                }
                DataSource::Preset(InitialData::SingleMode { amplitude, k: mode })
            }
            "snapshot" => DataSource::Snapshot(self.snapshot.clone().expect("checked above")),
            other => {
                return Err(bad(
                    "data",
                    format!("unknown preset {other:?}; expected zero, orszag-tang, random, single-mode or snapshot"),
                ))
            }
        };
        let snapshot_every = count("snapshot_every", self.snapshot_every.unwrap_or(0))?;
        let ledger_every = count("ledger_every", self.ledger_every.unwrap_or(1))?.max(1);
        let sample_every = count("sample_every", self.sample_every.unwrap_or(10))?.max(1);
        let jobs = count("jobs", self.jobs.unwrap_or(1))?;
        if jobs == 0 {
            return Err(bad("jobs", "must be at least 1"));
        }

        let cutoffs = self.cutoffs.clone().unwrap_or_else(|| vec![cutoff]);
        for &c in &cutoffs {
            if !(c > 0.0 && c <= limit) {
                return Err(bad("cutoffs", format!("{c} violates 0 < n <= N/3 = {limit:.4}")));
            }
        }
        if experiment == Experiment::Converge {
            if cutoffs.is_empty() {
                return Err(bad("cutoffs", "needs at least one cutoff"));
            }
            if cutoffs.len() == 1 {
                warnings.push("a single cutoff gives a degenerate convergence report".into());
            }
        }
        let alphas = self.alphas.clone().unwrap_or_else(|| vec![alpha]);
        for &a in &alphas {
            positive("alphas", a)?;
        }
        if experiment == Experiment::AlphaSweep && alphas.is_empty() {
            return Err(bad("alphas", "needs at least one alpha"));
        }
        let hall = self.hall.unwrap_or(1.0);
        if !hall.is_finite() {
            return Err(bad("hall", "must be finite"));
        }

        Ok(RunPlan {
            experiment,
            points,
            dim,
            alpha,
            cutoff,
            sigma,
            horizon,
            dt,
            cfl,
            dt_max,
            data,
            data_name,
            amplitude,
            seed,
            spectrum_slope,
            band,
            mode,
            snapshot: self.snapshot.clone(),
            output: self.output.clone().unwrap_or_else(|| PathBuf::from("out")),
            snapshot_every,
            ledger_every,
            sample_every,
            cutoffs,
            alphas,
            hall,
            freeze_velocity: self.freeze_velocity.unwrap_or(false),
            jobs,
            warnings,
        })
    }
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

impl RunPlan {
    /// The complete configuration that reproduces this plan.
    pub fn to_config(&self) -> ConfigDoc {
        ConfigDoc {
            experiment: Some(self.experiment),
            points: Some(self.points as i64),
            dim: Some(self.dim.to_string()),
            alpha: Some(self.alpha),
            n: Some(self.cutoff),
            sigma: Some(self.sigma),
            horizon: Some(self.horizon),
            dt: Some(match self.dt {
                DtPolicy::Auto => DtSpec::Named("auto".into()),
                DtPolicy::Fixed(v) => DtSpec::Fixed(v),
            }),
            cfl: Some(self.cfl),
            dt_max: Some(self.dt_max),
            data: Some(self.data_name.clone()),
            amplitude: Some(self.amplitude),
            seed: Some(self.seed as i64),
            spectrum_slope: Some(self.spectrum_slope),
            band: Some(self.band),
            mode: Some(self.mode),
            snapshot: self.snapshot.clone(),
            output: Some(self.output.clone()),
            snapshot_every: Some(self.snapshot_every as i64),
            ledger_every: Some(self.ledger_every as i64),
            sample_every: Some(self.sample_every as i64),
            cutoffs: Some(self.cutoffs.clone()),
            alphas: Some(self.alphas.clone()),
            hall: Some(self.hall),
            freeze_velocity: Some(self.freeze_velocity),
            jobs: Some(self.jobs as i64),
        }
    }
}

/// Reads an optional config file, merges `overrides` over it and resolves.
pub fn parse_config(path: Option<&Path>, overrides: toml::Table) -> Result<RunPlan> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            text.parse::<toml::Table>()
                .map_err(|e| bad("<document>", format!("{}: {}", p.display(), e.message())))?
        }
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k, v);
    }
    ConfigDoc::from_table(table)?.resolve()
}

/// Parses `key=value` with the value read as TOML, or as a bare string
/// when it is not valid TOML.
pub fn parse_assignment(s: &str) -> Result<(String, toml::Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| bad(s, "expected key=value"))?;
    let key = k.trim().to_string();
    let raw = v.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key, value))
}
