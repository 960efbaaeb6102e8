//! On-disk formats for datum descriptions and solver runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay::{ContinuumDatum, DecayCharacter};
use crate::error::{NsvError, Result};
use crate::solver::{energy_resolving_schedule, scale_to_h1alpha, SolverConfig};
use crate::spectral::{Grid, PhysicsParams, SpectralVectorField};

/// Datum file: the family description plus the analytic r* it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumFile {
    #[serde(flatten)]
    pub datum: ContinuumDatum,
    /// Recorded for reference; recomputed (and checked) on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_star: Option<DecayCharacter>,
}

impl DatumFile {
    pub fn new(datum: ContinuumDatum) -> Self {
        Self { datum, r_star: Some(datum.analytic_r_star()) }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: DatumFile = toml::from_str(text)?;
        let datum = f.datum.validated()?;
        if let Some(r) = f.r_star {
            if r != datum.analytic_r_star() {
                return Err(NsvError::validation(format!(
                    "recorded r_star {r:?} disagrees with the family ({:?})",
                    datum.analytic_r_star()
                )));
            }
        }
        Ok(Self { datum, r_star: f.r_star })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub alpha: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_spacing")]
    pub sample_spacing: f64,
    #[serde(default = "default_per_decade")]
    pub samples_per_decade: usize,
}

fn default_spacing() -> f64 {
    2.0
}

fn default_per_decade() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSection {
    /// Relative paths resolve against the run file's directory.
    pub file: PathBuf,
    /// Target ‖u₀‖_{H¹_α}; the sampled field is used as is when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSection {
    #[serde(default)]
    pub times: Vec<f64>,
}

/// Run file for `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_true")]
    pub nonlinearity: bool,
    #[serde(default)]
    pub linear_companion: bool,
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub time: TimeSection,
    pub datum: DatumSection,
    #[serde(default)]
    pub snapshots: SnapshotSection,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if cfg.datum.file.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.datum.file = dir.join(&cfg.datum.file);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid = Grid::new(self.grid.n_points, self.grid.box_length)?;
        let params = PhysicsParams::new(self.physics.alpha, self.physics.nu, Grid::DIM)?;
        if !(self.time.sample_spacing > 0.0) || self.time.samples_per_decade == 0 {
            return Err(NsvError::validation("sample spacing and samples per decade must be positive"));
        }
        if !(self.time.t_end > 0.0) {
            return Err(NsvError::validation("t_end must be positive"));
        }
        let mut snapshot_times = self.snapshots.times.clone();
        snapshot_times.sort_by(f64::total_cmp);
        Ok(SolverConfig {
            grid,
            params,
            dt: self.time.dt,
            t_end: self.time.t_end,
            sample_times: energy_resolving_schedule(self.time.t_end, self.time.sample_spacing, self.time.samples_per_decade),
            snapshot_times,
            nonlinearity: self.nonlinearity,
            cfl_safety: 0.5,
            linear_companion: self.linear_companion,
        })
    }

    /// Samples the referenced datum on the run grid.
    pub fn initial_field(&self, datum: &ContinuumDatum) -> Result<SpectralVectorField> {
        let cfg = self.solver_config()?;
        let field = datum.sample_on_grid_with_envelope(&cfg.grid, self.datum.envelope)?;
        match self.datum.amplitude {
            Some(a) => scale_to_h1alpha(&field, &cfg.params, a),
            None => Ok(field),
        }
    }
}
