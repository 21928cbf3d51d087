//! Run configuration: TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use lightcone::adjoint::BranchSpec;
use lightcone::chart::ChartParams;
use lightcone::grid::GridSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub chart: String,
    pub params: ChartParams,
    /// `NUxNV`.
    pub grid: String,
    pub tol: f64,
    pub branch: BranchSpec,
    /// Seed of a random Moebius transformation; the run is repeated on the
    /// transformed chart and the summary deltas are reported.
    pub lorentz_seed: Option<u64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub pair: PairConfig,
    pub adjoint: AdjointConfig,
    pub pairmap: PairmapConfig,
    pub quat: QuatConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chart: "clifford".into(),
            params: ChartParams::default(),
            grid: "32x32".into(),
            tol: 1e-8,
            branch: BranchSpec::Quadratic { root: 0 },
            lorentz_seed: None,
            format: Format::Json,
            out: None,
            pair: PairConfig::default(),
            adjoint: AdjointConfig::default(),
            pairmap: PairmapConfig::default(),
            quat: QuatConfig::default(),
        }
    }
}

/// Second surface of the `pair` command: a catalog chart or an exported
/// sampled surface.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub other: Option<String>,
    pub other_params: Option<ChartParams>,
    pub other_surface: Option<PathBuf>,
    /// Parameter offset of the second surface.
    pub shift: [f64; 2],
    /// Moebius transformation applied to the second surface only.
    pub other_lorentz_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdjointConfig {
    /// Spectral lattice of the exported adjoint surface.
    pub export_grid: String,
    pub export: Option<PathBuf>,
    pub round_trip: bool,
    /// Fraction of each non-periodic axis kept for the round-trip sites.
    pub round_trip_interior: f64,
    /// Willmore gate for the re-ingested interpolant.
    pub round_trip_tol: f64,
}

impl Default for AdjointConfig {
    fn default() -> Self {
        AdjointConfig {
            export_grid: "40x40".into(),
            export: None,
            round_trip: true,
            round_trip_interior: 0.8,
            round_trip_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairmapConfig {
    /// Replace the adjoint by a normalized pair pushed off the mean
    /// curvature sphere by this amount.
    pub perturb: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuatConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for QuatConfig {
    fn default() -> Self {
        QuatConfig { trials: 1000, seed: 0 }
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Catalog chart name.
    #[arg(long)]
    pub chart: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample lattice `NUxNV`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// One of quadratic, swillmore, hill.
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub lorentz_seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Second catalog chart of `pair`.
    #[arg(long)]
    pub other: Option<String>,
    /// Exported sampled surface used as the second surface of `pair`.
    #[arg(long)]
    pub other_surface: Option<PathBuf>,
    /// Where to write the exported adjoint surface.
    #[arg(long)]
    pub export: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn load(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(path) => read_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &o.chart {
        cfg.chart = c.clone();
    }
    if let Some(g) = &o.grid {
        cfg.grid = g.clone();
    }
    if let Some(t) = o.tol {
        cfg.tol = t;
    }
    if let Some(b) = &o.branch {
        let named = BranchSpec::from_name(b).map_err(CliError::config)?;
        // keep parameters from the file when the kind matches
        if std::mem::discriminant(&named) != std::mem::discriminant(&cfg.branch) {
            cfg.branch = named;
        }
    }
    if o.lorentz_seed.is_some() {
        cfg.lorentz_seed = o.lorentz_seed;
    }
    if o.out.is_some() {
        cfg.out = o.out.clone();
    }
    if let Some(f) = o.format {
        cfg.format = f;
    }
    if o.other.is_some() || o.other_surface.is_some() {
        cfg.pair.other = o.other.clone();
        cfg.pair.other_surface = o.other_surface.clone();
    }
    if o.export.is_some() {
        cfg.adjoint.export = o.export.clone();
    }
    if let Some(t) = o.trials {
        cfg.quat.trials = t;
    }
    if let Some(s) = o.seed {
        cfg.quat.seed = s;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn read_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    GridSpec::parse(&cfg.grid).map_err(CliError::config)?;
    GridSpec::parse(&cfg.adjoint.export_grid).map_err(CliError::config)?;
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(CliError::Config(format!("tolerance {} must be positive", cfg.tol)));
    }
    let interior = cfg.adjoint.round_trip_interior;
    if !(interior > 0.0 && interior <= 1.0) {
        return Err(CliError::Config(format!("round_trip_interior {interior} must lie in (0, 1]")));
    }
    if cfg.quat.trials == 0 {
        return Err(CliError::Config("quat trials must be positive".into()));
    }
    Ok(())
}

impl RunConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::parse(&self.grid).expect("validated")
    }

    pub fn export_grid_spec(&self) -> GridSpec {
        GridSpec::parse(&self.adjoint.export_grid).expect("validated")
    }
}
