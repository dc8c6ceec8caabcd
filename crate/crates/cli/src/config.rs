//! JSON experiment configuration. Every block has defaults, so `{}` is a
//! valid config describing the U(2) chain used throughout the docs.

use std::ops::RangeInclusive;
use std::path::Path;

use abcage::gauge::{abelian_flux, shift_family, stride_family, u2_family, u2_model};
use abcage::{Boundary, LatticeSpec, LinkSet, LinkSetDoc, ModeIndex, Orientation, Site};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub drive: DriveConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinksConfig {
    /// U1 = U4 = 1, U2 = sigma_x, U3 = i sigma_y.
    #[default]
    U2Model,
    U2Family { gamma: f64, theta: f64, psi: f64 },
    Shift { n: usize },
    Stride { n: usize, m: usize },
    Abelian { phi: f64 },
    Explicit { links: LinkSetDoc },
}

impl LinksConfig {
    pub fn build(&self) -> Result<LinkSet<f64>, CliError> {
        let links = match self {
            LinksConfig::U2Model => u2_model(),
            LinksConfig::U2Family { gamma, theta, psi } => u2_family(*gamma, *theta, *psi)?,
            LinksConfig::Shift { n } => shift_family(*n)?,
            LinksConfig::Stride { n, m } if m == n => shift_family(*n)?,
            LinksConfig::Stride { n, m } => stride_family(*n, *m)?,
            LinksConfig::Abelian { phi } => abelian_flux(*phi),
            LinksConfig::Explicit { links } => LinkSet::from_doc_with_tolerance(links, 1e-9)?,
        };
        Ok(links)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub links: LinksConfig,
    pub n_cells: usize,
    pub boundary: Boundary,
    /// `J / 2pi` in MHz.
    pub hopping_j_mhz: f64,
    pub orientation: Orientation,
    /// Defaults to centring the chain on cell 0.
    pub first_cell: Option<i64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            links: LinksConfig::default(),
            n_cells: 11,
            boundary: Boundary::Open,
            hopping_j_mhz: 10.0,
            orientation: Orientation::default(),
            first_cell: None,
        }
    }
}

impl ModelConfig {
    pub fn spec(&self, n_components: usize) -> LatticeSpec<f64> {
        let first = self.first_cell.unwrap_or(-((self.n_cells as i64 - 1) / 2));
        LatticeSpec::new(n_components, self.n_cells, self.boundary, self.hopping_j_mhz)
            .with_first_cell(first)
            .with_orientation(self.orientation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    pub pump_cell: i64,
    pub pump_site: Site,
    pub pump_mode: usize,
    /// `|P| / 2pi` in MHz.
    pub pump_mhz: f64,
    pub pump_phase: f64,
    /// Pump detuning from the pumped mode, units of `J`.
    pub omega_p: f64,
    /// Decay rate, units of `J`.
    pub kappa: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            pump_cell: 0,
            pump_site: Site::A,
            pump_mode: 1,
            pump_mhz: 10.0,
            pump_phase: 0.0,
            omega_p: 6f64.sqrt(),
            kappa: 0.1,
        }
    }
}

impl DriveConfig {
    pub fn pumped_mode(&self) -> ModeIndex {
        ModeIndex::new(self.pump_cell, self.pump_site, self.pump_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n_k: usize,
    /// CLES energy, units of `J`.
    pub energy: f64,
    pub window_cells: usize,
    /// Start component for `cage` / `evolve`.
    pub l: usize,
    pub start_cell: i64,
    pub t_max: f64,
    pub threshold: f64,
    pub n_samples: usize,
    /// `"2..6"`, inclusive.
    pub n_range: String,
    pub m_range: String,
    pub omega0_ghz: f64,
    pub delta_ghz: f64,
    pub allow_out_of_range: bool,
    pub tier: u8,
    /// 1-based band whose energy the fidelity target and pump use.
    pub band: Option<usize>,
    pub stark_compensated: bool,
    /// End of driven runs, units of `1/J`; defaults to `20 / kappa`.
    pub t_end: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_k: 101,
            energy: 6f64.sqrt(),
            window_cells: 3,
            l: 1,
            start_cell: 0,
            t_max: 50.0,
            threshold: 1e-6,
            n_samples: 201,
            n_range: "2..6".into(),
            m_range: "2..6".into(),
            omega0_ghz: 5.5,
            delta_ghz: 1.5,
            allow_out_of_range: false,
            tier: 1,
            band: None,
            stark_compensated: false,
            t_end: None,
        }
    }
}

/// Parse `"a..b"` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Config(format!("range {s:?}: expected \"a..b\" or \"a\""));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let a: usize = s.trim().parse().map_err(|_| bad())?;
            Ok(a..=a)
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}
