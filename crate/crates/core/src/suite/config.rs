//! Check configuration: a small, diffable JSON schema. Unknown fields are
//! rejected so typos fail loudly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TimeLattice;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Registered check name; optional when the name is supplied on the
    /// command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    /// Spatial axis for relativistic checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default)]
    pub theory: TheoryConfig,
    #[serde(default)]
    pub engine: EngineConfig,
    /// Per-residual tolerance overrides; defaults are the shipped
    /// acceptance values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Mandatory whenever the check draws random numbers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Fock-dimension safety bound override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            check: None,
            lattice: LatticeConfig::default(),
            space: None,
            theory: TheoryConfig::default(),
            engine: EngineConfig::default(),
            tolerances: BTreeMap::new(),
            seed: Some(0xB0500),
            max_dim: None,
        }
    }
}

impl CheckConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_lattice(&self) -> Result<TimeLattice> {
        TimeLattice::new(self.lattice.n_takes(), self.lattice.dt, self.lattice.t_start)
    }

    pub fn require_seed(&self, check: &str) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config(format!("check '{check}' uses randomness and needs a seed"))
        })
    }

    /// Effective dimension bound: explicit config, else the library default.
    pub fn dim_bound(&self) -> usize {
        self.max_dim.unwrap_or(crate::fock::DEFAULT_MAX_DIM)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
}

impl LatticeConfig {
    fn n_takes(&self) -> usize {
        self.n_sites
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            n_sites: 4,
            dt: 1.0,
            t_start: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub n_x: usize,
    pub dx: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TheoryConfig {
    Null,
    Oscillator { omega0: f64 },
    Quadratic { omega0: f64, gamma: f64 },
    FermionMode { omega0: f64 },
    RelScalar { mass: f64 },
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig::Oscillator {
            omega0: std::f64::consts::PI / 2.0,
        }
    }
}

impl TheoryConfig {
    pub fn omega0(&self) -> Result<f64> {
        match self {
            TheoryConfig::Null => Ok(0.0),
            TheoryConfig::Oscillator { omega0 }
            | TheoryConfig::FermionMode { omega0 }
            | TheoryConfig::Quadratic { omega0, .. } => Ok(*omega0),
            TheoryConfig::RelScalar { .. } => Err(Error::Config(
                "rel-scalar theory has no omega0".into(),
            )),
        }
    }

    pub fn mass(&self) -> Result<f64> {
        match self {
            TheoryConfig::RelScalar { mass } => Ok(*mass),
            _ => Err(Error::Config("theory has no mass parameter".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EngineConfig {
    Onebody,
    FockBose { n_max: u32 },
    FockFermi,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::Onebody
    }
}

impl EngineConfig {
    pub fn describe(&self) -> String {
        match self {
            EngineConfig::Onebody => "onebody".into(),
            EngineConfig::FockBose { n_max } => format!("fock-bose({n_max})"),
            EngineConfig::FockFermi => "fock-fermi".into(),
        }
    }
}
