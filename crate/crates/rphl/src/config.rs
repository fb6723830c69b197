//! Experiment configuration as read from JSON, and its resolution into core
//! model objects.

use std::path::{Path, PathBuf};

use rphl_core::fock::Space;
use rphl_core::hamiltonian::ModelConfig;
use rphl_core::lattice::{build_torus, CouplingProfile, Momentum, TorusLattice};
use rphl_core::photon::{build_sector, ModeSelection, PhotonSector, SectorParams};
use rphl_core::MAX_DIM;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Environment variable that may lower the dimension guard.
pub const MAX_DIM_ENV: &str = "RPHL_MAX_DIM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub d: usize,
    pub ell: usize,
    pub t: f64,
    /// One charge or a sweep.
    #[serde(default)]
    pub e_charge: Charges,
    pub beta: Vec<f64>,
    pub coupling: CouplingSpec,
    #[serde(default)]
    pub photon: Option<PhotonSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Charges {
    One(f64),
    Many(Vec<f64>),
}

impl Default for Charges {
    fn default() -> Self {
        Charges::One(0.0)
    }
}

impl Charges {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Charges::One(e) => vec![*e],
            Charges::Many(v) => v.clone(),
        }
    }
}

/// `{"onsite": U0}`, `{"onsite": U0, "nn": U1}` or `{"table": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onsite: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub dx: Vec<i64>,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonSpec {
    #[serde(rename = "L")]
    pub l_box: usize,
    pub kappa: f64,
    pub m0: f64,
    pub n_max: usize,
    pub modes: ModesSpec,
    /// Only read with `"modes": "auto"`.
    #[serde(default)]
    pub include_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllTag {
    #[serde(rename = "all")]
    All,
}

/// `"auto"` or a list of `[n1, n2, n3, lambda]` with `k = 2 pi n / L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModesSpec {
    Auto(AutoTag),
    List(Vec<[i64; 4]>),
}

/// `"all"` or a list of integer labels `m` with `p = 2 pi m / ell`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentaSpec {
    All(AllTag),
    List(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default = "all_momenta")]
    pub momenta: MomentaSpec,
    #[serde(default = "default_samples")]
    pub h_samples: usize,
    #[serde(default = "default_scale")]
    pub h_scale: f64,
    #[serde(default = "default_corollary_samples")]
    pub corollary_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn all_momenta() -> MomentaSpec {
    MomentaSpec::All(AllTag::All)
}

fn default_samples() -> usize {
    100
}

fn default_scale() -> f64 {
    2.0
}

fn default_corollary_samples() -> usize {
    50
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            momenta: all_momenta(),
            h_samples: default_samples(),
            h_scale: default_scale(),
            corollary_samples: default_corollary_samples(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.beta.is_empty() {
            return Err(HarnessError::Config("beta list is empty".into()));
        }
        if let Some(b) = m.beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(HarnessError::Config(format!(
                "beta must be positive (got {b})"
            )));
        }
        let charges = m.e_charge.values();
        if charges.is_empty() {
            return Err(HarnessError::Config("e_charge list is empty".into()));
        }
        if !(self.scan.h_scale >= 0.0 && self.scan.h_scale.is_finite()) {
            return Err(HarnessError::Config(format!(
                "h_scale must be non-negative (got {})",
                self.scan.h_scale
            )));
        }
        let c = &m.coupling;
        match (&c.table, c.onsite, c.nn) {
            (Some(_), None, None) | (None, Some(_), _) => {}
            (None, None, Some(_)) => {}
            (None, None, None) => return Err(HarnessError::Config("coupling is empty".into())),
            (Some(_), _, _) => {
                return Err(HarnessError::Config(
                    "coupling table excludes onsite/nn".into(),
                ))
            }
        }
        Ok(())
    }
}

/// Dimension guard: `RPHL_MAX_DIM` if set and smaller, else the core limit.
pub fn dimension_limit() -> Result<usize> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                HarnessError::Config(format!("{MAX_DIM_ENV}={v} is not an integer"))
            })?;
            Ok(n.min(MAX_DIM))
        }
        Err(_) => Ok(MAX_DIM),
    }
}

/// Everything a command needs, built once from a validated configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub lattice: TorusLattice,
    pub coupling: CouplingProfile,
    pub photon: Option<PhotonSector>,
    /// One model per charge, in configuration order.
    pub models: Vec<(f64, ModelConfig)>,
    pub betas: Vec<f64>,
    pub momenta: Vec<Momentum>,
    pub limit: usize,
}

fn coupling_profile(spec: &CouplingSpec, d: usize) -> Result<CouplingProfile> {
    let profile = match (&spec.table, spec.onsite, spec.nn) {
        (Some(table), _, _) => {
            let mut entries = Vec::with_capacity(table.len());
            for e in table {
                if e.dx.len() != d {
                    return Err(HarnessError::Config(format!(
                        "table displacement {:?} does not have {d} components",
                        e.dx
                    )));
                }
                let mut dx = [0i64; 3];
                dx[..d].copy_from_slice(&e.dx);
                entries.push((dx, e.u));
            }
            CouplingProfile::from_table("table".into(), entries)?
        }
        (None, u0, Some(u1)) => CouplingProfile::onsite_nn(d, u0.unwrap_or(0.0), u1)?,
        (None, Some(u0), None) => CouplingProfile::onsite(u0)?,
        (None, None, None) => return Err(HarnessError::Config("coupling is empty".into())),
    };
    Ok(profile)
}

fn photon_sector(spec: &PhotonSpec, max_boson_dim: usize) -> Result<PhotonSector> {
    let modes = match &spec.modes {
        ModesSpec::Auto(_) => ModeSelection::Auto {
            include_zero: spec.include_zero,
        },
        ModesSpec::List(list) => {
            let mut out = Vec::with_capacity(list.len());
            for &[a, b, c, lambda] in list {
                let lambda = u8::try_from(lambda).map_err(|_| {
                    HarnessError::Config(format!("polarization {lambda} not in {{1,2}}"))
                })?;
                out.push(([a, b, c], lambda));
            }
            ModeSelection::Explicit(out)
        }
    };
    let params = SectorParams {
        l_box: spec.l_box,
        kappa: spec.kappa,
        m0: spec.m0,
        n_max: spec.n_max,
        modes,
    };
    Ok(build_sector(&params, max_boson_dim)?)
}

impl Setup {
    /// Resolves `cfg` under the dimension guard `limit`, refusing oversize
    /// spaces before any matrix is allocated.
    pub fn resolve(cfg: &ExperimentConfig, limit: usize) -> Result<Setup> {
        cfg.validate()?;
        let m = &cfg.model;
        let lattice = build_torus(m.d, m.ell)?;
        let n = lattice.n_sites();
        let fermion_dim = u32::try_from(n)
            .ok()
            .and_then(|n| 4usize.checked_pow(n))
            .unwrap_or(usize::MAX);
        if fermion_dim > limit {
            return Err(HarnessError::Guard {
                dim: fermion_dim,
                limit,
            });
        }
        let photon = match &m.photon {
            Some(spec) => Some(photon_sector(spec, limit / fermion_dim)?),
            None => None,
        };
        let space = match &photon {
            Some(p) => Space::SpinfulBoson {
                n_sites: n,
                boson_dim: p.boson_dim(),
            },
            None => Space::Spinful { n_sites: n },
        };
        space.checked_dim(limit)?;

        let coupling = coupling_profile(&m.coupling, m.d)?;
        let models = m
            .e_charge
            .values()
            .into_iter()
            .map(|e| {
                let model =
                    ModelConfig::new(m.t, e, lattice.clone(), coupling.clone(), photon.clone())?;
                Ok((e, model))
            })
            .collect::<Result<Vec<_>>>()?;

        let grid = lattice.momenta();
        let momenta = match &cfg.scan.momenta {
            MomentaSpec::All(_) => grid.points().to_vec(),
            MomentaSpec::List(list) => list
                .iter()
                .map(|label| {
                    if label.len() != m.d {
                        return Err(HarnessError::Config(format!(
                            "momentum label {label:?} does not have {} components",
                            m.d
                        )));
                    }
                    grid.points()
                        .iter()
                        .find(|p| p.integer()[..m.d] == label[..])
                        .copied()
                        .ok_or_else(|| {
                            HarnessError::Config(format!(
                                "momentum label {label:?} is not on the grid"
                            ))
                        })
                })
                .collect::<Result<_>>()?,
        };

        Ok(Setup {
            lattice,
            coupling,
            photon,
            models,
            betas: m.beta.clone(),
            momenta,
            limit,
        })
    }
}
