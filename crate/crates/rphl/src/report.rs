//! Machine-readable run reports. Every `pass` field can be recomputed from
//! the numbers and tolerances stored next to it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_scan: Option<BoundSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domination: Option<DominationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_checks: Option<PhotonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<Refusal>,
    pub pass: bool,
    pub timing: Timing,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub sections: BTreeMap<String, f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub reason: String,
    pub momentum: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn from_check(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn failed(self) -> bool {
        self == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTolerances {
    pub car: f64,
    pub hole_particle: f64,
    /// Relative to `max |H_ij|`.
    pub lemma31: f64,
    pub spectrum: f64,
    pub unitarity: f64,
    pub hermiticity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySection {
    pub tolerances: IdentityTolerances,
    pub car_residual: f64,
    pub hole_particle_residual: f64,
    pub records: Vec<IdentityRecord>,
    pub photon: Status,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub e_charge: f64,
    pub lemma31_residual: f64,
    pub h_max_abs: f64,
    pub spectrum_gap: f64,
    pub hermiticity_residual: f64,
    /// `None` without photons.
    pub unitarity_residual: Option<f64>,
    /// `max |Phi_xy + Phi_yx|`; `None` without photons.
    pub antisymmetry_residual: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSection {
    pub tolerance: f64,
    pub records: Vec<BoundRow>,
    pub half_filling: Vec<HalfFillingRow>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub e_charge: f64,
    pub beta: f64,
    /// Integer label `m` of `p = 2 pi m / ell`.
    pub m: Vec<i64>,
    pub p: Vec<f64>,
    pub chi: f64,
    pub u_hat: f64,
    pub chi_times_u: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfFillingRow {
    pub e_charge: f64,
    pub beta: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationSection {
    pub tolerance: f64,
    pub h_scale: f64,
    pub records: Vec<DominationRecord>,
    pub corollary: Vec<CorollaryRow>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationRecord {
    pub e_charge: f64,
    pub beta: f64,
    pub samples: usize,
    /// Seed of the sample attaining `ratio_max`.
    pub seed: u64,
    pub ratio_max: f64,
    /// `Z(0) / Z(0)`, required to be exactly 1.
    pub ratio_at_zero: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub e_charge: f64,
    pub beta: f64,
    pub samples: usize,
    /// Seed of the sample with the largest `lhs - rhs`.
    pub seed: Option<u64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonSection {
    pub status: Status,
    pub euclidean_tolerance: f64,
    pub modes: Vec<ModeCheck>,
    pub sector: Vec<SectorCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCheck {
    pub beta: f64,
    /// `[n1, n2, n3, lambda]`.
    pub mode: [i64; 4],
    pub omega: f64,
    pub beta_omega: f64,
    pub n_max: usize,
    pub planck_gap: f64,
    pub planck_bound: f64,
    pub planck_pass: bool,
    pub euclidean_gap: f64,
    /// Agreement is only required at `n_max >= 30` and `beta omega >= 1`.
    pub euclidean_status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCheck {
    pub beta: f64,
    pub planck_gap: f64,
    pub planck_bound: f64,
    pub pass: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with timing zeroed, for byte comparisons.
    pub fn without_timing(&self) -> RunReport {
        RunReport {
            timing: Timing::default(),
            ..self.clone()
        }
    }

    /// Per-momentum table as CSV.
    pub fn bound_csv(&self) -> String {
        let mut out = String::from("e_charge,beta,m,p,chi,u_hat,chi_times_u,status\n");
        if let Some(b) = &self.bound_scan {
            for r in &b.records {
                let join = |v: Vec<String>| v.join(" ");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.e_charge,
                    r.beta,
                    join(r.m.iter().map(|x| x.to_string()).collect()),
                    join(r.p.iter().map(|x| x.to_string()).collect()),
                    r.chi,
                    r.u_hat,
                    r.chi_times_u,
                    serde_json::to_value(r.status)
                        .expect("status")
                        .as_str()
                        .unwrap_or("")
                );
            }
        }
        out
    }
}
