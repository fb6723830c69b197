use rphl_core::photon::{
    build_sector, euclidean_two_point, planck_partition, ModeSelection, PhotonSector, SectorParams,
};

use crate::config::Setup;
use crate::error::Result;
use crate::report::{ModeCheck, PhotonSection, SectorCheck, Status};

const EUCLIDEAN_TOL: f64 = 1e-8;

/// Sector holding only mode `j` of `sector`.
fn single_mode(sector: &PhotonSector, j: usize) -> Result<PhotonSector> {
    let m = sector.modes()[j];
    Ok(build_sector(
        &SectorParams {
            l_box: sector.l_box(),
            kappa: sector.kappa(),
            m0: sector.m0(),
            n_max: sector.n_max(),
            modes: ModeSelection::Explicit(vec![(m.n, m.lambda)]),
        },
        usize::MAX,
    )?)
}

/// Largest two-point discrepancy over a fixed set of time pairs in `[0, beta]`.
fn euclidean_gap(omega: f64, n_max: usize, beta: f64) -> Result<f64> {
    let pairs = [
        (0.0, 0.0),
        (0.25, 0.0),
        (0.5, 0.0),
        (1.0, 0.0),
        (0.75, 0.25),
        (0.3, 0.9),
    ];
    let mut worst = 0.0f64;
    for (t, s) in pairs {
        let tp = euclidean_two_point(omega, n_max, beta, t * beta, s * beta)?;
        worst = worst.max((tp.trace_side - tp.covariance_side).abs());
    }
    Ok(worst)
}

/// Planck truncation gap against its geometric bound, per mode and for the
/// whole sector, and the single-mode Euclidean two-point agreement.
pub fn photon_checks(setup: &Setup) -> Result<PhotonSection> {
    let Some(sector) = &setup.photon else {
        return Ok(PhotonSection {
            status: Status::Skipped,
            euclidean_tolerance: EUCLIDEAN_TOL,
            modes: Vec::new(),
            sector: Vec::new(),
            pass: true,
        });
    };
    let mut modes = Vec::new();
    let mut whole = Vec::new();
    for &beta in &setup.betas {
        let c = planck_partition(sector, beta);
        whole.push(SectorCheck {
            beta,
            planck_gap: c.relative_gap,
            planck_bound: c.bound,
            pass: c.within_bound(),
        });
        for (j, m) in sector.modes().iter().enumerate() {
            let single = single_mode(sector, j)?;
            let c = planck_partition(&single, beta);
            let gap = euclidean_gap(m.omega, sector.n_max(), beta)?;
            let required = sector.n_max() >= 30 && beta * m.omega >= 1.0;
            modes.push(ModeCheck {
                beta,
                mode: [m.n[0], m.n[1], m.n[2], m.lambda as i64],
                omega: m.omega,
                beta_omega: beta * m.omega,
                n_max: sector.n_max(),
                planck_gap: c.relative_gap,
                planck_bound: c.bound,
                planck_pass: c.within_bound(),
                euclidean_gap: gap,
                euclidean_status: if required {
                    Status::from_check(gap <= EUCLIDEAN_TOL)
                } else {
                    Status::Skipped
                },
            });
        }
    }
    let pass = whole.iter().all(|w| w.pass)
        && modes
            .iter()
            .all(|m| m.planck_pass && !m.euclidean_status.failed());
    Ok(PhotonSection {
        status: Status::from_check(pass),
        euclidean_tolerance: EUCLIDEAN_TOL,
        modes,
        sector: whole,
        pass,
    })
}
