use rayon::prelude::*;
use rphl_core::hamiltonian::{build_total, ModelConfig};
use rphl_core::lattice::{check_conditions, coupling_fourier, NONNEG_TOL};
use rphl_core::thermal::{diagonalize, site_diagonal, susceptibility, ThermalState, BOUND_TOL};
use rphl_core::C64;

use crate::config::Setup;
use crate::error::{HarnessError, Result};
use crate::report::{BoundRow, BoundSection, HalfFillingRow, Status};

/// `max_x |<n_x> - 1|`.
fn half_filling_deviation(state: &ThermalState, model: &ModelConfig) -> Result<f64> {
    let lat = &model.lattice;
    let mut worst = 0.0f64;
    for x in 0..lat.n_sites() {
        let n = site_diagonal(lat, state.space(), |up, dn| {
            C64::new((((up >> x) & 1) + ((dn >> x) & 1)) as f64, 0.0)
        })?;
        worst = worst.max((state.thermal_average(&n)? - 1.0).norm());
    }
    Ok(worst)
}

fn cell(setup: &Setup, model: &ModelConfig, beta: f64) -> Result<(Vec<BoundRow>, HalfFillingRow)> {
    let lat = &setup.lattice;
    let state = diagonalize(&build_total(model)?, beta)?;
    let rows = setup
        .momenta
        .iter()
        .map(|p| {
            let chi = susceptibility(&state, lat, p)?;
            let u_hat = coupling_fourier(&setup.coupling, lat, p)?;
            let chi_times_u = chi * u_hat;
            let status = if u_hat <= NONNEG_TOL {
                Status::Skipped
            } else {
                Status::from_check(chi_times_u <= 1.0 + BOUND_TOL)
            };
            Ok(BoundRow {
                e_charge: model.e_charge,
                beta,
                m: p.integer()[..lat.dim()].to_vec(),
                p: p.vector(lat.dim()),
                chi,
                u_hat,
                chi_times_u,
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // photon coupling adds exponentiation round-off to the filling
    let tolerance = if model.photon.is_some() { 1e-9 } else { 1e-10 };
    let max_deviation = half_filling_deviation(&state, model)?;
    let filling = HalfFillingRow {
        e_charge: model.e_charge,
        beta,
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
    };
    Ok((rows, filling))
}

/// `chi(p) U_hat(p) <= 1` for every charge, temperature and selected momentum.
/// Refuses couplings whose lattice transform is negative somewhere.
pub fn bound_scan(setup: &Setup) -> Result<BoundSection> {
    let cond = check_conditions(&setup.coupling, &setup.lattice);
    if !cond.a2_holds {
        let d = setup.lattice.dim();
        let p = cond.argmin.vector(d);
        return Err(HarnessError::Refusal {
            reason: format!(
                "condition (A.2) fails: U_hat(p) = {:e} < 0 at p = {p:?} (label {:?})",
                cond.min_fourier,
                &cond.argmin.integer()[..d]
            ),
            momentum: cond.argmin.integer()[..d].to_vec(),
            value: cond.min_fourier,
        });
    }
    let cells: Vec<(&ModelConfig, f64)> = setup
        .models
        .iter()
        .flat_map(|(_, m)| setup.betas.iter().map(move |&b| (m, b)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(m, b)| cell(setup, m, b))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut half_filling = Vec::new();
    for (rows, filling) in results {
        records.extend(rows);
        half_filling.push(filling);
    }
    let pass = records.iter().all(|r| !r.status.failed()) && half_filling.iter().all(|h| h.pass);
    Ok(BoundSection {
        tolerance: BOUND_TOL,
        records,
        half_filling,
        pass,
    })
}
