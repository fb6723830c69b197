use rayon::prelude::*;
use rphl_core::fock::{
    car_residual, hole_particle_residual, hole_particle_unitary, spinful_ops, FermionBasis,
    OperatorMatrix, HOLE_PARTICLE_TOL,
};
use rphl_core::hamiltonian::{build_total, build_transformed, full_hole_particle, ModelConfig};
use rphl_core::photon::{bond_phase_generator, peierls_phase, UNITARY_TOL};
use rphl_core::spectral::eigvalsh;

use crate::config::Setup;
use crate::error::Result;
use crate::report::{IdentityRecord, IdentitySection, IdentityTolerances, Status};

const TOLERANCES: IdentityTolerances = IdentityTolerances {
    car: 1e-13,
    hole_particle: HOLE_PARTICLE_TOL,
    lemma31: 1e-11,
    spectrum: 1e-10,
    unitarity: UNITARY_TOL,
    hermiticity: 1e-12,
};

/// Peierls phase checks over every bond: `(unitarity, antisymmetry)`.
fn phase_residuals(model: &ModelConfig) -> Result<(f64, f64)> {
    let photon = model.photon.as_ref().expect("caller checked");
    let ops = photon.ops();
    let lat = &model.lattice;
    let id = OperatorMatrix::identity(photon.space());
    let mut unitarity = 0.0f64;
    let mut antisymmetry = 0.0f64;
    for b in lat.bonds() {
        let fwd = bond_phase_generator(photon, &ops, lat, b.from, b.to)?;
        let back = bond_phase_generator(photon, &ops, lat, b.to, b.from)?;
        antisymmetry = antisymmetry.max((&fwd + &back).max_abs());
        let u = peierls_phase(&fwd, model.e_charge, 1.0)?;
        unitarity = unitarity
            .max((&u * &u.adjoint()).distance(&id))
            .max((&u.adjoint() * &u).distance(&id));
    }
    Ok((unitarity, antisymmetry))
}

fn record(model: &ModelConfig) -> Result<IdentityRecord> {
    let h = build_total(model)?;
    let hh = build_transformed(model)?;
    let u = full_hole_particle(model)?;
    let conj = &(&u * &h) * &u.adjoint();
    let lemma31_residual = conj.distance(&hh);
    let h_max_abs = h.max_abs();
    let a = eigvalsh(h.matrix())?;
    let b = eigvalsh(hh.matrix())?;
    let spectrum_gap = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let hermiticity_residual = h.hermiticity_residual().max(hh.hermiticity_residual());
    let (unitarity_residual, antisymmetry_residual) = match &model.photon {
        Some(_) => {
            let (u, a) = phase_residuals(model)?;
            (Some(u), Some(a))
        }
        None => (None, None),
    };
    let pass = lemma31_residual <= TOLERANCES.lemma31 * h_max_abs
        && spectrum_gap <= TOLERANCES.spectrum
        && hermiticity_residual <= TOLERANCES.hermiticity
        && unitarity_residual.is_none_or(|r| r <= TOLERANCES.unitarity)
        && antisymmetry_residual.is_none_or(|r| r == 0.0);
    Ok(IdentityRecord {
        e_charge: model.e_charge,
        lemma31_residual,
        h_max_abs,
        spectrum_gap,
        hermiticity_residual,
        unitarity_residual,
        antisymmetry_residual,
        pass,
    })
}

/// CAR relations, hole-particle relations, the conjugation identity for the
/// transformed Hamiltonian and, with photons, the Peierls phase checks.
pub fn verify_identities(setup: &Setup) -> Result<IdentitySection> {
    let basis = FermionBasis::for_lattice(&setup.lattice)?;
    let ops = spinful_ops(&basis)?;
    let car = car_residual(&ops);
    let u = hole_particle_unitary(&basis, &setup.lattice)?;
    let hp = hole_particle_residual(&u, &ops, &basis, &setup.lattice)?;
    drop(ops);

    let records = setup
        .models
        .par_iter()
        .map(|(_, model)| record(model))
        .collect::<Result<Vec<_>>>()?;
    let pass =
        car <= TOLERANCES.car && hp <= TOLERANCES.hole_particle && records.iter().all(|r| r.pass);
    let photon = match setup.photon {
        None => Status::Skipped,
        Some(_) => Status::from_check(records.iter().all(|r| {
            r.unitarity_residual
                .is_some_and(|u| u <= TOLERANCES.unitarity)
                && r.antisymmetry_residual == Some(0.0)
        })),
    };
    Ok(IdentitySection {
        tolerances: TOLERANCES,
        car_residual: car,
        hole_particle_residual: hp,
        records,
        photon,
        pass,
    })
}
