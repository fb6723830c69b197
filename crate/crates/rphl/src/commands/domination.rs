use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rphl_core::hamiltonian::{build_transformed, ModelConfig, SourceField};
use rphl_core::lattice::check_conditions;
use rphl_core::thermal::{
    diagonalize, verify_corollary, CorollaryRecord, DominationBaseline, BOUND_TOL,
};
use rphl_core::C64;

use crate::config::{ScanSpec, Setup};
use crate::error::{HarnessError, Result};
use crate::report::{CorollaryRow, DominationRecord, DominationSection, Status};

/// Real source field with entries uniform in `[-scale, scale)`.
pub fn real_field(seed: u64, n: usize, scale: f64) -> SourceField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SourceField::real(
        &(0..n)
            .map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0))
            .collect::<Vec<_>>(),
    )
}

/// Complex source field, drawn from a stream disjoint from [`real_field`].
pub fn complex_field(seed: u64, n: usize, scale: f64) -> SourceField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    SourceField(
        (0..n)
            .map(|_| {
                let re = 2.0 * rng.gen::<f64>() - 1.0;
                let im = 2.0 * rng.gen::<f64>() - 1.0;
                C64::new(scale * re, scale * im)
            })
            .collect(),
    )
}

/// Index of the first maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn domination_cell(model: &ModelConfig, beta: f64, scan: &ScanSpec) -> Result<DominationRecord> {
    let n = model.n_sites();
    let base = DominationBaseline::new(model, beta)?;
    let ratio_at_zero = base.ratio(&SourceField::zeros(n))?;
    let ratios = (0..scan.h_samples as u64)
        .into_par_iter()
        .map(|i| base.ratio(&real_field(scan.seed.wrapping_add(i), n, scan.h_scale)))
        .collect::<rphl_core::Result<Vec<_>>>()?;
    let best = argmax(&ratios);
    let ratio_max = ratios[best];
    Ok(DominationRecord {
        e_charge: model.e_charge,
        beta,
        samples: ratios.len(),
        seed: scan.seed.wrapping_add(best as u64),
        ratio_max,
        ratio_at_zero,
        pass: ratio_max <= 1.0 + BOUND_TOL && ratio_at_zero == 1.0,
    })
}

fn corollary_cell(model: &ModelConfig, beta: f64, scan: &ScanSpec) -> Result<CorollaryRow> {
    let n = model.n_sites();
    let lat = &model.lattice;
    let skipped = CorollaryRow {
        e_charge: model.e_charge,
        beta,
        samples: 0,
        seed: None,
        lhs: None,
        rhs: None,
        status: Status::Skipped,
    };
    if scan.corollary_samples == 0 || !check_conditions(&model.coupling, lat).a2_holds {
        return Ok(skipped);
    }
    let state = diagonalize(&build_transformed(model)?, beta)?;
    let recs = (0..scan.corollary_samples as u64)
        .into_par_iter()
        .map(|i| {
            let h = complex_field(scan.seed.wrapping_add(i), n, scan.h_scale);
            verify_corollary(&state, lat, &model.coupling, &h)
        })
        .collect::<rphl_core::Result<Vec<CorollaryRecord>>>()?;
    let excess: Vec<f64> = recs.iter().map(|r| r.lhs - r.rhs).collect();
    let worst = argmax(&excess);
    Ok(CorollaryRow {
        samples: recs.len(),
        seed: Some(scan.seed.wrapping_add(worst as u64)),
        lhs: Some(recs[worst].lhs),
        rhs: Some(recs[worst].rhs),
        status: Status::from_check(recs.iter().all(|r| r.pass)),
        ..skipped
    })
}

/// `Z(h) / Z(0) <= 1` over seeded random real fields, and the Duhamel
/// quadratic-form bound over seeded random complex fields.
pub fn domination(setup: &Setup, scan: &ScanSpec) -> Result<DominationSection> {
    if scan.h_samples == 0 {
        return Err(HarnessError::Config(
            "domination needs h_samples >= 1".into(),
        ));
    }
    let mut records = Vec::new();
    let mut corollary = Vec::new();
    for (_, model) in &setup.models {
        for &beta in &setup.betas {
            records.push(domination_cell(model, beta, scan)?);
            corollary.push(corollary_cell(model, beta, scan)?);
        }
    }
    let pass = records.iter().all(|r| r.pass) && corollary.iter().all(|c| !c.status.failed());
    Ok(DominationSection {
        tolerance: BOUND_TOL,
        h_scale: scan.h_scale,
        records,
        corollary,
        pass,
    })
}
