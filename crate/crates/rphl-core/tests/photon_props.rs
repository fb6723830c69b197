use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rphl_core::fock::OperatorMatrix;
use rphl_core::lattice::build_torus;
use rphl_core::photon::{
    bond_phase_generator, build_sector, euclidean_two_point, free_field_energy, path_factor,
    peierls_phase, planck_partition, segment_coefficients, ModeSelection, PhotonSector,
    SectorParams,
};

fn sector(modes: Vec<([i64; 3], u8)>, l_box: usize, n_max: usize) -> PhotonSector {
    build_sector(
        &SectorParams {
            l_box,
            kappa: 2.0 * PI,
            m0: 1.0,
            n_max,
            modes: ModeSelection::Explicit(modes),
        },
        usize::MAX,
    )
    .unwrap()
}

#[test]
fn planck_gap_within_bound() {
    // one mode of frequency pi (L = 2, n = (0, 1, 0)), beta chosen so beta * omega hits the grid
    let omega = PI;
    for bw in [0.5, 1.0, 2.0] {
        for n_max in [2usize, 8, 30] {
            let s = sector(vec![([0, 1, 0], 1)], 2, n_max);
            let c = planck_partition(&s, bw / omega);
            assert!(c.within_bound(), "bw={bw} n_max={n_max}: {c:?}");
            let q = (-bw).exp();
            let truncated: f64 = (0..=n_max).map(|n| q.powi(n as i32)).sum();
            assert!((c.truncated - truncated).abs() < 1e-12 * truncated);
            assert!((c.closed_form - 1.0 / (1.0 - q)).abs() < 1e-12 * c.closed_form);
        }
    }
}

#[test]
fn planck_product_over_two_modes() {
    let s = sector(vec![([0, 0, 0], 1), ([1, 0, 0], 2)], 2, 6);
    let beta = 0.8;
    let c = planck_partition(&s, beta);
    assert!(c.within_bound());
    let expect = 1.0 / ((1.0 - (-beta * 1.0f64).exp()) * (1.0 - (-beta * PI).exp()));
    assert!((c.closed_form - expect).abs() < 1e-12 * expect);
}

#[test]
fn euclidean_two_point_converges() {
    let beta = 2.0;
    for omega in [0.25, 1.0, 3.0] {
        let bw = beta * omega;
        if bw < 1.0 {
            continue;
        }
        for (t, s) in [(0.0, 0.0), (0.3, 1.1), (2.0, 0.0), (1.7, 0.2)] {
            let tp = euclidean_two_point(omega, 30, beta, t, s).unwrap();
            assert!(
                (tp.trace_side - tp.covariance_side).abs() < 1e-8,
                "omega={omega} t={t} s={s}: {tp:?}"
            );
        }
    }
    assert!(euclidean_two_point(1.0, 30, 1.0, 1.5, 0.0).is_err());
}

#[test]
fn free_energy_is_diagonal_in_occupations() {
    let s = sector(vec![([0, 0, 0], 1), ([0, 1, 0], 1)], 2, 3);
    let hf = free_field_energy(&s);
    let ops = s.ops();
    let direct = &ops.number(0).scale_re(1.0) + &ops.number(1).scale_re(PI);
    assert!(hf.distance(&direct) < 1e-13);
}

#[test]
fn ccr_below_truncation() {
    let s = sector(vec![([0, 1, 0], 1), ([1, 0, 0], 2)], 2, 4);
    let ops = s.ops();
    let id = OperatorMatrix::identity(s.space());
    for i in 0..2 {
        for j in 0..2 {
            let c = ops.a[i].commutator(&ops.a_dagger(j));
            let expect = if i == j {
                id.clone()
            } else {
                OperatorMatrix::zeros(s.space())
            };
            // [a, a^+] = 1 fails only on states with n_i = n_max
            for st in 0..s.boson_dim() {
                if s.occupation(st, i) == s.n_max() {
                    continue;
                }
                for row in 0..s.boson_dim() {
                    let diff = c.matrix()[(row, st)] - expect.matrix()[(row, st)];
                    assert!(diff.norm() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn phase_generator_matches_hand_formula() {
    // single mode k = (0, pi, 0), polarization along x; bond along x of the
    // ell = 2 ring: k.x = 0 and k.d = 0, so g = (2 omega |V|)^{-1/2}
    let s = sector(vec![([0, 1, 0], 1)], 2, 5);
    let lat = build_torus(1, 2).unwrap();
    let ops = s.ops();
    let phi = bond_phase_generator(&s, &ops, &lat, 0, 1).unwrap();
    let g = 1.0 / (2.0 * PI * 8.0f64).sqrt();
    let expect = (&ops.a[0] + &ops.a_dagger(0)).scale_re(g);
    assert!(phi.distance(&expect) < 1e-15);
}

#[test]
fn reversed_curve_negates_generator() {
    let s = sector(vec![([1, 0, 0], 1), ([1, 1, 0], 2), ([0, 0, 0], 1)], 2, 2);
    let lat = build_torus(2, 4).unwrap();
    let ops = s.ops();
    for b in lat.bonds() {
        let fwd = bond_phase_generator(&s, &ops, &lat, b.from, b.to).unwrap();
        let back = bond_phase_generator(&s, &ops, &lat, b.to, b.from).unwrap();
        assert_eq!((&fwd + &back).max_abs(), 0.0);

        // the same segment traversed from its far end
        let start = lat.position(b.from);
        let d = b.displacement();
        let end = [start[0] + d[0], start[1] + d[1], start[2] + d[2]];
        let rev = segment_coefficients(&s, end, [-d[0], -d[1], -d[2]]);
        let fwd_g = segment_coefficients(&s, start, d);
        for (r, f) in rev.iter().zip(&fwd_g) {
            assert!((r + f).norm() < 1e-14, "{r} vs {f}");
        }
    }
    assert!(bond_phase_generator(&s, &ops, &lat, 0, 5).is_err());
}

#[test]
fn peierls_phases_are_unitary() {
    let s = sector(vec![([0, 1, 0], 1), ([1, 0, 0], 2)], 2, 4);
    let lat = build_torus(2, 2).unwrap();
    let ops = s.ops();
    let id = OperatorMatrix::identity(s.space());
    for e in [0.3, 1.0, 5.0] {
        for b in lat.bonds() {
            let phi = bond_phase_generator(&s, &ops, &lat, b.from, b.to).unwrap();
            let u = peierls_phase(&phi, e, 1.0).unwrap();
            assert!((&u * &u.adjoint()).distance(&id) < 1e-12);
            assert!((&u.adjoint() * &u).distance(&id) < 1e-12);
            // inverse phase is the opposite sign
            let v = peierls_phase(&phi, e, -1.0).unwrap();
            assert!(v.distance(&u.adjoint()) < 1e-12);
            let sv = rphl_core::spectral::eigvalsh(&(&u.adjoint() * &u).into_matrix()).unwrap();
            assert!(sv.iter().all(|l| (l.sqrt() - 1.0).abs() < 1e-12));
        }
    }
    assert_eq!(peierls_phase(&id, 0.0, 1.0).unwrap(), id);
}

#[test]
fn path_factor_limits() {
    assert_eq!(path_factor(0.0), C64::new(1.0, 0.0));
    for u in [1e-9, 1e-7, 0.3, PI, -2.0] {
        // sin(u)/u + i 2 sin^2(u/2)/u has no cancellation
        let direct = C64::new(u.sin() / u, 2.0 * (u / 2.0).sin().powi(2) / u);
        assert!((path_factor(u) - direct).norm() < 1e-14);
    }
    // |phi(u)| = |sin(u/2) / (u/2)|
    let u = 1.3f64;
    assert!((path_factor(u).norm() - (u / 2.0).sin() / (u / 2.0)).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn peierls_unitary_for_random_charge(e in -6.0f64..6.0, n_max in 1usize..6) {
        let s = sector(vec![([0, 1, 0], 1), ([1, 1, 0], 2)], 2, n_max);
        let lat = build_torus(1, 4).unwrap();
        let ops = s.ops();
        let id = OperatorMatrix::identity(s.space());
        for b in lat.bonds() {
            let phi = bond_phase_generator(&s, &ops, &lat, b.from, b.to).unwrap();
            prop_assert!(phi.hermiticity_residual() < 1e-15);
            let u = peierls_phase(&phi, e, 1.0).unwrap();
            prop_assert!((&u * &u.adjoint()).distance(&id) < 1e-12);
        }
    }
}
