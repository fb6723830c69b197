//! Canonical anticommutation relations, spin tensor identification and the
//! hole-particle relations, checked exhaustively on small bases.

use proptest::prelude::*;
use rphl_core::fock::{
    hole_particle_residual, hole_particle_unitary, spinful_ops, FermionBasis, OperatorMatrix,
};
use rphl_core::lattice::build_torus;
use rphl_core::C64;

const CAR_TOL: f64 = 1e-13;

#[test]
fn spinless_car_exhaustive() {
    for n in 1..=4 {
        let b = FermionBasis::new(n).unwrap();
        let id = OperatorMatrix::identity(b.space());
        let c: Vec<_> = (0..n).map(|x| b.annihilator(x).unwrap()).collect();
        for x in 0..n {
            for y in 0..n {
                let mixed = c[x].anticommutator(&c[y].adjoint());
                let expect = if x == y {
                    id.clone()
                } else {
                    OperatorMatrix::zeros(b.space())
                };
                assert!(
                    mixed.distance(&expect) <= CAR_TOL,
                    "{{c_{x}, c_{y}^+}} n={n}"
                );
                assert!(c[x].anticommutator(&c[y]).max_abs() <= CAR_TOL);
                assert!(c[x].adjoint().anticommutator(&c[y].adjoint()).max_abs() <= CAR_TOL);
            }
        }
    }
}

/// Column action of a ladder operator: each basis state maps to at most one
/// basis state.
fn column_action(op: &OperatorMatrix) -> Vec<Option<(usize, C64)>> {
    let m = op.matrix();
    (0..op.dim())
        .map(|j| {
            let hits: Vec<_> = (0..op.dim())
                .filter(|&i| m[(i, j)] != C64::new(0.0, 0.0))
                .collect();
            assert!(
                hits.len() <= 1,
                "ladder operator with two entries in column {j}"
            );
            hits.first().map(|&i| (i, m[(i, j)]))
        })
        .collect()
}

fn compose(
    a: &[Option<(usize, C64)>],
    b: &[Option<(usize, C64)>],
    j: usize,
) -> Option<(usize, C64)> {
    let (k, bv) = b[j]?;
    let (i, av) = a[k]?;
    Some((i, av * bv))
}

/// Largest entrywise deviation of {a, b} from delta * identity.
fn anticomm_deviation(a: &[Option<(usize, C64)>], b: &[Option<(usize, C64)>], delta: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.len() {
        let mut col: Vec<(usize, C64)> = Vec::new();
        for term in [compose(a, b, j), compose(b, a, j)].into_iter().flatten() {
            match col.iter_mut().find(|(i, _)| *i == term.0) {
                Some(e) => e.1 += term.1,
                None => col.push(term),
            }
        }
        let mut diag = C64::new(0.0, 0.0);
        for (i, v) in col {
            if i == j {
                diag = v;
            } else {
                worst = worst.max(v.norm());
            }
        }
        worst = worst.max((diag - delta).norm());
    }
    worst
}

#[test]
fn spinful_car_exhaustive() {
    for n in 1..=4 {
        let b = FermionBasis::new(n).unwrap();
        let ops = spinful_ops(&b).unwrap();
        let all: Vec<(usize, usize, Vec<_>, Vec<_>)> = (0..n)
            .flat_map(|x| [(x, 0, &ops.c_up[x]), (x, 1, &ops.c_dn[x])])
            .map(|(x, s, c)| (x, s, column_action(c), column_action(&c.adjoint())))
            .collect();
        for (x, s, a, _) in &all {
            for (y, t, c, cd) in &all {
                let delta = if x == y && s == t { 1.0 } else { 0.0 };
                assert!(
                    anticomm_deviation(a, cd, delta) <= CAR_TOL,
                    "n={n} ({x},{s}) ({y},{t})"
                );
                assert!(anticomm_deviation(a, c, 0.0) <= CAR_TOL);
            }
        }
    }
}

#[test]
fn spinful_car_dense_products() {
    let b = FermionBasis::new(2).unwrap();
    let ops = spinful_ops(&b).unwrap();
    let id = OperatorMatrix::identity(b.spinful_space());
    for x in 0..2 {
        for y in 0..2 {
            let expect = if x == y {
                id.clone()
            } else {
                OperatorMatrix::zeros(b.spinful_space())
            };
            assert!(
                ops.c_up[x]
                    .anticommutator(&ops.c_up[y].adjoint())
                    .distance(&expect)
                    <= CAR_TOL
            );
            assert!(
                ops.c_dn[x]
                    .anticommutator(&ops.c_dn[y].adjoint())
                    .distance(&expect)
                    <= CAR_TOL
            );
            assert!(ops.c_up[x].anticommutator(&ops.c_dn[y].adjoint()).max_abs() <= CAR_TOL);
        }
    }
}

#[test]
fn total_number_has_integer_spectrum() {
    for n in 1..=4 {
        let b = FermionBasis::new(n).unwrap();
        let ops = spinful_ops(&b).unwrap();
        let mut total = OperatorMatrix::zeros(b.spinful_space());
        for x in 0..n {
            total = &total + &ops.n(x);
        }
        // Diagonal in the occupation basis.
        let offdiag: f64 = (0..total.dim())
            .flat_map(|i| (0..total.dim()).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| total.matrix()[(i, j)].norm())
            .fold(0.0, f64::max);
        assert_eq!(offdiag, 0.0);
        let mut vals: Vec<i64> = total.diag().iter().map(|z| z.re.round() as i64).collect();
        vals.sort_unstable();
        vals.dedup();
        assert_eq!(vals, (0..=2 * n as i64).collect::<Vec<_>>());
    }
}

#[test]
fn hole_particle_relations_on_all_small_tori() {
    for (d, ell) in [(1, 2), (1, 4), (2, 2)] {
        let lat = build_torus(d, ell).unwrap();
        let b = FermionBasis::for_lattice(&lat).unwrap();
        let u = hole_particle_unitary(&b, &lat).unwrap();
        let ops = spinful_ops(&b).unwrap();
        let r = hole_particle_residual(&u, &ops, &b, &lat).unwrap();
        assert!(r <= 1e-12, "d={d} ell={ell} residual {r:e}");
        let id = OperatorMatrix::identity(b.spinful_space());
        assert!((&u * &u.adjoint()).distance(&id) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // c_x^dagger c_y built from bitmasks agrees with the matrix product for
    // arbitrary basis states.
    #[test]
    fn hop_action_matches_operator_product(n in 1usize..=4, x in 0usize..4, y in 0usize..4, mask in 0usize..16) {
        prop_assume!(x < n && y < n && mask < (1 << n));
        let b = FermionBasis::new(n).unwrap();
        let prod = &b.creator(x).unwrap() * &b.annihilator(y).unwrap();
        let direct = b.hop(x, y).unwrap();
        for row in 0..b.dim() {
            prop_assert_eq!(prod.matrix()[(row, mask)], direct.matrix()[(row, mask)]);
        }
    }
}

#[test]
fn library_car_residual_agrees() {
    for n in 1..=4 {
        let b = FermionBasis::new(n).unwrap();
        let ops = spinful_ops(&b).unwrap();
        assert!(rphl_core::fock::car_residual(&ops) <= CAR_TOL);
    }
    // swapping the string operator breaks the down-spin relations
    let b = FermionBasis::new(2).unwrap();
    let mut ops = spinful_ops(&b).unwrap();
    let id = OperatorMatrix::identity(b.space());
    ops.c_dn[0] = id.kron(&b.annihilator(0).unwrap()).unwrap();
    assert!(rphl_core::fock::car_residual(&ops) > 1.0);
}
