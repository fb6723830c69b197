//! Hamiltonian assembly.
//!
//! Spinful basis index is `up_mask * 2^n + down_mask`; with photons the full
//! index is `fermion_index * boson_dim + boson_index`. Every directed hop
//! `c_x^dagger c_y` is emitted from the unordered bond list, once per
//! direction, and carries `exp(+i e Phi_xy)` in `H` (`exp(-i e Phi_xy)` for the
//! spin-up hops of the transformed Hamiltonian).

use alloc::format;
use alloc::vec::Vec;

use crate::fock::{apply_hop, guard, hole_particle_unitary, FermionBasis, OperatorMatrix, Space};
use crate::lattice::{CouplingProfile, TorusLattice};
use crate::photon::{bond_phase_generator, free_field_energy, peierls_phase, PhotonSector};
use crate::{Error, Matrix, Result, C64};

/// Model parameters shared by every Hamiltonian built here.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Hopping amplitude; `t = 0` gives the atomic limit.
    pub t: f64,
    /// Electron charge `e` in the Peierls phases.
    pub e_charge: f64,
    pub lattice: TorusLattice,
    pub coupling: CouplingProfile,
    pub photon: Option<PhotonSector>,
}

impl ModelConfig {
    pub fn new(
        t: f64,
        e_charge: f64,
        lattice: TorusLattice,
        coupling: CouplingProfile,
        photon: Option<PhotonSector>,
    ) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hopping t must be non-negative (got {t})"
            )));
        }
        if !e_charge.is_finite() {
            return Err(Error::InvalidParameter("charge must be finite".into()));
        }
        coupling.check_fits(&lattice)?;
        let cfg = ModelConfig {
            t,
            e_charge,
            lattice,
            coupling,
            photon,
        };
        guard(cfg.space())?;
        Ok(cfg)
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn basis(&self) -> FermionBasis {
        FermionBasis::new(self.n_sites()).expect("guarded at construction")
    }

    pub fn boson_dim(&self) -> usize {
        self.photon.as_ref().map_or(1, |p| p.boson_dim())
    }

    /// Space of the full Hamiltonian.
    pub fn space(&self) -> Space {
        let n_sites = self.n_sites();
        match &self.photon {
            Some(p) => Space::SpinfulBoson {
                n_sites,
                boson_dim: p.boson_dim(),
            },
            None => Space::Spinful { n_sites },
        }
    }

    /// Same model with a different charge.
    pub fn with_charge(&self, e_charge: f64) -> Self {
        ModelConfig {
            e_charge,
            ..self.clone()
        }
    }

    /// Same electrons, photons removed.
    pub fn without_photon(&self) -> Self {
        ModelConfig {
            photon: None,
            ..self.clone()
        }
    }
}

/// Source field `h`, one entry per site.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField(pub Vec<C64>);

impl SourceField {
    pub fn real(h: &[f64]) -> Self {
        SourceField(h.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        SourceField(alloc::vec![C64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }
}

fn bit(mask: usize, x: usize) -> f64 {
    ((mask >> x) & 1) as f64
}

/// Occupations `(n_up, n_dn)` of every site for a spinful index.
fn occupations(index: usize, n_sites: usize) -> (usize, usize) {
    (index >> n_sites, index & ((1 << n_sites) - 1))
}

/// Diagonal spinful operator `f(up_mask, dn_mask)`.
fn spinful_diagonal(n_sites: usize, f: impl Fn(usize, usize) -> f64) -> OperatorMatrix {
    let space = Space::Spinful { n_sites };
    OperatorMatrix::diagonal(
        space,
        (0..space.dim()).map(|i| {
            let (up, dn) = occupations(i, n_sites);
            C64::new(f(up, dn), 0.0)
        }),
    )
    .expect("dimension matches")
}

/// `1/2 sum_{x,y} U(x - y) a_x a_y` for per-site amplitudes `a`.
fn quadratic_form(umat: &[f64], a: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for x in 0..n {
        for y in 0..n {
            acc += umat[x * n + y] * a[x] * a[y];
        }
    }
    0.5 * acc
}

/// `1/2 sum U(x - y) (n_x - 1)(n_y - 1)` on the spinful space.
pub fn build_coulomb(lat: &TorusLattice, coupling: &CouplingProfile) -> OperatorMatrix {
    let n = lat.n_sites();
    let umat = coupling.interaction_matrix(lat);
    spinful_diagonal(n, |up, dn| {
        let a: Vec<f64> = (0..n).map(|x| bit(up, x) + bit(dn, x) - 1.0).collect();
        quadratic_form(&umat, &a)
    })
}

/// `1/2 sum U(x - y) (q_x - h_x)(q_y - h_y)` with `q_x = n_{x,up} - n_{x,dn}`.
pub fn build_transformed_coulomb(
    lat: &TorusLattice,
    coupling: &CouplingProfile,
    h: &[f64],
) -> Result<OperatorMatrix> {
    let n = lat.n_sites();
    if h.len() != n {
        return Err(Error::InvalidParameter(format!(
            "source field has {} entries for {n} sites",
            h.len()
        )));
    }
    let umat = coupling.interaction_matrix(lat);
    Ok(spinful_diagonal(n, |up, dn| {
        let a: Vec<f64> = (0..n).map(|x| bit(up, x) - bit(dn, x) - h[x]).collect();
        quadratic_form(&umat, &a)
    }))
}

/// `q_x = n_x (x) 1 - 1 (x) n_x` on the spinful space.
pub fn charge_imbalance(lat: &TorusLattice, x: usize) -> OperatorMatrix {
    spinful_diagonal(lat.n_sites(), |up, dn| bit(up, x) - bit(dn, x))
}

/// Extends a spinful operator by the boson identity when photons are present.
pub fn lift(op: &OperatorMatrix, photon: Option<&PhotonSector>) -> Result<OperatorMatrix> {
    match photon {
        Some(p) => op.kron(&OperatorMatrix::identity(p.space())),
        None => Ok(op.clone()),
    }
}

/// `1 (x) H_f` on the full space.
fn photon_energy(model: &ModelConfig, photon: &PhotonSector) -> Result<OperatorMatrix> {
    let id = OperatorMatrix::identity(model.basis().spinful_space());
    id.kron(&free_field_energy(photon))
}

/// Which Peierls sign each spin species carries.
#[derive(Debug, Clone, Copy)]
struct HopSigns {
    up: f64,
    dn: f64,
}

/// `-t sum_{x~y, sigma} c_{x sigma}^dagger c_{y sigma} (x) exp(i s_sigma e Phi_xy)`.
fn hopping(model: &ModelConfig, signs: HopSigns) -> Result<OperatorMatrix> {
    let space = model.space();
    let n = model.n_sites();
    let nf = 1usize << n;
    let bd = model.boson_dim();
    let dim = guard(space)?;
    let lat = &model.lattice;

    // exp(+i e Phi_{from,to}) per bond; the reverse hop uses its adjoint.
    let phases: Vec<Option<Matrix>> = match &model.photon {
        Some(p) if model.e_charge != 0.0 => {
            let ops = p.ops();
            lat.bonds()
                .iter()
                .map(|b| {
                    let phi = bond_phase_generator(p, &ops, lat, b.from, b.to)?;
                    Ok(Some(
                        peierls_phase(&phi, model.e_charge, 1.0)?.into_matrix(),
                    ))
                })
                .collect::<Result<_>>()?
        }
        _ => lat.bonds().iter().map(|_| None).collect(),
    };

    let mut m = Matrix::zeros(dim, dim);
    let t = C64::new(-model.t, 0.0);
    for (bond, phase) in lat.bonds().iter().zip(&phases) {
        let plus = phase.as_ref();
        let minus = plus.map(|p| p.adjoint());
        for (x, y, forward) in [(bond.from, bond.to, true), (bond.to, bond.from, false)] {
            for (spin_up, sign) in [(true, signs.up), (false, signs.dn)] {
                // Phase on x -> y is exp(i sign e Phi_xy); Phi_yx = -Phi_xy.
                let use_plus = forward == (sign > 0.0);
                let boson = if use_plus { plus } else { minus.as_ref() };
                for col in 0..(nf * nf) {
                    let (up, dn) = occupations(col, n);
                    let hopped = if spin_up {
                        apply_hop(up, x, y).map(|(u, s)| ((u << n) | dn, s))
                    } else {
                        apply_hop(dn, x, y).map(|(d, s)| ((up << n) | d, s))
                    };
                    let Some((row, s)) = hopped else { continue };
                    let coeff = t * s;
                    match boson {
                        Some(b) => {
                            for i in 0..bd {
                                for j in 0..bd {
                                    m[(row * bd + i, col * bd + j)] += coeff * b[(i, j)];
                                }
                            }
                        }
                        None => {
                            for i in 0..bd {
                                m[(row * bd + i, col * bd + i)] += coeff;
                            }
                        }
                    }
                }
            }
        }
    }
    OperatorMatrix::new(space, m)
}

/// Pure Hubbard Hamiltonian: nearest-neighbour hopping plus the two-body
/// term of the coupling profile. Photons in `model` are ignored.
pub fn build_hubbard(model: &ModelConfig) -> Result<OperatorMatrix> {
    let electrons = model.without_photon();
    let hop = hopping(&electrons, HopSigns { up: 1.0, dn: 1.0 })?;
    Ok(&hop + &build_coulomb(&model.lattice, &model.coupling))
}

/// `H_{e-p} = -T_{+e, up} - T_{+e, down}`.
pub fn build_electron_photon(model: &ModelConfig) -> Result<OperatorMatrix> {
    if model.photon.is_none() {
        return Err(Error::InvalidParameter(
            "electron-photon term needs a photon sector".into(),
        ));
    }
    hopping(model, HopSigns { up: 1.0, dn: 1.0 })
}

/// `H = H_{e-p} + H_{e-e} (x) 1 + 1 (x) H_f`, or the Hubbard model without photons.
pub fn build_total(model: &ModelConfig) -> Result<OperatorMatrix> {
    match &model.photon {
        None => build_hubbard(model),
        Some(p) => {
            let hep = build_electron_photon(model)?;
            let hee = lift(&build_coulomb(&model.lattice, &model.coupling), Some(p))?;
            Ok(&(&hep + &hee) + &photon_energy(model, p)?)
        }
    }
}

fn transformed_with(model: &ModelConfig, h: &[f64]) -> Result<OperatorMatrix> {
    let hep = hopping(model, HopSigns { up: -1.0, dn: 1.0 })?;
    let hee = build_transformed_coulomb(&model.lattice, &model.coupling, h)?;
    let hee = lift(&hee, model.photon.as_ref())?;
    let mut out = &hep + &hee;
    if let Some(p) = &model.photon {
        out = &out + &photon_energy(model, p)?;
    }
    Ok(out)
}

/// Hole-particle transformed Hamiltonian assembled directly:
/// `-T_{-e, up} - T_{+e, down} + 1/2 sum U q_x q_y (+ H_f)`.
pub fn build_transformed(model: &ModelConfig) -> Result<OperatorMatrix> {
    transformed_with(model, &alloc::vec![0.0; model.n_sites()])
}

/// Transformed Hamiltonian with the source-deformed two-body term.
/// Only real fields are accepted.
pub fn build_deformed(model: &ModelConfig, h: &SourceField) -> Result<OperatorMatrix> {
    if !h.is_real() {
        return Err(Error::InvalidParameter(
            "deformed Hamiltonian needs a real source field".into(),
        ));
    }
    let re: Vec<f64> = h.values().iter().map(|z| z.re).collect();
    transformed_with(model, &re)
}

/// Hole-particle unitary extended to the full space of `model`.
pub fn full_hole_particle(model: &ModelConfig) -> Result<OperatorMatrix> {
    let u = hole_particle_unitary(&model.basis(), &model.lattice)?;
    lift(&u, model.photon.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;
    use crate::photon::{build_sector, ModeSelection, SectorParams};
    use crate::spectral::eigvalsh;

    fn hubbard(ell: usize, t: f64, u0: f64) -> ModelConfig {
        let lat = build_torus(1, ell).unwrap();
        ModelConfig::new(t, 0.0, lat, CouplingProfile::onsite(u0).unwrap(), None).unwrap()
    }

    fn with_photon(e: f64) -> ModelConfig {
        let lat = build_torus(1, 2).unwrap();
        let p = build_sector(
            &SectorParams {
                l_box: 2,
                kappa: 4.0,
                m0: 1.0,
                n_max: 3,
                modes: ModeSelection::Explicit(alloc::vec![([0, 1, 0], 1)]),
            },
            usize::MAX,
        )
        .unwrap();
        let u = CouplingProfile::onsite_nn(1, 2.0, 1.0).unwrap();
        ModelConfig::new(1.0, e, lat, u, Some(p)).unwrap()
    }

    #[test]
    fn rejects_negative_hopping() {
        let lat = build_torus(1, 2).unwrap();
        let u = CouplingProfile::onsite(1.0).unwrap();
        assert!(ModelConfig::new(0.0, 0.0, lat.clone(), u.clone(), None).is_ok());
        assert!(ModelConfig::new(-1.0, 0.0, lat.clone(), u.clone(), None).is_err());
        assert!(ModelConfig::new(f64::NAN, 0.0, lat, u, None).is_err());
    }

    #[test]
    fn two_site_free_spectrum() {
        let h = build_hubbard(&hubbard(2, 1.0, 0.0)).unwrap();
        let e = eigvalsh(h.matrix()).unwrap();
        assert!((e[0] + 2.0).abs() < 1e-12);
        assert!((e[e.len() - 1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn atomic_limit_is_diagonal() {
        let model = hubbard(4, 1.0, 3.0);
        let h = build_coulomb(&model.lattice, &model.coupling);
        let n = model.n_sites();
        for (i, z) in h.diag().iter().enumerate() {
            let (up, dn) = occupations(i, n);
            let expect: f64 = (0..n)
                .map(|x| {
                    let d = bit(up, x) + bit(dn, x) - 1.0;
                    1.5 * d * d
                })
                .sum();
            assert!((z.re - expect).abs() < 1e-14);
        }
        assert!(h.hermiticity_residual() == 0.0);
    }

    #[test]
    fn fully_occupied_coulomb_energy() {
        let lat = build_torus(1, 4).unwrap();
        let u = CouplingProfile::onsite_nn(1, 2.0, 0.6).unwrap();
        let h = build_coulomb(&lat, &u);
        let full = h.dim() - 1;
        let umat = u.interaction_matrix(&lat);
        let expect: f64 = 0.5 * umat.iter().sum::<f64>();
        assert!((h.diag()[full].re - expect).abs() < 1e-14);
    }

    #[test]
    fn half_filled_neel_state_has_zero_onsite_energy() {
        let model = hubbard(4, 1.0, 5.0);
        let h = build_coulomb(&model.lattice, &model.coupling);
        // up on sites 0, 2; down on 1, 3
        let idx = (0b0101 << 4) | 0b1010;
        assert_eq!(h.diag()[idx].re, 0.0);
    }

    #[test]
    fn hubbard_conserves_spin_numbers() {
        let model = hubbard(4, 1.0, 2.0);
        let h = build_hubbard(&model).unwrap();
        let n = model.n_sites();
        let n_up = spinful_diagonal(n, |up, _| up.count_ones() as f64);
        let n_dn = spinful_diagonal(n, |_, dn| dn.count_ones() as f64);
        assert!(h.commutator(&n_up).max_abs() < 1e-13);
        assert!(h.commutator(&n_dn).max_abs() < 1e-13);
    }

    #[test]
    fn zero_charge_reduces_to_tensor_product() {
        let model = with_photon(0.0);
        let hep = build_electron_photon(&model).unwrap();
        let hop = hopping(&model.without_photon(), HopSigns { up: 1.0, dn: 1.0 }).unwrap();
        let expect = lift(&hop, model.photon.as_ref()).unwrap();
        assert_eq!(hep.distance(&expect), 0.0);
    }

    #[test]
    fn every_hamiltonian_is_hermitian() {
        let model = with_photon(0.7);
        for h in [
            build_electron_photon(&model).unwrap(),
            build_total(&model).unwrap(),
            build_transformed(&model).unwrap(),
            build_deformed(&model, &SourceField::real(&[0.3, -1.2])).unwrap(),
        ] {
            assert!(h.hermiticity_residual() <= 1e-12);
        }
    }

    #[test]
    fn deformed_at_zero_is_transformed() {
        let model = with_photon(0.5);
        let a = build_deformed(&model, &SourceField::zeros(2)).unwrap();
        let b = build_transformed(&model).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deformed_rejects_complex_and_wrong_length() {
        let model = with_photon(0.5);
        let h = SourceField(alloc::vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        assert!(build_deformed(&model, &h).is_err());
        assert!(build_deformed(&model, &SourceField::zeros(3)).is_err());
    }

    #[test]
    fn deformation_is_linear_plus_constant() {
        let model = hubbard(2, 1.0, 0.0);
        let u = CouplingProfile::onsite_nn(1, 2.0, 1.0).unwrap();
        let model = ModelConfig {
            coupling: u,
            ..model
        };
        let h = [0.4, -0.9];
        let a = build_deformed(&model, &SourceField::real(&h)).unwrap();
        let b = build_transformed(&model).unwrap();
        let umat = model.coupling.interaction_matrix(&model.lattice);
        let constant = quadratic_form(&umat, &h);
        let mut linear = OperatorMatrix::zeros(a.space());
        for x in 0..2 {
            let uh: f64 = (0..2).map(|y| umat[x * 2 + y] * h[y]).sum();
            linear = &linear + &charge_imbalance(&model.lattice, x).scale_re(-uh);
        }
        let id = OperatorMatrix::identity(a.space());
        let rebuilt = &(&b + &linear) + &id.scale_re(constant);
        assert!(a.distance(&rebuilt) < 1e-14);
    }

    #[test]
    fn atomic_deformed_is_diagonal() {
        let lat = build_torus(1, 2).unwrap();
        let model =
            ModelConfig::new(1.0, 0.0, lat, CouplingProfile::onsite(1.0).unwrap(), None).unwrap();
        let h = build_deformed(&model, &SourceField::real(&[0.5, 2.0])).unwrap();
        let hop = hopping(&model, HopSigns { up: -1.0, dn: 1.0 }).unwrap();
        let offdiag = &h - &hop;
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(offdiag.matrix()[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn transformed_coulomb_vanishes_on_balanced_states() {
        let lat = build_torus(1, 4).unwrap();
        let u = CouplingProfile::onsite_nn(1, 2.0, 1.0).unwrap();
        let h = build_transformed_coulomb(&lat, &u, &[0.0; 4]).unwrap();
        for mask in 0..16usize {
            assert_eq!(h.diag()[(mask << 4) | mask].re, 0.0);
        }
    }

    #[test]
    fn total_without_photon_is_hubbard() {
        let model = hubbard(4, 1.0, 4.0);
        assert_eq!(build_total(&model).unwrap(), build_hubbard(&model).unwrap());
    }

    #[test]
    fn electron_photon_needs_photons() {
        assert!(build_electron_photon(&hubbard(2, 1.0, 1.0)).is_err());
    }
}
