//! Truncated photon sector.
//!
//! Modes are labelled by an integer vector `n` with wave vector
//! `k = 2 pi n / L` and a polarization index `lambda` in `{1, 2}`. Each mode
//! keeps occupations `0..=n_max`; the boson space is the tensor product over
//! modes with mode 0 as the most significant digit.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fock::{OperatorMatrix, Space};
use crate::lattice::TorusLattice;
use crate::spectral::eigh;
use crate::{Error, Matrix, Result, C64};

/// Unitarity tolerance for Peierls phases.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Integer label: `k = 2 pi n / L`.
    pub n: [i64; 3],
    pub lambda: u8,
    pub k: [f64; 3],
    pub omega: f64,
    pub polarization: [f64; 3],
}

/// How the mode list of a sector is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeSelection {
    /// Explicit `(n, lambda)` pairs; each must lie inside the cutoff ball.
    Explicit(Vec<([i64; 3], u8)>),
    /// Every mode with `|k| <= kappa`; the `k = 0` modes only on request.
    Auto { include_zero: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorParams {
    /// Photon box side `L`.
    pub l_box: usize,
    pub kappa: f64,
    /// Infrared mass `m0`, the frequency of the `k = 0` mode.
    pub m0: f64,
    pub n_max: usize,
    pub modes: ModeSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSector {
    l_box: usize,
    kappa: f64,
    m0: f64,
    n_max: usize,
    modes: Vec<Mode>,
    boson_dim: usize,
}

fn norm(v: [f64; 3]) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Polarization vectors; both vanish when `(k1, k2) = (0, 0)`.
pub fn polarization(k: [f64; 3], lambda: u8) -> [f64; 3] {
    let perp = libm::sqrt(k[0] * k[0] + k[1] * k[1]);
    if perp == 0.0 {
        return [0.0; 3];
    }
    let e1 = [k[1] / perp, -k[0] / perp, 0.0];
    match lambda {
        1 => e1,
        _ => {
            let kn = norm(k);
            cross([k[0] / kn, k[1] / kn, k[2] / kn], e1)
        }
    }
}

/// Wave vector of an integer mode label in a box of side `l_box`.
pub fn wave_vector(l_box: usize, n: [i64; 3]) -> [f64; 3] {
    let s = 2.0 * PI / l_box as f64;
    [s * n[0] as f64, s * n[1] as f64, s * n[2] as f64]
}

/// All `(n, lambda)` with `|k| <= kappa`, in lexicographic order of `n`.
pub fn cutoff_modes(l_box: usize, kappa: f64, include_zero: bool) -> Vec<([i64; 3], u8)> {
    let step = 2.0 * PI / l_box as f64;
    let r = libm::floor(kappa / step) as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let n = [a, b, c];
                if n == [0, 0, 0] && !include_zero {
                    continue;
                }
                if norm(wave_vector(l_box, n)) <= kappa {
                    out.push((n, 1));
                    out.push((n, 2));
                }
            }
        }
    }
    out
}

/// Builds a photon sector. `max_boson_dim` is the share of the global
/// dimension guard left over by the fermions.
pub fn build_sector(params: &SectorParams, max_boson_dim: usize) -> Result<PhotonSector> {
    let l_box = params.l_box;
    if l_box < 2 || !l_box.is_multiple_of(2) {
        return Err(Error::BadPhotonSector(format!(
            "L must be even and >= 2 (got {l_box})"
        )));
    }
    let bound = 2.0 * PI / l_box as f64;
    if !(params.m0 > 0.0 && params.m0 < bound) {
        return Err(Error::BadInfraredMass {
            m0: params.m0,
            bound,
        });
    }
    if params.kappa.is_nan() || params.kappa <= 0.0 {
        return Err(Error::BadPhotonSector(format!(
            "kappa must be positive (got {})",
            params.kappa
        )));
    }
    if params.n_max < 1 {
        return Err(Error::BadPhotonSector("n_max must be at least 1".into()));
    }
    let labels = match &params.modes {
        ModeSelection::Explicit(list) => list.clone(),
        ModeSelection::Auto { include_zero } => cutoff_modes(l_box, params.kappa, *include_zero),
    };
    let mut modes = Vec::with_capacity(labels.len());
    for (n, lambda) in labels {
        if lambda != 1 && lambda != 2 {
            return Err(Error::BadPhotonSector(format!(
                "polarization index {lambda} not in {{1,2}}"
            )));
        }
        let k = wave_vector(l_box, n);
        let kn = norm(k);
        if kn > params.kappa {
            return Err(Error::BadPhotonSector(format!(
                "mode {n:?} has |k| = {kn} beyond the cutoff {}",
                params.kappa
            )));
        }
        if modes.iter().any(|m: &Mode| m.n == n && m.lambda == lambda) {
            return Err(Error::BadPhotonSector(format!(
                "mode {n:?}/{lambda} listed twice"
            )));
        }
        let omega = if n == [0, 0, 0] { params.m0 } else { kn };
        modes.push(Mode {
            n,
            lambda,
            k,
            omega,
            polarization: polarization(k, lambda),
        });
    }
    let levels = params.n_max + 1;
    let mut boson_dim = 1usize;
    for _ in &modes {
        boson_dim = boson_dim.saturating_mul(levels);
        if boson_dim > max_boson_dim {
            return Err(Error::DimensionExceeded {
                dim: boson_dim,
                limit: max_boson_dim,
            });
        }
    }
    Ok(PhotonSector {
        l_box,
        kappa: params.kappa,
        m0: params.m0,
        n_max: params.n_max,
        modes,
        boson_dim,
    })
}

impl PhotonSector {
    pub fn l_box(&self) -> usize {
        self.l_box
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn boson_dim(&self) -> usize {
        self.boson_dim
    }

    pub fn space(&self) -> Space {
        Space::Boson {
            dim: self.boson_dim,
        }
    }

    /// Box volume `|V| = L^3`.
    pub fn volume(&self) -> f64 {
        let l = self.l_box as f64;
        l * l * l
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_max + 1).pow((self.modes.len() - 1 - mode) as u32)
    }

    /// Occupation of `mode` in boson basis state `state`.
    pub fn occupation(&self, state: usize, mode: usize) -> usize {
        (state / self.stride(mode)) % (self.n_max + 1)
    }

    pub fn ops(&self) -> BosonOps {
        let d = self.boson_dim;
        let a = (0..self.modes.len())
            .map(|j| {
                let stride = self.stride(j);
                let mut m = Matrix::zeros(d, d);
                for s in 0..d {
                    let n = self.occupation(s, j);
                    if n > 0 {
                        m[(s - stride, s)] = C64::new(libm::sqrt(n as f64), 0.0);
                    }
                }
                OperatorMatrix::new(self.space(), m).expect("dimension matches")
            })
            .collect();
        BosonOps { a }
    }
}

/// Truncated ladder operators, one per mode.
#[derive(Debug, Clone)]
pub struct BosonOps {
    pub a: Vec<OperatorMatrix>,
}

impl BosonOps {
    pub fn a_dagger(&self, mode: usize) -> OperatorMatrix {
        self.a[mode].adjoint()
    }

    pub fn number(&self, mode: usize) -> OperatorMatrix {
        &self.a_dagger(mode) * &self.a[mode]
    }
}

/// `H_f = sum omega(k) a^dagger a`, diagonal in the occupation basis.
pub fn free_field_energy(sector: &PhotonSector) -> OperatorMatrix {
    OperatorMatrix::diagonal(
        sector.space(),
        (0..sector.boson_dim()).map(|s| {
            let e: f64 = sector
                .modes()
                .iter()
                .enumerate()
                .map(|(j, m)| m.omega * sector.occupation(s, j) as f64)
                .sum();
            C64::new(e, 0.0)
        }),
    )
    .expect("dimension matches")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckCheck {
    /// `Tr exp(-beta H_f)` over the truncated space.
    pub truncated: f64,
    /// `prod (1 - exp(-beta omega))^{-1}`.
    pub closed_form: f64,
    /// `(closed_form - truncated) / closed_form`.
    pub relative_gap: f64,
    /// `sum exp(-beta omega (n_max + 1)) / (1 - exp(-beta omega))`.
    pub bound: f64,
}

impl PlanckCheck {
    pub fn within_bound(&self) -> bool {
        self.relative_gap >= -1e-15 && self.relative_gap <= self.bound * (1.0 + 1e-12) + 1e-15
    }
}

pub fn planck_partition(sector: &PhotonSector, beta: f64) -> PlanckCheck {
    let hf = free_field_energy(sector);
    let truncated: f64 = hf.diag().iter().map(|e| libm::exp(-beta * e.re)).sum();
    let closed_form: f64 = sector
        .modes()
        .iter()
        .map(|m| 1.0 / (1.0 - libm::exp(-beta * m.omega)))
        .product();
    let bound = sector
        .modes()
        .iter()
        .map(|m| {
            let q = libm::exp(-beta * m.omega);
            libm::pow(q, (sector.n_max() + 1) as f64) / (1.0 - q)
        })
        .sum();
    PlanckCheck {
        truncated,
        closed_form,
        relative_gap: (closed_form - truncated) / closed_form,
        bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPoint {
    pub trace_side: f64,
    pub covariance_side: f64,
}

/// Imaginary-time two-point function of `phi = (a + a^dagger)/sqrt 2` for a
/// single mode of frequency `omega`, against the Gaussian covariance.
pub fn euclidean_two_point(
    omega: f64,
    n_max: usize,
    beta: f64,
    t: f64,
    s: f64,
) -> Result<TwoPoint> {
    if !(0.0..=beta).contains(&t) || !(0.0..=beta).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "times ({t}, {s}) outside [0, beta = {beta}]"
        )));
    }
    let tau = (t - s).abs();
    let d = n_max + 1;
    let phi = |m: usize, n: usize| -> f64 {
        if m + 1 == n {
            libm::sqrt(n as f64 / 2.0)
        } else if n + 1 == m {
            libm::sqrt(m as f64 / 2.0)
        } else {
            0.0
        }
    };
    let mut z = 0.0;
    let mut acc = 0.0;
    for m in 0..d {
        let em = omega * m as f64;
        z += libm::exp(-beta * em);
        for n in m.saturating_sub(1)..(m + 2).min(d) {
            let en = omega * n as f64;
            let w = libm::exp(-(beta - tau) * em - tau * en);
            acc += w * phi(m, n) * phi(n, m);
        }
    }
    let q = libm::exp(-beta * omega);
    let covariance_side =
        0.5 * (libm::exp(-(beta - tau) * omega) + libm::exp(-tau * omega)) / (1.0 - q);
    Ok(TwoPoint {
        trace_side: acc / z,
        covariance_side,
    })
}

/// `(exp(iu) - 1) / (iu)`, equal to 1 at `u = 0`.
pub fn path_factor(u: f64) -> C64 {
    if u == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let half = libm::sin(u / 2.0);
    C64::new(libm::sin(u) / u, 2.0 * half * half / u)
}

/// Coefficients `g` of `a(k, lambda)` in the line integral of the vector
/// potential along the straight segment `start -> start + disp`.
pub fn segment_coefficients(sector: &PhotonSector, start: [f64; 3], disp: [f64; 3]) -> Vec<C64> {
    let vol = sector.volume();
    sector
        .modes()
        .iter()
        .map(|m| {
            let amp = 1.0 / libm::sqrt(2.0 * m.omega * vol);
            let along = dot(m.polarization, disp);
            let kx = dot(m.k, start);
            let phase = C64::new(libm::cos(kx), libm::sin(kx));
            phase * path_factor(dot(m.k, disp)) * (amp * along)
        })
        .collect()
}

/// `sum_j g_j a_j + conj(g_j) a_j^dagger`.
pub fn field_from_coefficients(sector: &PhotonSector, ops: &BosonOps, g: &[C64]) -> OperatorMatrix {
    let mut out = OperatorMatrix::zeros(sector.space());
    for (j, &gj) in g.iter().enumerate() {
        out = &out + &ops.a[j].scale(gj);
        out = &out + &ops.a_dagger(j).scale(gj.conj());
    }
    out
}

/// Line integral of the vector potential along the bond `x -> y`.
///
/// Each unordered bond carries one straight curve, starting at its stored
/// `from` site (a wrapped bond runs through the boundary). The opposite
/// direction is the same curve reversed, so `Phi_yx = -Phi_xy` exactly.
pub fn bond_phase_generator(
    sector: &PhotonSector,
    ops: &BosonOps,
    lat: &TorusLattice,
    x: usize,
    y: usize,
) -> Result<OperatorMatrix> {
    let bond = lat
        .bonds()
        .iter()
        .find(|b| (b.from == x && b.to == y) || (b.from == y && b.to == x))
        .ok_or(Error::NotNeighbours(x, y))?;
    let g = segment_coefficients(sector, lat.position(bond.from), bond.displacement());
    let phi = field_from_coefficients(sector, ops, &g);
    if bond.from == x {
        Ok(phi)
    } else {
        Ok(-&phi)
    }
}

/// `exp(i sign e Phi)` through the eigendecomposition of `Phi`.
pub fn peierls_phase(generator: &OperatorMatrix, charge: f64, sign: f64) -> Result<OperatorMatrix> {
    if charge == 0.0 {
        return Ok(OperatorMatrix::identity(generator.space()));
    }
    let eig = eigh(generator.matrix())?;
    let m = eig.apply(|lam| {
        let a = sign * charge * lam;
        C64::new(libm::cos(a), libm::sin(a))
    });
    OperatorMatrix::new(generator.space(), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_mode(n: [i64; 3], lambda: u8, l_box: usize, n_max: usize) -> PhotonSector {
        build_sector(
            &SectorParams {
                l_box,
                kappa: 10.0,
                m0: 0.5 * 2.0 * PI / l_box as f64,
                n_max,
                modes: ModeSelection::Explicit(alloc::vec![(n, lambda)]),
            },
            usize::MAX,
        )
        .unwrap()
    }

    #[test]
    fn corner_modes_inside_ball() {
        let kappa = PI * libm::sqrt(3.0) * 1.01;
        let modes = cutoff_modes(2, kappa, false);
        assert!(modes.contains(&([1, 1, 1], 1)));
        assert!(modes.contains(&([-1, 1, -1], 2)));
        assert_eq!(modes.len(), 26 * 2);
        let s = build_sector(
            &SectorParams {
                l_box: 2,
                kappa,
                m0: 1.0,
                n_max: 1,
                modes: ModeSelection::Explicit(alloc::vec![([1, 1, 1], 1)]),
            },
            usize::MAX,
        )
        .unwrap();
        assert!((s.modes()[0].omega - PI * libm::sqrt(3.0)).abs() < 1e-14);
    }

    #[test]
    fn full_ball_trips_the_guard() {
        let r = build_sector(
            &SectorParams {
                l_box: 2,
                kappa: PI * libm::sqrt(3.0) * 1.01,
                m0: 1.0,
                n_max: 2,
                modes: ModeSelection::Auto { include_zero: true },
            },
            crate::MAX_DIM / 4,
        );
        assert!(matches!(r, Err(Error::DimensionExceeded { .. })));
    }

    #[test]
    fn infrared_mass_range() {
        for m0 in [0.0, -1.0, PI, 4.0] {
            let r = build_sector(
                &SectorParams {
                    l_box: 2,
                    kappa: 4.0,
                    m0,
                    n_max: 1,
                    modes: ModeSelection::Explicit(alloc::vec![]),
                },
                usize::MAX,
            );
            assert!(matches!(r, Err(Error::BadInfraredMass { .. })), "m0 = {m0}");
        }
    }

    #[test]
    fn zero_mode_uses_infrared_mass() {
        let s = build_sector(
            &SectorParams {
                l_box: 4,
                kappa: 1.0,
                m0: 0.3,
                n_max: 1,
                modes: ModeSelection::Explicit(alloc::vec![([0, 0, 0], 1)]),
            },
            usize::MAX,
        )
        .unwrap();
        assert_eq!(s.modes()[0].omega, 0.3);
        assert_eq!(s.modes()[0].polarization, [0.0; 3]);
    }

    #[test]
    fn polarization_frame() {
        for n in [[1, 0, 0], [0, 1, 2], [1, 1, 1], [2, -1, 3], [-1, -2, 0]] {
            let k = wave_vector(4, n);
            let e1 = polarization(k, 1);
            let e2 = polarization(k, 2);
            assert!(dot(e1, e2).abs() < 1e-15);
            assert!(dot(e1, k).abs() < 1e-14);
            assert!(dot(e2, k).abs() < 1e-14);
            assert!((norm(e1) - 1.0).abs() < 1e-15);
            assert!((norm(e2) - 1.0).abs() < 1e-15);
        }
        assert_eq!(polarization(wave_vector(4, [0, 0, 1]), 1), [0.0; 3]);
        assert_eq!(polarization(wave_vector(4, [0, 0, 1]), 2), [0.0; 3]);
    }

    #[test]
    fn ladder_spectrum() {
        // |k| = 1 requires L = 2 pi, which is not an even integer; scale omega instead.
        let s = one_mode([0, 1, 0], 1, 2, 3);
        assert_eq!(s.boson_dim(), 4);
        let e: Vec<f64> = free_field_energy(&s)
            .diag()
            .iter()
            .map(|z| z.re / PI)
            .collect();
        for (i, v) in e.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_ccr() {
        let s = one_mode([1, 0, 0], 2, 4, 5);
        let ops = s.ops();
        let c = ops.a[0].commutator(&ops.a_dagger(0));
        for i in 0..s.boson_dim() {
            for j in 0..s.boson_dim() {
                let expect = match (i == j, i) {
                    (false, _) => 0.0,
                    (true, 5) => -5.0,
                    (true, _) => 1.0,
                };
                assert!((c.matrix()[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_mode_field_energy() {
        let s = build_sector(
            &SectorParams {
                l_box: 2,
                kappa: 10.0,
                m0: 1.0,
                n_max: 1,
                modes: ModeSelection::Explicit(alloc::vec![([1, 0, 0], 1), ([2, 0, 0], 1)]),
            },
            usize::MAX,
        )
        .unwrap();
        let mut e: Vec<f64> = free_field_energy(&s)
            .diag()
            .iter()
            .map(|z| z.re / PI)
            .collect();
        e.sort_by(f64::total_cmp);
        for (v, want) in e.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn planck_limits() {
        let s = one_mode([0, 1, 0], 1, 2, 6);
        let w = s.modes()[0].omega;
        let beta = 1.0 / w;
        let c = planck_partition(&s, beta);
        assert!((c.closed_form - 1.0 / (1.0 - libm::exp(-1.0))).abs() < 1e-14);
        let geometric: f64 = (0..=6).map(|n| libm::exp(-(n as f64))).sum();
        assert!((c.truncated - geometric).abs() < 1e-14);
        assert!(c.within_bound());
        let cold = planck_partition(&s, 1e3);
        assert!((cold.truncated - 1.0).abs() < 1e-15);
        assert!((cold.closed_form - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_equal_times() {
        let tp = euclidean_two_point(1.0, 30, 2.0, 0.7, 0.7).unwrap();
        let e2 = libm::exp(-2.0);
        let expect = 0.5 * (1.0 + e2) / (1.0 - e2);
        assert!((tp.covariance_side - expect).abs() < 1e-15);
        assert!((tp.trace_side - expect).abs() < 1e-8);
    }

    #[test]
    fn two_point_half_period_and_symmetry() {
        let tp = euclidean_two_point(1.3, 30, 2.0, 1.5, 0.5).unwrap();
        let q = libm::exp(-2.6);
        assert!((tp.covariance_side - libm::exp(-1.3) / (1.0 - q)).abs() < 1e-15);
        let flipped = euclidean_two_point(1.3, 30, 2.0, 0.5, 1.5).unwrap();
        assert_eq!(tp, flipped);
        assert!(euclidean_two_point(1.0, 4, 1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn path_factor_small_argument() {
        for u in [1e-9f64, -3e-9, 1e-6, 0.1, 2.5] {
            let direct = if u.abs() > 1e-2 {
                (C64::new(0.0, u).exp() - 1.0) / C64::new(0.0, u)
            } else {
                C64::new(1.0 - u * u / 6.0, u / 2.0 - u * u * u / 24.0)
            };
            assert!((path_factor(u) - direct).norm() < 1e-14);
        }
        assert_eq!(path_factor(0.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn peierls_zero_charge_is_identity() {
        let s = one_mode([0, 1, 0], 1, 2, 3);
        let ops = s.ops();
        let lat = crate::lattice::build_torus(1, 2).unwrap();
        let phi = bond_phase_generator(&s, &ops, &lat, 0, 1).unwrap();
        let p = peierls_phase(&phi, 0.0, 1.0).unwrap();
        assert_eq!(p, OperatorMatrix::identity(s.space()));
    }

    #[test]
    fn orthogonal_polarization_decouples() {
        // lambda = 2 for k along y has polarization along -z: no x component.
        let s = one_mode([0, 1, 0], 2, 2, 2);
        let ops = s.ops();
        let lat = crate::lattice::build_torus(1, 2).unwrap();
        let phi = bond_phase_generator(&s, &ops, &lat, 0, 1).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
    }

    #[test]
    fn non_neighbour_bond_rejected() {
        let s = one_mode([0, 1, 0], 1, 4, 2);
        let ops = s.ops();
        let lat = crate::lattice::build_torus(1, 4).unwrap();
        assert_eq!(
            bond_phase_generator(&s, &ops, &lat, 0, 2).unwrap_err(),
            Error::NotNeighbours(0, 2)
        );
    }
}
