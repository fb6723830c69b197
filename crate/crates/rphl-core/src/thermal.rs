//! Gibbs states, Duhamel two-point functions and the charge-susceptibility
//! checks built on them.
//!
//! Boltzmann weights are always taken relative to the smallest eigenvalue,
//! so `Z >= 1` and nothing overflows at large `beta`.

use alloc::format;
use alloc::vec::Vec;

use crate::fock::{OperatorMatrix, Space};
use crate::hamiltonian::{build_deformed, ModelConfig, SourceField};
use crate::lattice::{check_conditions, coupling_fourier, CouplingProfile, Momentum, TorusLattice};
use crate::spectral::{adjoint_matmul, eigh, eigvalsh, matmul};
use crate::{max_abs, max_abs_diff, Error, Matrix, Result, C64};

/// Relative energy gap below which two levels use the equal-energy weight.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Slack on `chi * U_hat <= 1` and on `Z(h) / Z(0) <= 1`.
pub const BOUND_TOL: f64 = 1e-9;

/// Relative reconstruction tolerance `|H - Q L Q^dagger| <= tol * |H|`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ThermalState {
    beta: f64,
    space: Space,
    energies: Vec<f64>,
    vectors: Matrix,
    shift: f64,
    weights: Vec<f64>,
    z: f64,
    reconstruction_residual: f64,
}

/// Full spectral decomposition of `h` at inverse temperature `beta`.
pub fn diagonalize(h: &OperatorMatrix, beta: f64) -> Result<ThermalState> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive (got {beta})"
        )));
    }
    let eig = eigh(h.matrix())?;
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (c, &lam) in eig.values.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= lam;
        }
    }
    let rebuilt = matmul(&scaled, &eig.vectors.adjoint());
    let residual = max_abs_diff(&rebuilt, h.matrix());
    let scale = max_abs(h.matrix());
    if residual > RECONSTRUCTION_TOL * scale.max(f64::MIN_POSITIVE) && residual > 1e-300 {
        return Err(Error::RelationViolated {
            what: "spectral reconstruction",
            residual,
        });
    }
    let shift = eig.values.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|e| libm::exp(-beta * (e - shift)))
        .collect();
    let z = weights.iter().sum();
    Ok(ThermalState {
        beta,
        space: h.space(),
        energies: eig.values,
        vectors: eig.vectors,
        shift,
        weights,
        z,
        reconstruction_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelValue {
    pub value: C64,
    /// Number of `(m, n)` pairs evaluated with the equal-energy weight.
    pub degenerate_pairs: usize,
}

impl ThermalState {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.vectors
    }

    /// Energy subtracted before exponentiation (the ground-state energy).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Shifted partition function `sum exp(-beta (E - E_min))`.
    pub fn partition(&self) -> f64 {
        self.z
    }

    /// `ln Tr exp(-beta H)`.
    pub fn log_partition(&self) -> f64 {
        libm::log(self.z) - self.beta * self.shift
    }

    pub fn reconstruction_residual(&self) -> f64 {
        self.reconstruction_residual
    }

    fn check(&self, a: &OperatorMatrix) -> Result<()> {
        if a.space() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "operator on {:?}, state on {:?}",
                a.space(),
                self.space
            )));
        }
        Ok(())
    }

    fn rotate(&self, a: &OperatorMatrix) -> Matrix {
        adjoint_matmul(&self.vectors, &matmul(a.matrix(), &self.vectors))
    }

    /// `Z^{-1} Tr[A exp(-beta H)]`.
    pub fn thermal_average(&self, a: &OperatorMatrix) -> Result<C64> {
        self.check(a)?;
        let aq = matmul(a.matrix(), &self.vectors);
        let n = self.energies.len();
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            let mut diag = C64::new(0.0, 0.0);
            for i in 0..n {
                diag += self.vectors[(i, m)].conj() * aq[(i, m)];
            }
            acc += diag * self.weights[m];
        }
        Ok(acc / self.z)
    }

    /// Duhamel two-point function with the default degeneracy threshold.
    pub fn duhamel(&self, a: &OperatorMatrix, b: &OperatorMatrix) -> Result<DuhamelValue> {
        self.duhamel_with(a, b, DEGENERACY_TOL)
    }

    /// `Z^{-1} int_0^1 ds Tr[e^{-s beta H} A e^{-(1-s) beta H} B]`
    /// summed exactly over eigenpairs.
    pub fn duhamel_with(
        &self,
        a: &OperatorMatrix,
        b: &OperatorMatrix,
        tau: f64,
    ) -> Result<DuhamelValue> {
        self.check(a)?;
        self.check(b)?;
        let am = self.rotate(a);
        let bm = self.rotate(b);
        let n = self.energies.len();
        let spread = match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) if hi > lo => hi - lo,
            _ => 1.0,
        };
        let threshold = tau * spread;
        let beta = self.beta;
        let mut degenerate_pairs = 0;
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..n {
            let em = self.energies[m] - self.shift;
            for k in 0..n {
                let ek = self.energies[k] - self.shift;
                let gap = (em - ek).abs();
                let w = if gap > threshold {
                    let lo = em.min(ek);
                    libm::exp(-beta * lo) * (-libm::expm1(-beta * gap)) / (beta * gap)
                } else {
                    degenerate_pairs += 1;
                    libm::exp(-0.5 * beta * (em + ek))
                };
                acc += am[(m, k)] * bm[(k, m)] * w;
            }
        }
        Ok(DuhamelValue {
            value: acc / self.z,
            degenerate_pairs,
        })
    }
}

/// `delta n~_p = |Lambda|^{-1/2} sum_x exp(-i x.p) (n_x - 1)`, diagonal,
/// extended by the boson identity when `boson_dim > 1`.
pub fn charge_operator(lat: &TorusLattice, p: &Momentum, space: Space) -> Result<OperatorMatrix> {
    if !lat.momenta().points().contains(p) {
        return Err(Error::OffGridMomentum);
    }
    let coeffs: Vec<C64> = (0..lat.n_sites()).map(|x| lat.plane_wave(x, p)).collect();
    let norm = 1.0 / libm::sqrt(lat.n_sites() as f64);
    site_diagonal(lat, space, |up, dn| {
        let mut acc = C64::new(0.0, 0.0);
        for (x, c) in coeffs.iter().enumerate() {
            let nx = ((up >> x) & 1) + ((dn >> x) & 1);
            acc += c * (nx as f64 - 1.0);
        }
        acc * norm
    })
}

/// Diagonal operator on `space` from a function of the spin occupation masks.
pub fn site_diagonal(
    lat: &TorusLattice,
    space: Space,
    f: impl Fn(usize, usize) -> C64,
) -> Result<OperatorMatrix> {
    let n = lat.n_sites();
    let bd = match space {
        Space::Spinful { n_sites } if n_sites == n => 1,
        Space::SpinfulBoson { n_sites, boson_dim } if n_sites == n => boson_dim,
        other => {
            return Err(Error::SpaceMismatch(format!(
                "{other:?} is not a spinful space over {n} sites"
            )))
        }
    };
    let nf = 1usize << (2 * n);
    let mut diag = Vec::with_capacity(nf * bd);
    for i in 0..nf {
        let v = f(i >> n, i & ((1 << n) - 1));
        diag.extend(core::iter::repeat_n(v, bd));
    }
    OperatorMatrix::diagonal(space, diag)
}

/// `beta (delta n~_{-p}, delta n~_p)`.
pub fn susceptibility(state: &ThermalState, lat: &TorusLattice, p: &Momentum) -> Result<f64> {
    let a = charge_operator(lat, p, state.space())?;
    let v = state.duhamel(&a.adjoint(), &a)?;
    Ok(state.beta() * v.value.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Pass,
    Fail,
    /// `U_hat(p) <= 0`: no bound is claimed at this momentum.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    pub p: Momentum,
    pub chi: f64,
    pub u_hat: f64,
    pub product: f64,
    pub status: BoundStatus,
}

/// `chi(p) U_hat(p) <= 1` on every grid momentum with `U_hat(p) > 0`.
pub fn verify_kubo_kishi(
    state: &ThermalState,
    lat: &TorusLattice,
    coupling: &CouplingProfile,
) -> Result<Vec<BoundRecord>> {
    lat.momenta()
        .points()
        .iter()
        .map(|p| {
            let chi = susceptibility(state, lat, p)?;
            let u_hat = coupling_fourier(coupling, lat, p)?;
            let product = chi * u_hat;
            let status = if u_hat <= crate::lattice::NONNEG_TOL {
                BoundStatus::Skipped
            } else if product <= 1.0 + BOUND_TOL {
                BoundStatus::Pass
            } else {
                BoundStatus::Fail
            };
            Ok(BoundRecord {
                p: *p,
                chi,
                u_hat,
                product,
                status,
            })
        })
        .collect()
}

/// Spectrum of the undeformed transformed Hamiltonian, reused across many
/// source fields.
#[derive(Debug, Clone)]
pub struct DominationBaseline {
    model: ModelConfig,
    beta: f64,
    energies: Vec<f64>,
}

impl DominationBaseline {
    pub fn new(model: &ModelConfig, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive (got {beta})"
            )));
        }
        let h0 = build_deformed(model, &SourceField::zeros(model.n_sites()))?;
        Ok(DominationBaseline {
            model: model.clone(),
            beta,
            energies: eigvalsh(h0.matrix())?,
        })
    }

    /// `Z(h) / Z(0)` with one energy shift shared by both traces.
    pub fn ratio(&self, h: &SourceField) -> Result<f64> {
        let hh = build_deformed(&self.model, h)?;
        let eh = eigvalsh(hh.matrix())?;
        let shift = eh[0].min(self.energies[0]);
        let z = |e: &[f64]| -> f64 { e.iter().map(|x| libm::exp(-self.beta * (x - shift))).sum() };
        Ok(z(&eh) / z(&self.energies))
    }
}

/// `Z_beta(h) / Z_beta(0)` for the source-deformed transformed Hamiltonian.
pub fn gaussian_domination_ratio(model: &ModelConfig, h: &SourceField, beta: f64) -> Result<f64> {
    DominationBaseline::new(model, beta)?.ratio(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `A = sum_{x,y} U(x - y) q_x h_y` on the space of `space`.
pub fn source_observable(
    lat: &TorusLattice,
    coupling: &CouplingProfile,
    h: &SourceField,
    space: Space,
) -> Result<OperatorMatrix> {
    let n = lat.n_sites();
    if h.len() != n {
        return Err(Error::InvalidParameter(format!(
            "source field has {} entries for {n} sites",
            h.len()
        )));
    }
    let umat = coupling.interaction_matrix(lat);
    let uh: Vec<C64> = (0..n)
        .map(|x| (0..n).map(|y| h.values()[y] * umat[x * n + y]).sum())
        .collect();
    site_diagonal(lat, space, |up, dn| {
        let mut acc = C64::new(0.0, 0.0);
        for (x, c) in uh.iter().enumerate() {
            let q = ((up >> x) & 1) as f64 - ((dn >> x) & 1) as f64;
            acc += c * q;
        }
        acc
    })
}

/// `<h, U h> = sum h_x^* U(x - y) h_y`.
pub fn coupling_norm(lat: &TorusLattice, coupling: &CouplingProfile, h: &SourceField) -> f64 {
    let n = lat.n_sites();
    let umat = coupling.interaction_matrix(lat);
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..n {
        for y in 0..n {
            acc += h.values()[x].conj() * umat[x * n + y] * h.values()[y];
        }
    }
    acc.re
}

/// Duhamel quadratic form bound in the Gibbs state of the transformed
/// Hamiltonian: `((A^dagger, A)) <= beta^{-1} <h, U h>`.
///
/// Refuses profiles whose lattice transform is negative somewhere.
pub fn verify_corollary(
    state_hat: &ThermalState,
    lat: &TorusLattice,
    coupling: &CouplingProfile,
    h: &SourceField,
) -> Result<CorollaryRecord> {
    let cond = check_conditions(coupling, lat);
    if !cond.a2_holds {
        return Err(Error::NegativeCoupling {
            min: cond.min_fourier,
            at: cond.argmin.integer(),
        });
    }
    let a = source_observable(lat, coupling, h, state_hat.space())?;
    let lhs = state_hat.duhamel(&a.adjoint(), &a)?.value.re;
    let rhs = coupling_norm(lat, coupling, h) / state_hat.beta();
    Ok(CorollaryRecord {
        lhs,
        rhs,
        pass: lhs <= rhs + BOUND_TOL * rhs.max(1.0),
    })
}
