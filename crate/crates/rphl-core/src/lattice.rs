//! Finite bipartite torus, its momentum grid and the two-body coupling
//! profile.
//!
//! Sites live in `[-ell/2, ell/2)^d` and are ordered lexicographically on
//! their coordinates. Coordinates are stored padded to three components,
//! which is also the embedding of the lattice into the photon box.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, C64};

/// Imaginary parts of Fourier sums above this are treated as a symmetry bug.
pub const FOURIER_IMAG_TOL: f64 = 1e-12;

/// Tolerance used when deciding whether the coupling transform is non-negative.
pub const NONNEG_TOL: f64 = 1e-12;

/// Nearest-neighbour bond stored once per unordered pair.
///
/// The hop `from -> to` is a unit step along `axis` in the positive
/// direction, possibly through the periodic wrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub axis: usize,
}

impl Bond {
    /// Unit displacement from `from` to `to` in the 3d embedding.
    pub fn displacement(&self) -> [f64; 3] {
        let mut d = [0.0; 3];
        d[self.axis] = 1.0;
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusLattice {
    dim: usize,
    ell: usize,
    sites: Vec<[i64; 3]>,
    bonds: Vec<Bond>,
}

/// Builds the `d`-dimensional torus of side `ell`.
pub fn build_torus(dim: usize, ell: usize) -> Result<TorusLattice> {
    TorusLattice::new(dim, ell)
}

impl TorusLattice {
    pub fn new(dim: usize, ell: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if ell < 2 || !ell.is_multiple_of(2) {
            return Err(Error::BadSideLength(ell));
        }
        let n_sites = ell.pow(dim as u32);
        let half = (ell / 2) as i64;
        let sites: Vec<[i64; 3]> = (0..n_sites)
            .map(|ord| {
                let mut c = [0i64; 3];
                let mut rest = ord;
                for j in (0..dim).rev() {
                    c[j] = (rest % ell) as i64 - half;
                    rest /= ell;
                }
                c
            })
            .collect();

        let mut lat = TorusLattice {
            dim,
            ell,
            sites,
            bonds: Vec::new(),
        };

        let mut bonds = Vec::new();
        let mut seen = BTreeMap::new();
        for from in 0..n_sites {
            for axis in 0..dim {
                let mut c = lat.sites[from];
                c[axis] += 1;
                let to = lat.index_of(&c[..dim]).expect("wrapped coordinate");
                let key = (from.min(to), from.max(to), axis);
                if seen.insert(key, ()).is_none() {
                    bonds.push(Bond { from, to, axis });
                }
            }
        }
        lat.bonds = bonds;
        Ok(lat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Site coordinates padded with zeros to three components.
    pub fn coords(&self, site: usize) -> [i64; 3] {
        self.sites[site]
    }

    /// Site position in the 3d photon box.
    pub fn position(&self, site: usize) -> [f64; 3] {
        let c = self.sites[site];
        [c[0] as f64, c[1] as f64, c[2] as f64]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Reduces a displacement (or coordinate) into `[-ell/2, ell/2)` per component.
    pub fn reduce(&self, x: i64) -> i64 {
        let ell = self.ell as i64;
        let half = ell / 2;
        (x + half).rem_euclid(ell) - half
    }

    /// Ordinal of a coordinate vector after periodic reduction.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        let half = (self.ell / 2) as i64;
        let mut ord = 0usize;
        for &x in coords {
            ord = ord * self.ell + (self.reduce(x) + half) as usize;
        }
        Some(ord)
    }

    /// Bipartition sign: `+1` on even sites, `-1` on odd sites.
    pub fn parity(&self, site: usize) -> f64 {
        let s: i64 = self.sites[site].iter().sum();
        if s.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Distinct nearest neighbours of a site.
    pub fn neighbours(&self, site: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .bonds
            .iter()
            .filter_map(|b| {
                if b.from == site {
                    Some(b.to)
                } else if b.to == site {
                    Some(b.from)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_bond(&self, x: usize, y: usize) -> bool {
        self.bonds
            .iter()
            .any(|b| (b.from == x && b.to == y) || (b.from == y && b.to == x))
    }

    /// Momentum grid `(2 pi / ell) Z^d` reduced to `[-pi, pi)^d`.
    pub fn momenta(&self) -> MomentumGrid {
        let points = (0..self.n_sites())
            .map(|i| {
                let mut m = self.sites[i];
                for c in m.iter_mut().skip(self.dim) {
                    *c = 0;
                }
                Momentum { m, ell: self.ell }
            })
            .collect();
        MomentumGrid { points }
    }

    /// `exp(-i x.p)` evaluated with an exactly reduced integer phase.
    pub fn plane_wave(&self, site: usize, p: &Momentum) -> C64 {
        let x = self.sites[site];
        let dot: i64 = (0..self.dim).map(|j| x[j] * p.m[j]).sum();
        let k = dot.rem_euclid(self.ell as i64);
        let angle = -2.0 * PI * k as f64 / self.ell as f64;
        C64::new(libm::cos(angle), libm::sin(angle))
    }
}

/// A grid momentum `p = 2 pi m / ell` with `m` in `[-ell/2, ell/2)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Momentum {
    m: [i64; 3],
    ell: usize,
}

impl Momentum {
    pub fn integer(&self) -> [i64; 3] {
        self.m
    }

    pub fn vector(&self, dim: usize) -> Vec<f64> {
        self.m[..dim]
            .iter()
            .map(|&m| 2.0 * PI * m as f64 / self.ell as f64)
            .collect()
    }

    /// `-p` reduced back onto the grid.
    pub fn neg(&self) -> Momentum {
        let ell = self.ell as i64;
        let half = ell / 2;
        let mut m = self.m;
        for c in m.iter_mut() {
            *c = (-*c + half).rem_euclid(ell) - half;
        }
        Momentum { m, ell: self.ell }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    points: Vec<Momentum>,
}

impl MomentumGrid {
    pub fn points(&self) -> &[Momentum] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Finds the grid point equal to `p` modulo `2 pi` (components within 1e-9).
    pub fn locate(&self, p: &[f64]) -> Result<Momentum> {
        let first = self.points.first().ok_or(Error::OffGridMomentum)?;
        let ell = first.ell as f64;
        let mut m = [0i64; 3];
        for (j, &pj) in p.iter().enumerate() {
            if j >= 3 {
                return Err(Error::OffGridMomentum);
            }
            let raw = pj * ell / (2.0 * PI);
            let r = libm::round(raw);
            if (raw - r).abs() > 1e-9 {
                return Err(Error::OffGridMomentum);
            }
            m[j] = r as i64;
        }
        let half = (first.ell / 2) as i64;
        for c in m.iter_mut() {
            *c = (*c + half).rem_euclid(first.ell as i64) - half;
        }
        self.points
            .iter()
            .copied()
            .find(|q| q.m == m)
            .ok_or(Error::OffGridMomentum)
    }
}

/// Two-body coupling `U(x)` on lattice displacement vectors.
///
/// On a torus the profile is read at the representative of each displacement
/// in `[-ell/2, ell/2)^d`, so the lattice transform is
/// `sum_{x in Lambda} exp(-i x.p) U(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    values: BTreeMap<[i64; 3], f64>,
    label: String,
}

impl CouplingProfile {
    /// `U(x) = u0 delta_{x,0}`.
    pub fn onsite(u0: f64) -> Result<Self> {
        Self::from_table(format!("onsite(U0={u0})"), [([0, 0, 0], u0)])
    }

    /// `U(0) = u0`, `U(x) = u1 / 2d` for `|x| = 1`.
    pub fn onsite_nn(dim: usize, u0: f64, u1: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        let mut entries = alloc::vec![([0i64, 0, 0], u0)];
        let w = u1 / (2.0 * dim as f64);
        for axis in 0..dim {
            for s in [-1i64, 1] {
                let mut dx = [0i64; 3];
                dx[axis] = s;
                entries.push((dx, w));
            }
        }
        Self::from_table(format!("onsite_nn(U0={u0},U1={u1})"), entries)
    }

    /// Builds a profile from explicit `(displacement, value)` entries.
    ///
    /// Displacements are padded to three components; repeated keys add up.
    /// Rejects non-finite values and profiles violating `U(-x) = U(x)`.
    pub fn from_table<I>(label: String, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([i64; 3], f64)>,
    {
        let mut values = BTreeMap::new();
        for (dx, u) in entries {
            if !u.is_finite() {
                return Err(Error::AsymmetricProfile(format!(
                    "non-finite value at {dx:?}"
                )));
            }
            *values.entry(dx).or_insert(0.0) += u;
        }
        let profile = CouplingProfile { values, label };
        for (dx, &u) in &profile.values {
            let neg = [-dx[0], -dx[1], -dx[2]];
            let v = profile.raw(neg);
            if (u - v).abs() > 1e-14 * (1.0 + u.abs()) {
                return Err(Error::AsymmetricProfile(format!(
                    "U({dx:?}) = {u} but U({neg:?}) = {v}"
                )));
            }
        }
        Ok(profile)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> impl Iterator<Item = ([i64; 3], f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    fn raw(&self, dx: [i64; 3]) -> f64 {
        self.values.get(&dx).copied().unwrap_or(0.0)
    }

    /// `max |U(x)|` over the stored entries.
    pub fn sup_norm(&self) -> f64 {
        self.values.values().map(|u| u.abs()).fold(0.0, f64::max)
    }

    /// Rejects entries that do not fit the lattice dimension.
    pub fn check_fits(&self, lat: &TorusLattice) -> Result<()> {
        for dx in self.values.keys() {
            if dx[lat.dim()..].iter().any(|&c| c != 0) {
                return Err(Error::InvalidParameter(format!(
                    "coupling entry {dx:?} does not fit a {}-dimensional lattice",
                    lat.dim()
                )));
            }
        }
        Ok(())
    }

    /// `U` at the torus representative of a displacement.
    pub fn torus_value(&self, lat: &TorusLattice, dx: [i64; 3]) -> f64 {
        let mut r = [0i64; 3];
        for j in 0..lat.dim() {
            r[j] = lat.reduce(dx[j]);
        }
        self.raw(r)
    }

    /// Row-major `|Lambda| x |Lambda|` matrix `U(x - y)`.
    pub fn interaction_matrix(&self, lat: &TorusLattice) -> Vec<f64> {
        let n = lat.n_sites();
        let mut out = alloc::vec![0.0; n * n];
        for x in 0..n {
            let cx = lat.coords(x);
            for y in 0..n {
                let cy = lat.coords(y);
                out[x * n + y] =
                    self.torus_value(lat, [cx[0] - cy[0], cx[1] - cy[1], cx[2] - cy[2]]);
            }
        }
        out
    }

    fn fourier_complex(&self, lat: &TorusLattice, p: &Momentum) -> C64 {
        (0..lat.n_sites())
            .map(|x| lat.plane_wave(x, p) * self.torus_value(lat, lat.coords(x)))
            .sum()
    }
}

/// Lattice Fourier transform `sum_x exp(-i x.p) U(x)`.
///
/// Fails if the imaginary part exceeds [`FOURIER_IMAG_TOL`].
pub fn coupling_fourier(u: &CouplingProfile, lat: &TorusLattice, p: &Momentum) -> Result<f64> {
    let z = u.fourier_complex(lat, p);
    if z.im.abs() > FOURIER_IMAG_TOL {
        return Err(Error::ComplexFourier(z.im));
    }
    Ok(z.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Non-negativity of the lattice transform on every grid momentum.
    pub a2_holds: bool,
    pub min_fourier: f64,
    pub argmin: Momentum,
    /// `(momentum, transform)` for every grid point, in grid order.
    pub values: Vec<(Momentum, f64)>,
}

/// Evaluates the coupling transform on the whole grid.
pub fn check_conditions(u: &CouplingProfile, lat: &TorusLattice) -> ConditionReport {
    let values: Vec<(Momentum, f64)> = lat
        .momenta()
        .points()
        .iter()
        .map(|p| (*p, u.fourier_complex(lat, p).re))
        .collect();
    let (argmin, min_fourier) = values
        .iter()
        .copied()
        .fold(None, |acc: Option<(Momentum, f64)>, (p, v)| match acc {
            Some((_, best)) if best <= v => acc,
            _ => Some((p, v)),
        })
        .expect("grid is never empty");
    ConditionReport {
        a2_holds: min_fourier >= -NONNEG_TOL,
        min_fourier,
        argmin,
        values,
    }
}
