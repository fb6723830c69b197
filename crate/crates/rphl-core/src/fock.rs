//! Fermionic operators on the occupation-number basis and the hole-particle
//! unitary.
//!
//! A spinless basis state is a bitmask over lattice sites (bit `x` set means
//! site `x` is occupied). The spinful space is `F (x) F` with the spin-up
//! factor first, so a spinful index is `up_mask * 2^n + down_mask`. When a
//! photon sector is present the boson factor comes last.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::lattice::TorusLattice;
use crate::{max_abs_diff, Error, Matrix, Result, C64, MAX_DIM};

/// Tolerance on the hole-particle conjugation relations.
pub const HOLE_PARTICLE_TOL: f64 = 1e-12;

/// Tensor factorization an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Spinless { n_sites: usize },
    Spinful { n_sites: usize },
    Boson { dim: usize },
    SpinfulBoson { n_sites: usize, boson_dim: usize },
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::Spinless { n_sites } => 1 << n_sites,
            Space::Spinful { n_sites } => 1 << (2 * n_sites),
            Space::Boson { dim } => dim,
            Space::SpinfulBoson { n_sites, boson_dim } => (1 << (2 * n_sites)) * boson_dim,
        }
    }

    /// Dimension of the space, or an error if it exceeds `limit`.
    ///
    /// Computed with checked arithmetic so absurd sizes are refused before
    /// anything is allocated.
    pub fn checked_dim(&self, limit: usize) -> Result<usize> {
        let fermions = |n: usize| 1usize.checked_shl(n as u32).filter(|_| n < 63);
        let dim = match *self {
            Space::Spinless { n_sites } => fermions(n_sites),
            Space::Spinful { n_sites } => fermions(2 * n_sites),
            Space::Boson { dim } => Some(dim),
            Space::SpinfulBoson { n_sites, boson_dim } => {
                fermions(2 * n_sites).and_then(|f| f.checked_mul(boson_dim))
            }
        }
        .unwrap_or(usize::MAX);
        if dim > limit {
            return Err(Error::DimensionExceeded { dim, limit });
        }
        Ok(dim)
    }
}

/// Refuses any dimension above the global guard.
pub fn guard(space: Space) -> Result<usize> {
    space.checked_dim(MAX_DIM)
}

/// Dense complex operator tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: Space,
    mat: Matrix,
}

impl OperatorMatrix {
    pub fn new(space: Space, mat: Matrix) -> Result<Self> {
        let dim = space.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} matrix for a space of dimension {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(OperatorMatrix { space, mat })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        OperatorMatrix {
            space,
            mat: Matrix::zeros(d, d),
        }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        OperatorMatrix {
            space,
            mat: Matrix::identity(d, d),
        }
    }

    /// Diagonal operator from its diagonal entries.
    pub fn diagonal(space: Space, diag: impl IntoIterator<Item = C64>) -> Result<Self> {
        let v: Vec<C64> = diag.into_iter().collect();
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(v));
        Self::new(space, m)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            space: self.space,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        OperatorMatrix {
            space: self.space,
            mat: &self.mat * s,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(OperatorMatrix {
            space: self.space,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(OperatorMatrix {
            space: self.space,
            mat: crate::spectral::matmul(&self.mat, &other.mat),
        })
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    /// Tensor product. Only the factorizations used by the model are allowed:
    /// spinless (x) spinless and spinful (x) boson.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let space = match (self.space, other.space) {
            (Space::Spinless { n_sites: a }, Space::Spinless { n_sites: b }) if a == b => {
                Space::Spinful { n_sites: a }
            }
            (Space::Spinful { n_sites }, Space::Boson { dim }) => Space::SpinfulBoson {
                n_sites,
                boson_dim: dim,
            },
            (Space::Boson { dim: a }, Space::Boson { dim: b }) => Space::Boson { dim: a * b },
            (a, b) => {
                return Err(Error::SpaceMismatch(format!("cannot form {a:?} (x) {b:?}")));
            }
        };
        guard(space)?;
        Ok(OperatorMatrix {
            space,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// `max |A_ij - B_ij|`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "operator space mismatch");
        max_abs_diff(&self.mat, &other.mat)
    }

    pub fn max_abs(&self) -> f64 {
        crate::max_abs(&self.mat)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        crate::hermiticity_residual(&self.mat)
    }

    /// Entries of the diagonal.
    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.mat[(i, i)]).collect()
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<'a> $tr<&'a OperatorMatrix> for &'a OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
                assert_eq!(self.space, rhs.space, "operator space mismatch");
                OperatorMatrix {
                    space: self.space,
                    mat: &self.mat $op &rhs.mat,
                }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        OperatorMatrix {
            space: self.space,
            mat: crate::spectral::matmul(&self.mat, &rhs.mat),
        }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix {
            space: self.space,
            mat: -&self.mat,
        }
    }
}

/// Occupation-number basis of `n_sites` spinless fermionic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermionBasis {
    n_sites: usize,
}

impl FermionBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        guard(Space::Spinful { n_sites })?;
        Ok(FermionBasis { n_sites })
    }

    pub fn for_lattice(lat: &TorusLattice) -> Result<Self> {
        Self::new(lat.n_sites())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn space(&self) -> Space {
        Space::Spinless {
            n_sites: self.n_sites,
        }
    }

    pub fn spinful_space(&self) -> Space {
        Space::Spinful {
            n_sites: self.n_sites,
        }
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                index: x,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    /// `c_x`, with sign `(-1)^{#occupied sites before x}`.
    pub fn annihilator(&self, x: usize) -> Result<OperatorMatrix> {
        self.check(x)?;
        let d = self.dim();
        let bit = 1usize << x;
        let mut m = Matrix::zeros(d, d);
        for mask in 0..d {
            if mask & bit != 0 {
                m[(mask ^ bit, mask)] = C64::new(jw_sign(mask, x), 0.0);
            }
        }
        OperatorMatrix::new(self.space(), m)
    }

    pub fn creator(&self, x: usize) -> Result<OperatorMatrix> {
        Ok(self.annihilator(x)?.adjoint())
    }

    pub fn number(&self, x: usize) -> Result<OperatorMatrix> {
        self.check(x)?;
        OperatorMatrix::diagonal(
            self.space(),
            (0..self.dim()).map(|mask| C64::new(((mask >> x) & 1) as f64, 0.0)),
        )
    }

    /// `(-1)^N`.
    pub fn parity(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal(
            self.space(),
            (0..self.dim()).map(|mask| C64::new(parity_sign(mask), 0.0)),
        )
        .expect("dimension matches")
    }

    /// `c_x^dagger c_y` built directly from the bitmask action.
    pub fn hop(&self, x: usize, y: usize) -> Result<OperatorMatrix> {
        self.check(x)?;
        self.check(y)?;
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for mask in 0..d {
            if let Some((out, sign)) = apply_hop(mask, x, y) {
                m[(out, mask)] += C64::new(sign, 0.0);
            }
        }
        OperatorMatrix::new(self.space(), m)
    }
}

/// Sign picked up by `c_x` acting on `mask`.
pub fn jw_sign(mask: usize, x: usize) -> f64 {
    let below = mask & ((1usize << x) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn parity_sign(mask: usize) -> f64 {
    if mask.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c_x^dagger c_y |mask>` as `(new_mask, sign)`, or `None` if it vanishes.
pub fn apply_hop(mask: usize, x: usize, y: usize) -> Option<(usize, f64)> {
    let (bx, by) = (1usize << x, 1usize << y);
    if mask & by == 0 {
        return None;
    }
    if x == y {
        return Some((mask, 1.0));
    }
    let mid = mask ^ by;
    if mid & bx != 0 {
        return None;
    }
    Some((mid | bx, jw_sign(mask, y) * jw_sign(mid, x)))
}

/// Spin-resolved operators on `F (x) F`.
#[derive(Debug, Clone)]
pub struct SpinfulOps {
    pub c_up: Vec<OperatorMatrix>,
    pub c_dn: Vec<OperatorMatrix>,
}

impl SpinfulOps {
    pub fn n_up(&self, x: usize) -> OperatorMatrix {
        &self.c_up[x].adjoint() * &self.c_up[x]
    }

    pub fn n_dn(&self, x: usize) -> OperatorMatrix {
        &self.c_dn[x].adjoint() * &self.c_dn[x]
    }

    pub fn n(&self, x: usize) -> OperatorMatrix {
        &self.n_up(x) + &self.n_dn(x)
    }
}

/// `c_up(x) = c_x (x) 1` and `c_dn(x) = (-1)^{N_up} (x) c_x`.
pub fn spinful_ops(basis: &FermionBasis) -> Result<SpinfulOps> {
    let id = OperatorMatrix::identity(basis.space());
    let parity = basis.parity();
    let mut c_up = Vec::with_capacity(basis.n_sites());
    let mut c_dn = Vec::with_capacity(basis.n_sites());
    for x in 0..basis.n_sites() {
        let c = basis.annihilator(x)?;
        c_up.push(c.kron(&id)?);
        c_dn.push(parity.kron(&c)?);
    }
    Ok(SpinfulOps { c_up, c_dn })
}

/// Nonzero entries of each column.
fn sparse_columns(op: &OperatorMatrix) -> Vec<Vec<(usize, C64)>> {
    let m = op.matrix();
    (0..op.dim())
        .map(|j| {
            (0..op.dim())
                .filter(|&i| m[(i, j)] != C64::new(0.0, 0.0))
                .map(|i| (i, m[(i, j)]))
                .collect()
        })
        .collect()
}

/// Largest entry of `{a, b} - delta * 1`, computed column by column.
fn anticommutator_deviation(a: &[Vec<(usize, C64)>], b: &[Vec<(usize, C64)>], delta: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut col: Vec<(usize, C64)> = Vec::new();
    for j in 0..a.len() {
        col.clear();
        for (first, second) in [(a, b), (b, a)] {
            for &(k, bv) in &second[j] {
                for &(i, av) in &first[k] {
                    match col.iter_mut().find(|(r, _)| *r == i) {
                        Some(e) => e.1 += av * bv,
                        None => col.push((i, av * bv)),
                    }
                }
            }
        }
        let mut diag = C64::new(0.0, 0.0);
        for &(i, v) in &col {
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

/// Largest deviation from all `4 n^2` canonical anticommutation relations
/// `{c_a, c_b^dagger} = delta_ab`, `{c_a, c_b} = 0` of the spinful operators.
pub fn car_residual(ops: &SpinfulOps) -> f64 {
    let all: Vec<_> = ops
        .c_up
        .iter()
        .chain(&ops.c_dn)
        .map(|c| (sparse_columns(c), sparse_columns(&c.adjoint())))
        .collect();
    let mut worst = 0.0f64;
    for (i, (a, _)) in all.iter().enumerate() {
        for (j, (b, bd)) in all.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            worst = worst.max(anticommutator_deviation(a, bd, delta));
            worst = worst.max(anticommutator_deviation(a, b, 0.0));
        }
    }
    worst
}

/// Unitary `W` on the spinless factor with `W c_x W^* = gamma(x) c_x^dagger`.
///
/// `W = M_1 ... M_n D` where `M_x = c_x + c_x^dagger` and `D` is the parity of
/// the sites whose sign has to be flipped.
fn hole_particle_factor(basis: &FermionBasis, lat: &TorusLattice) -> Result<OperatorMatrix> {
    let n = basis.n_sites();
    let mut w = OperatorMatrix::identity(basis.space());
    for x in 0..n {
        let c = basis.annihilator(x)?;
        let majorana = &c + &c.adjoint();
        w = &w * &majorana;
    }
    // The Majorana product yields (-1)^{n-1} c_x^dagger; D supplies the rest.
    let global = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let d = OperatorMatrix::diagonal(
        basis.space(),
        (0..basis.dim()).map(|mask| {
            let mut s = 1.0;
            for x in 0..n {
                if (mask >> x) & 1 == 1 && global * lat.parity(x) < 0.0 {
                    s = -s;
                }
            }
            C64::new(s, 0.0)
        }),
    )?;
    Ok(&w * &d)
}

/// Largest deviation from the three defining hole-particle relations.
pub fn hole_particle_residual(
    u: &OperatorMatrix,
    ops: &SpinfulOps,
    basis: &FermionBasis,
    lat: &TorusLattice,
) -> Result<f64> {
    let id = OperatorMatrix::identity(basis.space());
    let ud = u.adjoint();
    let mut worst = 0.0f64;
    for x in 0..basis.n_sites() {
        let g = lat.parity(x);
        let c = &ops.c_up[x];
        let lhs = &(u * c) * &ud;
        worst = worst.max(lhs.distance(&c.adjoint().scale_re(g)));
        let lhs = &(u * &c.adjoint()) * &ud;
        worst = worst.max(lhs.distance(&c.scale_re(g)));
        let cd = id.kron(&basis.annihilator(x)?)?;
        let lhs = &(u * &cd) * &ud;
        worst = worst.max(lhs.distance(&cd));
    }
    Ok(worst)
}

/// Hole-particle unitary on the spinful space.
///
/// Built as `W (x) 1` and then validated against its defining conjugation
/// relations; a residual above [`HOLE_PARTICLE_TOL`] is an error.
pub fn hole_particle_unitary(basis: &FermionBasis, lat: &TorusLattice) -> Result<OperatorMatrix> {
    if basis.n_sites() != lat.n_sites() {
        return Err(Error::InvalidParameter(format!(
            "basis has {} sites, lattice {}",
            basis.n_sites(),
            lat.n_sites()
        )));
    }
    let w = hole_particle_factor(basis, lat)?;
    let u = w.kron(&OperatorMatrix::identity(basis.space()))?;
    let ops = spinful_ops(basis)?;
    let residual = hole_particle_residual(&u, &ops, basis, lat)?;
    if residual > HOLE_PARTICLE_TOL {
        return Err(Error::RelationViolated {
            what: "hole-particle",
            residual,
        });
    }
    Ok(u)
}
