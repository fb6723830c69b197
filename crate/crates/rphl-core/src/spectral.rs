//! Dense kernels: Hermitian eigendecomposition and matrix products.
//!
//! Storage is nalgebra throughout the crate; the eigensolver and the
//! products run on faer.

use alloc::vec::Vec;

use faer::{Mat, MatRef, Side};

use crate::{hermiticity_residual, max_abs, Error, Matrix, Result, C64};

/// Relative Hermiticity tolerance accepted on input matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenpairs of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

fn to_faer(m: &Matrix) -> Result<Mat<C64>> {
    let scale = max_abs(m).max(1.0);
    let residual = hermiticity_residual(m);
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(residual));
    }
    Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]))
}

fn view(m: &Matrix) -> MatRef<'_, C64> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn from_faer(m: &Mat<C64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `a b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    from_faer(&(view(a) * view(b)))
}

/// `a^dagger b`.
pub fn adjoint_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows(), "matmul shape mismatch");
    from_faer(&(view(a).adjoint() * view(b)))
}

pub fn eigh(m: &Matrix) -> Result<Eigh> {
    let a = to_faer(m)?;
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let n = m.nrows();
    let s = evd.S();
    let u = evd.U();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let vectors = Matrix::from_fn(n, n, |r, c| u[(r, c)]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, sorted ascending.
pub fn eigvalsh(m: &Matrix) -> Result<Vec<f64>> {
    let a = to_faer(m)?;
    let v = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence);
    }
    Ok(v)
}

impl Eigh {
    /// `Q f(Lambda) Q^dagger` for a complex-valued function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        matmul(&scaled, &self.vectors.adjoint())
    }
}
