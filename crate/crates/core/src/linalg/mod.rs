//! Dense linear algebra over R or C.
//!
//! Everything is stored as `DMatrix<Complex<f64>>`; eigen and singular value
//! problems are handed to faer. A [`Field`] tag records
//! whether a matrix is real; real inputs are routed through the real eigen and
//! singular value solvers so that results stay exactly real.

mod dense;
mod factor;
mod ortho;

pub use dense::{DenseMatrix, Field};
pub use factor::{
    hermitian_eig, lstsq, matrix_power_pos, pseudo_inverse, solve_general, solve_hermitian, solve_spd,
    spectral_norm, svd, HermitianEig, Svd,
};
pub use ortho::{nullspace, nullspace_with, orthogonal_complement, orthonormalize, orthonormalize_with};

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative tolerance for rank decisions on a `rows x cols` matrix.
pub fn rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON * 32.0
}

/// Number of singular values above `rtol * sigma[0]`. Ties at the threshold
/// count as zero.
pub fn rank_of_sigma(sigma: &[f64], rtol: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().filter(|&&s| s > rtol * s1).count(),
        _ => 0,
    }
}

pub fn numerical_rank(m: &CMat) -> usize {
    rank_of_sigma(&svd(m).sigma, rank_tol(m.nrows(), m.ncols()))
}

#[inline]
pub fn re(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| re(x)))
}

pub fn real_diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&x| re(x))))
}

/// Column-wise concatenation. All blocks must share a row count.
pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Orthogonal projector `Q Q*` onto the span of orthonormal columns `q`.
pub fn projector(q: &CMat) -> CMat {
    q * q.adjoint()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

/// `||M - M*||_F / ||M||_F`, zero for the zero matrix.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / scale
    }
}

pub(crate) const HERMITIAN_RTOL: f64 = 1e-10;
