use faer::{c64, Mat, Side};

use super::{hermitian_defect, hermitian_part, rank_tol, re, CMat, Field, HERMITIAN_RTOL};
use crate::error::{Error, Result};

/// Eigendecomposition `M = U diag(values) U*` with values sorted descending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    /// `U diag(f(values)) U*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let w = re(f(l));
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition. The input is symmetrized first; a relative
/// Hermitian defect above `1e-10` is an error.
pub fn hermitian_eig(m: &CMat) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eig of {}x{} matrix", m.nrows(), m.ncols())));
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_RTOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEig { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let h = hermitian_part(m);
    // faer returns ascending eigenvalues; flip to descending while copying.
    let (values, vectors) = if Field::of(&h) == Field::Real {
        let e = Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)].re)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence("eigendecomposition"))?;
        let (s, u) = (e.S(), e.U());
        (
            (0..n).map(|i| s[n - 1 - i]).collect(),
            CMat::from_fn(n, n, |i, j| re(u[(i, n - 1 - j)])),
        )
    } else {
        let e = Mat::<c64>::from_fn(n, n, |i, j| h[(i, j)])
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence("eigendecomposition"))?;
        let (s, u) = (e.S(), e.U());
        (
            (0..n).map(|i| s[n - 1 - i].re).collect(),
            CMat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]),
        )
    };
    Ok(HermitianEig { values, vectors })
}

/// Thin singular value decomposition `M = U diag(sigma) V*`, sigma descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd { u: CMat::zeros(rows, 0), sigma: vec![], v: CMat::zeros(cols, 0) };
    }
    let (u, sigma, v) = if Field::of(m) == Field::Real {
        let f = Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)].re)
            .thin_svd()
            .expect("svd converges");
        let (u, s, v) = (f.U(), f.S(), f.V());
        (
            CMat::from_fn(rows, k, |i, j| re(u[(i, j)])),
            (0..k).map(|i| s[i]).collect::<Vec<f64>>(),
            CMat::from_fn(cols, k, |i, j| re(v[(i, j)])),
        )
    } else {
        let f = Mat::<c64>::from_fn(rows, cols, |i, j| m[(i, j)])
            .thin_svd()
            .expect("svd converges");
        let (u, s, v) = (f.U(), f.S(), f.V());
        (
            CMat::from_fn(rows, k, |i, j| u[(i, j)]),
            (0..k).map(|i| s[i].re).collect::<Vec<f64>>(),
            CMat::from_fn(cols, k, |i, j| v[(i, j)]),
        )
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    Svd {
        u: CMat::from_fn(rows, k, |i, j| u[(i, order[j])]),
        sigma: order.iter().map(|&j| sigma[j]).collect(),
        v: CMat::from_fn(cols, k, |i, j| v[(i, order[j])]),
    }
}

pub fn spectral_norm(m: &CMat) -> f64 {
    svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Solves `M X = rhs` for Hermitian invertible `M` through its eigenbasis.
pub fn solve_hermitian(m: &CMat, rhs: &CMat) -> Result<CMat> {
    check_rhs(m, rhs)?;
    let e = hermitian_eig(m)?;
    let tol = rank_tol(m.nrows(), m.ncols()) * e.spectral_norm();
    if e.values.iter().any(|l| l.abs() <= tol) {
        return Err(Error::Singular);
    }
    let mut coeffs = e.vectors.adjoint() * rhs;
    for (i, &l) in e.values.iter().enumerate() {
        coeffs.row_mut(i).unscale_mut(l);
    }
    Ok(&e.vectors * coeffs)
}

/// Solves with a Hermitian positive definite matrix by Cholesky.
pub fn solve_spd(m: &CMat, rhs: &CMat) -> Result<CMat> {
    check_rhs(m, rhs)?;
    if m.nrows() == 0 {
        return Ok(CMat::zeros(0, rhs.ncols()));
    }
    let chol = hermitian_part(m).cholesky().ok_or(Error::NotPositive)?;
    Ok(chol.solve(rhs))
}

/// LU solve for a general square system.
pub fn solve_general(m: &CMat, rhs: &CMat) -> Result<CMat> {
    check_rhs(m, rhs)?;
    if m.nrows() == 0 {
        return Ok(CMat::zeros(0, rhs.ncols()));
    }
    let x = m.clone().lu().solve(rhs).ok_or(Error::Singular)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Minimizes `||A x - rhs||` column by column for full column rank `A`, via QR.
pub fn lstsq(a: &CMat, rhs: &CMat) -> Result<CMat> {
    if a.nrows() != rhs.nrows() {
        return Err(Error::Dimension(format!(
            "lstsq with {} rows against {} rhs rows",
            a.nrows(),
            rhs.nrows()
        )));
    }
    let p = a.ncols();
    if p == 0 {
        return Ok(CMat::zeros(0, rhs.ncols()));
    }
    if a.nrows() < p {
        return Err(Error::Singular);
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let rmax = (0..p).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let tol = rank_tol(a.nrows(), p) * rmax;
    if rmax == 0.0 || (0..p).any(|i| r[(i, i)].norm() <= tol) {
        return Err(Error::Singular);
    }
    let qtb = qr.q().adjoint() * rhs;
    r.solve_upper_triangular(&qtb).ok_or(Error::Singular)
}

/// `M^s` for Hermitian positive definite `M`.
pub fn matrix_power_pos(m: &CMat, s: f64) -> Result<CMat> {
    let e = hermitian_eig(m)?;
    let tol = rank_tol(m.nrows(), m.ncols()) * e.spectral_norm();
    if e.dim() > 0 && e.lambda_min() <= tol {
        return Err(Error::NotPositive);
    }
    Ok(e.apply_fn(|l| l.powf(s)))
}

/// Moore-Penrose pseudo-inverse with the global rank tolerance.
pub fn pseudo_inverse(m: &CMat) -> CMat {
    let sv = svd(m);
    let r = super::rank_of_sigma(&sv.sigma, rank_tol(m.nrows(), m.ncols()));
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for k in 0..r {
        out += sv.v.column(k) * sv.u.column(k).adjoint() * re(1.0 / sv.sigma[k]);
    }
    out
}

fn check_rhs(m: &CMat, rhs: &CMat) -> Result<()> {
    if !m.is_square() || m.nrows() != rhs.nrows() {
        return Err(Error::Dimension(format!(
            "system {}x{} with rhs of {} rows",
            m.nrows(),
            m.ncols(),
            rhs.nrows()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, identity, real_diag};
    use nalgebra::Complex;

    fn herm3() -> CMat {
        let mut m = from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, -1.0]);
        m[(0, 2)] = Complex::new(0.0, 0.7);
        m[(2, 0)] = Complex::new(0.0, -0.7);
        m
    }

    #[test]
    fn eig_reconstructs_sorted() {
        let m = herm3();
        let e = hermitian_eig(&m).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let rec = &e.vectors * real_diag(&e.values) * e.vectors.adjoint();
        assert!((rec - &m).norm() < 1e-13);
    }

    #[test]
    fn eig_of_real_input_stays_real() {
        let m = from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(Field::of(&e.vectors), Field::Real);
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn svd_reconstructs() {
        let m = from_real(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = svd(&m);
        let rec = &s.u * real_diag(&s.sigma) * s.v.adjoint();
        assert!((rec - &m).norm() < 1e-13);
        assert!(s.sigma[0] >= s.sigma[1]);
        let c = herm3() * Complex::new(0.3, 0.9);
        let s = svd(&c);
        assert!((&s.u * real_diag(&s.sigma) * s.v.adjoint() - &c).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_svd_vectors_are_accurate() {
        // Rank-one input whose leading left vector is easy to get wrong.
        let u = from_real(6, 1, &[0.18, 0.09, -0.31, 0.03, -0.04, 0.08]);
        let v = from_real(1, 2, &[-0.08, 1.0]);
        let m = &u * &v;
        let s = svd(&m);
        let resid = &m * s.v.column(0) - s.u.column(0) * re(s.sigma[0]);
        assert!(resid.norm() < 1e-14 * s.sigma[0]);
        assert!(s.sigma[1] < 1e-15);
    }

    #[test]
    fn solvers_agree() {
        let m = herm3();
        let rhs = from_real(3, 1, &[1.0, -2.0, 0.5]);
        let x = solve_hermitian(&m, &rhs).unwrap();
        assert!((&m * &x - &rhs).norm() < 1e-13);
        let y = solve_general(&m, &rhs).unwrap();
        assert!((x - y).norm() < 1e-13);
        let spd = &m * m.adjoint() + identity(3);
        let z = solve_spd(&spd, &rhs).unwrap();
        assert!((&spd * z - &rhs).norm() < 1e-12);
    }

    #[test]
    fn singular_and_indefinite_are_reported() {
        let s = from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(solve_hermitian(&s, &identity(2)), Err(Error::Singular)));
        assert!(matches!(matrix_power_pos(&herm3(), 0.5), Err(Error::NotPositive)));
        let dep = from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(lstsq(&dep, &identity(2)), Err(Error::Singular)));
    }

    #[test]
    fn fractional_power_squares_back() {
        let m = from_real(2, 2, &[5.0, 2.0, 2.0, 3.0]);
        let h = matrix_power_pos(&m, 0.5).unwrap();
        assert!((&h * &h - &m).norm() < 1e-13);
        let inv = matrix_power_pos(&m, -1.0).unwrap();
        assert!((&inv * &m - identity(2)).norm() < 1e-13);
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = from_real(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = from_real(4, 1, &[1.0, 2.0, 2.0, 4.0]);
        let x = lstsq(&a, &b).unwrap();
        let ne = solve_general(&(a.adjoint() * &a), &(a.adjoint() * &b)).unwrap();
        assert!((x - ne).norm() < 1e-13);
    }
}
