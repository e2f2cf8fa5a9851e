use super::{hermitian_eig, identity, projector, rank_of_sigma, rank_tol, svd, CMat, CVec};

/// Column-pivoted Gram-Schmidt with one reorthogonalization pass. At each
/// step the remaining column with the largest residual is taken; the process
/// stops once every residual is below `rank_tol` times the largest input
/// column norm, so rounding noise is never promoted to a basis vector.
pub fn orthonormalize(cols: &CMat) -> CMat {
    orthonormalize_with(cols, rank_tol(cols.nrows(), cols.ncols()))
}

pub fn orthonormalize_with(cols: &CMat, rtol: f64) -> CMat {
    let n = cols.nrows();
    let mut resid: Vec<CVec> = cols.column_iter().map(|c| c.into_owned()).collect();
    let scale = resid.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::with_capacity(resid.len().min(n));
    while basis.len() < n && !resid.is_empty() {
        let (j, best) = resid
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best <= rtol * scale || best == 0.0 {
            break;
        }
        let mut w = resid.swap_remove(j);
        for q in &basis {
            let h = q.dotc(&w);
            w.axpy(-h, q, super::re(1.0));
        }
        let q = w.unscale(w.norm());
        for c in resid.iter_mut() {
            let h = q.dotc(c);
            c.axpy(-h, &q, super::re(1.0));
        }
        basis.push(q);
    }
    if basis.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&basis)
    }
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`, read off the eigenvectors of `I - Q Q*`.
pub fn orthogonal_complement(q: &CMat) -> CMat {
    let n = q.nrows();
    let k = q.ncols();
    if k == 0 {
        return identity(n);
    }
    if k >= n {
        return CMat::zeros(n, 0);
    }
    let p = identity(n) - projector(q);
    let e = hermitian_eig(&p).expect("projector is Hermitian");
    e.vectors.columns(0, n - k).into_owned()
}

/// Orthonormal basis of the null space of `m`.
pub fn nullspace(m: &CMat) -> CMat {
    nullspace_with(m, rank_tol(m.nrows(), m.ncols()))
}

/// Null space where singular values up to `rtol * sigma_1` count as zero.
pub fn nullspace_with(m: &CMat, rtol: f64) -> CMat {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return identity(cols);
    }
    let s = svd(m);
    let r = rank_of_sigma(&s.sigma, rtol);
    orthogonal_complement(&s.v.columns(0, r).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, numerical_rank};
    use approx::assert_abs_diff_eq;
    use nalgebra::Complex;

    fn orthonormality_defect(q: &CMat) -> f64 {
        (q.adjoint() * q - identity(q.ncols())).norm()
    }

    #[test]
    fn parallel_pair_collapses_to_one_vector() {
        let v = from_real(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let q = orthonormalize(&v);
        assert_eq!(q.ncols(), 1);
        assert_abs_diff_eq!(q[(0, 0)].re.abs(), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(q[(1, 0)].re.abs(), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn zero_input_gives_empty_basis() {
        assert_eq!(orthonormalize(&CMat::zeros(4, 3)).ncols(), 0);
    }

    #[test]
    fn near_dependent_columns_stay_orthonormal() {
        // Hilbert-like columns lose orthogonality under single-pass MGS.
        let n = 12;
        let h = CMat::from_fn(n, 8, |i, j| Complex::new(1.0 / (i + j + 1) as f64, 0.0));
        let q = orthonormalize(&h);
        assert!(orthonormality_defect(&q) < 1e-13);
        assert_eq!(q.ncols(), numerical_rank(&h));
    }

    #[test]
    fn complement_and_nullspace() {
        let a = from_real(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let k = nullspace(&a);
        assert_eq!(k.ncols(), 1);
        assert!((&a * &k).norm() < 1e-14);
        let q = orthonormalize(&a.transpose());
        let c = orthogonal_complement(&q);
        assert_eq!(c.ncols(), 1);
        assert!((q.adjoint() * &c).norm() < 1e-14);
        assert!(orthonormality_defect(&c) < 1e-14);
    }
}
