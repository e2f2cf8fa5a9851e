//! Subspaces carried as orthonormal bases, plus the index of invariance
//! `Ind_A(S) = dim(S + A S) - dim S`.

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hstack, identity, orthogonal_complement, orthonormalize, projector, rank_of_sigma,
    rank_tol, spectral_norm, svd, CMat, CVec, Field,
};

/// A linear subspace of `F^n`, stored as an `n x k` matrix with orthonormal
/// columns. The zero subspace has `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Span of arbitrary columns; dependent columns are dropped.
    pub fn span(cols: &CMat) -> Self {
        Subspace { basis: orthonormalize(cols) }
    }

    /// Takes `basis` as is after checking that its columns are orthonormal.
    pub fn from_orthonormal(basis: CMat) -> Result<Self> {
        let defect = (basis.adjoint() * &basis - identity(basis.ncols())).norm();
        if defect > 1e-10 {
            return Err(Error::Invalid(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Subspace { basis })
    }

    pub fn zero(n: usize) -> Self {
        Subspace { basis: CMat::zeros(n, 0) }
    }

    pub fn whole(n: usize) -> Self {
        Subspace { basis: identity(n) }
    }

    /// `span(e_i : i in idx)`.
    pub fn coordinate(n: usize, idx: &[usize]) -> Self {
        let mut basis = CMat::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            basis[(i, j)] = crate::linalg::re(1.0);
        }
        Subspace::span(&basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn into_basis(self) -> CMat {
        self.basis
    }

    pub fn field(&self) -> Field {
        Field::of(&self.basis)
    }

    pub fn projector(&self) -> CMat {
        projector(&self.basis)
    }

    /// Orthogonal projection of the columns of `v`.
    pub fn project(&self, v: &CMat) -> CMat {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// Whether every column of `v` lies in the subspace up to `tol` relative
    /// to its norm.
    pub fn contains(&self, v: &CMat, tol: f64) -> bool {
        v.column_iter().all(|c| {
            let c = c.into_owned();
            let r = &c - &self.basis * (self.basis.adjoint() * &c);
            r.norm() <= tol * c.norm()
        })
    }

    /// `||P_self - P_other||_2`; equal to 1 whenever the dimensions differ.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return 1.0;
        }
        spectral_norm(&(self.projector() - other.projector()))
    }

    pub fn equals(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.dim() == other.dim() && self.distance(other) <= tol
    }
}

/// `x0 + S`.
#[derive(Clone, Debug)]
pub struct AffineSubspace {
    pub x0: CVec,
    pub dir: Subspace,
}

impl AffineSubspace {
    pub fn linear(dir: Subspace) -> Self {
        AffineSubspace { x0: CVec::zeros(dir.ambient_dim()), dir }
    }

    pub fn new(x0: CVec, dir: Subspace) -> Result<Self> {
        if x0.len() != dir.ambient_dim() {
            return Err(Error::Dimension(format!(
                "offset of length {} for a subspace of F^{}",
                x0.len(),
                dir.ambient_dim()
            )));
        }
        Ok(AffineSubspace { x0, dir })
    }
}

fn same_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(format!(
            "subspaces of F^{} and F^{}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

fn check_operator(a: &CMat, s: &Subspace) -> Result<()> {
    if !a.is_square() || a.nrows() != s.ambient_dim() {
        return Err(Error::Dimension(format!(
            "operator {}x{} on a subspace of F^{}",
            a.nrows(),
            a.ncols(),
            s.ambient_dim()
        )));
    }
    Ok(())
}

pub fn sum(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    same_ambient(a, b)?;
    Ok(Subspace::span(&hstack(&[a.basis(), b.basis()])))
}

pub fn complement(s: &Subspace) -> Subspace {
    Subspace { basis: orthogonal_complement(s.basis()) }
}

/// `A ∩ B`, computed as `(A^⊥ + B^⊥)^⊥`.
pub fn intersect(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    Ok(complement(&sum(&complement(a), &complement(b))?))
}

/// `A S`.
pub fn image(a: &CMat, s: &Subspace) -> Result<Subspace> {
    check_operator(a, s)?;
    Ok(Subspace::span(&(a * s.basis())))
}

/// Component of `A V` orthogonal to `S`, projected twice.
pub(crate) fn outward_residual(a: &CMat, v: &CMat) -> CMat {
    let mut r = a * v;
    for _ in 0..2 {
        let c = v.adjoint() * &r;
        r -= v * c;
    }
    r
}

/// Orthonormal basis of `(S + A S) ∩ S^⊥`: the leading left singular vectors
/// of the part of `A V` that leaves `S`. Directions below `rank_tol * ||A||_2`
/// (the size of the rounding error in `A V`) are discarded.
pub(crate) fn outward_directions(a: &CMat, v: &CMat, norm_a: f64) -> CMat {
    let n = v.nrows();
    if v.ncols() == 0 || norm_a == 0.0 {
        return CMat::zeros(n, 0);
    }
    let r = outward_residual(a, v);
    let sv = svd(&r);
    let tol = rank_tol(r.nrows(), r.ncols()) * norm_a;
    let q = sv.sigma.iter().filter(|&&x| x > tol).count();
    let lead = sv.u.columns(0, q).into_owned();
    orthonormalize(&(&lead - v * (v.adjoint() * &lead)))
}

/// `dim(S + A S) - dim S`.
pub fn index_of_invariance(a: &CMat, s: &Subspace) -> Result<usize> {
    check_operator(a, s)?;
    Ok(outward_directions(a, s.basis(), spectral_norm(a)).ncols())
}

/// Chain `S_0 = S, S_{i+1} = S_i + A S_i`, ending at the first invariant term.
pub fn invariant_closure(a: &CMat, s: &Subspace) -> Result<Vec<Subspace>> {
    check_operator(a, s)?;
    let norm_a = spectral_norm(a);
    let mut chain = vec![s.clone()];
    loop {
        let last = chain.last().unwrap();
        let out = outward_directions(a, last.basis(), norm_a);
        if out.ncols() == 0 {
            return Ok(chain);
        }
        chain.push(Subspace { basis: hstack(&[last.basis(), &out]) });
    }
}

/// Krylov space together with a flag that is set when the sequence became
/// invariant before reaching `k` vectors (including `b = 0`).
#[derive(Clone, Debug)]
pub struct Krylov {
    pub space: Subspace,
    pub invariant: bool,
}

/// `K_k(A, b) = span(b, A b, ..., A^{k-1} b)`, built by Arnoldi with one
/// reorthogonalization pass.
pub fn krylov(a: &CMat, b: &CVec, k: usize) -> Result<Krylov> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Dimension(format!(
            "operator {}x{} with vector of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let nb = b.norm();
    if nb == 0.0 || k == 0 {
        return Ok(Krylov { space: Subspace::zero(n), invariant: nb == 0.0 });
    }
    let tol = rank_tol(n, k);
    let mut basis: Vec<CVec> = vec![b.unscale(nb)];
    while basis.len() < k {
        let mut w = a * basis.last().unwrap();
        let scale = w.norm();
        for _ in 0..2 {
            for q in &basis {
                let h = q.dotc(&w);
                w.axpy(-h, q, crate::linalg::re(1.0));
            }
        }
        let h = w.norm();
        if scale == 0.0 || h <= tol * scale {
            return Ok(Krylov { space: Subspace { basis: CMat::from_columns(&basis) }, invariant: true });
        }
        basis.push(w.unscale(h));
    }
    Ok(Krylov { space: Subspace { basis: CMat::from_columns(&basis) }, invariant: false })
}

/// Orthonormal bases of the distinct eigenspaces of a Hermitian matrix.
/// Eigenvalues closer than `1e-8 * max(1, ||A||_2)` share a block.
#[derive(Clone, Debug)]
pub struct EigenspaceSplit {
    pub values: Vec<f64>,
    pub blocks: Vec<CMat>,
}

impl EigenspaceSplit {
    pub fn new(a: &CMat) -> Result<Self> {
        let e = hermitian_eig(a)?;
        let thr = 1e-8 * e.spectral_norm().max(1.0);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..e.dim() {
            match groups.last_mut() {
                Some(g) if e.values[*g.last().unwrap()] - e.values[i] <= thr => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        let values = groups
            .iter()
            .map(|g| g.iter().map(|&i| e.values[i]).sum::<f64>() / g.len() as f64)
            .collect();
        let blocks = groups
            .iter()
            .map(|g| e.vectors.columns(g[0], g.len()).into_owned())
            .collect();
        Ok(EigenspaceSplit { values, blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// `u` and `v` are orthogonal within every eigenspace:
/// `|<Q_i* u, Q_i* v>| <= tol ||u|| ||v||` for each block `Q_i`.
pub fn strongly_orthogonal(u: &CVec, v: &CVec, split: &EigenspaceSplit, tol: f64) -> bool {
    let bound = tol * u.norm() * v.norm();
    split.blocks.iter().all(|q| {
        let pu = q.adjoint() * u;
        let pv = q.adjoint() * v;
        pu.dotc(&pv).norm() <= bound
    })
}

/// Numerical dimension of the span of `cols` under the global rank tolerance.
pub fn span_dim(cols: &CMat) -> usize {
    rank_of_sigma(&svd(cols).sigma, rank_tol(cols.nrows(), cols.ncols()))
}
