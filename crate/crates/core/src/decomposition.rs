//! Block tridiagonal form of a Hermitian `A` adapted to a subspace `S`.
//!
//! With `V` spanning `S`, `V'` spanning `(S + AS) ∩ S^⊥` and `V''` the rest,
//!
//! ```text
//!            [ T  B*  0  ]
//! W* A W  =  [ B  C   D* ]      W = [V V' V''],  H = [T; B].
//!            [ 0  D   E  ]
//! ```
//!
//! `H` has full column rank `p` when `A` is invertible, and `B` has rank
//! `q = Ind_A(S)`.

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hermitian_part, hstack, identity, orthogonal_complement, rank_of_sigma,
    rank_tol, re, solve_spd, svd, vstack, CMat, CVec,
};
use crate::subspace::{outward_directions, Subspace};

#[derive(Clone, Debug)]
pub struct TridiagDecomp {
    pub v: CMat,
    pub vp: CMat,
    pub vpp: CMat,
    pub t: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
    pub e: CMat,
    /// Smallest eigenvalue of `A`; `omega_min = -lambda_min`.
    pub lambda_min: f64,
    pub norm2: f64,
    a: CMat,
}

pub fn tridiagonal_block_decomposition(a: &CMat, s: &Subspace) -> Result<TridiagDecomp> {
    if !a.is_square() || a.nrows() != s.ambient_dim() {
        return Err(Error::Dimension(format!(
            "operator {}x{} on a subspace of F^{}",
            a.nrows(),
            a.ncols(),
            s.ambient_dim()
        )));
    }
    let eig = hermitian_eig(a)?;
    let a = hermitian_part(a);
    let v = s.basis().clone();
    let p = v.ncols();

    let vp = outward_directions(&a, &v, eig.spectral_norm());
    if vp.ncols() > p {
        return Err(Error::Precondition("outward directions exceed dim S".into()));
    }
    let vpp = orthogonal_complement(&hstack(&[&v, &vp]));

    let t = hermitian_part(&(v.adjoint() * &a * &v));
    let b = vp.adjoint() * &a * &v;
    let c = hermitian_part(&(vp.adjoint() * &a * &vp));
    let d = vpp.adjoint() * &a * &vp;
    let e = hermitian_part(&(vpp.adjoint() * &a * &vpp));
    Ok(TridiagDecomp {
        v,
        vp,
        vpp,
        t,
        b,
        c,
        d,
        e,
        lambda_min: eig.lambda_min(),
        norm2: eig.spectral_norm(),
        a,
    })
}

impl TridiagDecomp {
    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn p(&self) -> usize {
        self.v.ncols()
    }

    pub fn q(&self) -> usize {
        self.vp.ncols()
    }

    /// Dimension of `(S + AS)^⊥`.
    pub fn r(&self) -> usize {
        self.vpp.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn omega_min(&self) -> f64 {
        -self.lambda_min
    }

    /// Safety margin kept between a finite shift and `omega_min`.
    pub fn guard(&self) -> f64 {
        1e-8 * self.norm2.max(1.0)
    }

    pub fn check_shift(&self, omega: f64) -> Result<()> {
        let bound = self.omega_min() + self.guard();
        if omega.is_finite() && omega >= bound {
            Ok(())
        } else {
            Err(Error::ShiftOutOfRange { omega, bound })
        }
    }

    /// `H = [T; B]`.
    pub fn h(&self) -> CMat {
        vstack(&[&self.t, &self.b])
    }

    /// `W = [V V' V'']`.
    pub fn frame(&self) -> CMat {
        hstack(&[&self.v, &self.vp, &self.vpp])
    }

    /// `W* A W` rebuilt from the blocks, with the corner blocks set to zero.
    pub fn assembled(&self) -> CMat {
        let (p, q, r) = (self.p(), self.q(), self.r());
        let mut m = CMat::zeros(p + q + r, p + q + r);
        m.view_mut((0, 0), (p, p)).copy_from(&self.t);
        m.view_mut((p, 0), (q, p)).copy_from(&self.b);
        m.view_mut((0, p), (p, q)).copy_from(&self.b.adjoint());
        m.view_mut((p, p), (q, q)).copy_from(&self.c);
        m.view_mut((p + q, p), (r, q)).copy_from(&self.d);
        m.view_mut((p, p + q), (q, r)).copy_from(&self.d.adjoint());
        m.view_mut((p + q, p + q), (r, r)).copy_from(&self.e);
        m
    }

    /// `||A - W (W* A W) W*||_F / ||A||_F` using the assembled blocks.
    pub fn reconstruction_error(&self) -> f64 {
        let w = self.frame();
        let rebuilt = &w * self.assembled() * w.adjoint();
        (rebuilt - &self.a).norm() / self.a.norm().max(f64::MIN_POSITIVE)
    }

    /// Splits `b` into `(V* b, V'* b, V''* b)`.
    pub fn coordinates(&self, b: &CVec) -> (CVec, CVec, CVec) {
        (self.v.adjoint() * b, self.vp.adjoint() * b, self.vpp.adjoint() * b)
    }
}

/// Orthonormal basis `N = [N1; N2]` of the null space of `H*`.
#[derive(Clone, Debug)]
pub struct NullspaceN {
    pub n: CMat,
    pub n1: CMat,
    pub n2: CMat,
}

pub fn nullspace_n(dec: &TridiagDecomp) -> Result<NullspaceN> {
    let (p, q) = (dec.p(), dec.q());
    let h = dec.h();
    let sv = svd(&h);
    if rank_of_sigma(&sv.sigma, rank_tol(h.nrows(), h.ncols())) < p {
        return Err(Error::Precondition("H = [T; B] is rank deficient; A is singular on S".into()));
    }
    let n = orthogonal_complement(&sv.u.columns(0, p).into_owned());
    debug_assert_eq!(n.ncols(), q);
    Ok(NullspaceN { n1: n.rows(0, p).into_owned(), n2: n.rows(p, q).into_owned(), n })
}

/// `E_w = E + wI`, `F_w = D* E_w^{-1} D` and
/// `G_w = [[T, B*], [B, C - F_w]] + wI` for one finite shift.
#[derive(Clone, Debug)]
pub struct ShiftedBlocks {
    pub omega: f64,
    /// `E_w^{-1} D`.
    pub e_inv_d: CMat,
    pub f: CMat,
    pub g: CMat,
}

pub fn shifted_blocks(dec: &TridiagDecomp, omega: f64) -> Result<ShiftedBlocks> {
    dec.check_shift(omega)?;
    let (p, q, r) = (dec.p(), dec.q(), dec.r());
    let e_w = &dec.e + identity(r) * re(omega);
    let e_inv_d = solve_spd(&e_w, &dec.d)?;
    let f = hermitian_part(&(dec.d.adjoint() * &e_inv_d));
    let cf = &dec.c - &f;
    let mut g = vstack(&[&hstack(&[&dec.t, &dec.b.adjoint()]), &hstack(&[&dec.b, &cf])]);
    g += identity(p + q) * re(omega);
    Ok(ShiftedBlocks { omega, e_inv_d, f, g: hermitian_part(&g) })
}

impl ShiftedBlocks {
    /// `G_w^{-1} rhs`; `G_w` is positive definite above `omega_min`.
    pub fn g_solve(&self, rhs: &CMat) -> Result<CMat> {
        solve_spd(&self.g, rhs)
    }

    /// `D* E_w^{-1} y`.
    pub fn d_e_inv(&self, y: &CVec) -> CVec {
        self.e_inv_d.adjoint() * y
    }
}

/// Problem extended by one dimension so that `n > p + q` holds.
#[derive(Clone, Debug)]
pub struct Augmented {
    pub a: CMat,
    pub s: Subspace,
    pub b: CVec,
    /// False when the input already had `n > p + q` and was returned as is.
    pub applied: bool,
}

/// When `n = p + q`, embeds the problem as `blockdiag(A, lambda_min(A))`,
/// `S x {0}` and `(b, alpha)`. Solutions of the extended problem are `(x, 0)`.
pub fn augment_reduction(a: &CMat, s: &Subspace, b: &CVec, alpha: f64) -> Result<Augmented> {
    let dec = tridiagonal_block_decomposition(a, s)?;
    if b.len() != dec.n() {
        return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), dec.n())));
    }
    if dec.r() > 0 {
        return Ok(Augmented { a: dec.a.clone(), s: s.clone(), b: b.clone(), applied: false });
    }
    let n = dec.n();
    let mut big = CMat::zeros(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(&dec.a);
    big[(n, n)] = re(dec.lambda_min);
    let basis = vstack(&[s.basis(), &CMat::zeros(1, s.dim())]);
    let mut bb = CVec::zeros(n + 1);
    bb.rows_mut(0, n).copy_from(b);
    bb[n] = re(alpha);
    Ok(Augmented { a: big, s: Subspace::from_orthonormal(basis)?, b: bb, applied: true })
}
