//! Seeded random instances. A master seed fans out into named substreams so
//! that adding a consumer never perturbs the draws of another.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eig, orthonormalize, real_diag, CMat, CVec, Field};
use crate::subspace::Subspace;

pub type Stream = ChaCha8Rng;

/// Independent stream derived from `master` and a label.
pub fn substream(master: u64, name: &str) -> Stream {
    // FNV-1a over the label picks the ChaCha stream id.
    let id = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn scalar(field: Field, rng: &mut impl Rng) -> Complex<f64> {
    match field {
        Field::Real => Complex::new(normal(rng), 0.0),
        Field::Complex => Complex::new(normal(rng), normal(rng)) / 2f64.sqrt(),
    }
}

pub fn gaussian_vector(n: usize, field: Field, rng: &mut impl Rng) -> CVec {
    CVec::from_fn(n, |_, _| scalar(field, rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, field: Field, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| scalar(field, rng))
}

/// Gaussian Hermitian matrix `(G + G*) / 2`.
pub fn gaussian_hermitian(n: usize, field: Field, rng: &mut impl Rng) -> CMat {
    let g = gaussian_matrix(n, n, field, rng);
    crate::linalg::hermitian_part(&g)
}

pub fn random_unitary(n: usize, field: Field, rng: &mut impl Rng) -> CMat {
    loop {
        let q = orthonormalize(&gaussian_matrix(n, n, field, rng));
        if q.ncols() == n {
            return q;
        }
    }
}

pub fn random_subspace(n: usize, k: usize, field: Field, rng: &mut impl Rng) -> Subspace {
    let q = random_unitary(n, field, rng);
    Subspace::from_orthonormal(q.columns(0, k).into_owned()).expect("unitary columns")
}

/// `U diag(values) U*` for a random unitary `U`.
pub fn hermitian_with_spectrum(values: &[f64], field: Field, rng: &mut impl Rng) -> CMat {
    let u = random_unitary(values.len(), field, rng);
    crate::linalg::hermitian_part(&(&u * real_diag(values) * u.adjoint()))
}

/// Indefinite Hermitian matrix with `|lambda|` drawn from `[0.5, 4]` and
/// random signs.
pub fn random_hermitian_invertible(n: usize, field: Field, rng: &mut impl Rng) -> CMat {
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let mag = rng.random_range(0.5..4.0);
            if rng.random_bool(0.5) { mag } else { -mag }
        })
        .collect();
    hermitian_with_spectrum(&values, field, rng)
}

/// Positive definite matrix with spectrum in `[lo, hi]`.
pub fn random_spd(n: usize, lo: f64, hi: f64, field: Field, rng: &mut impl Rng) -> CMat {
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    hermitian_with_spectrum(&values, field, rng)
}

/// A Hermitian matrix built in a random unitary frame `W = [V V' V'']` so that
/// `S = span V` has index exactly `q` (see [`crate::decomposition`] for the
/// block pattern). The matrix is shifted, if needed, so that
/// `min |lambda| >= 0.1 max |lambda|`.
#[derive(Clone, Debug)]
pub struct Structured {
    pub a: CMat,
    pub s: Subspace,
    pub frame: CMat,
    pub q: usize,
}

pub fn structured_hermitian(n: usize, p: usize, q: usize, field: Field, rng: &mut impl Rng) -> Structured {
    assert!(p + q <= n && q <= p, "need q <= min(p, n - p)");
    let w = random_unitary(n, field, rng);
    let mut m = gaussian_hermitian(n, field, rng);
    // Zero the coupling between S and (S + AS)^⊥, and keep only q columns of
    // S^⊥ coupled to S.
    for i in (p + q)..n {
        for j in 0..p {
            m[(i, j)] = Complex::new(0.0, 0.0);
            m[(j, i)] = Complex::new(0.0, 0.0);
        }
    }
    let e = hermitian_eig(&m).expect("Hermitian by construction");
    let vals = &e.values;
    let spread = e.spectral_norm().max(1.0);
    let well_conditioned = |shift: f64| {
        let lo = vals.iter().map(|l| (l + shift).abs()).fold(f64::INFINITY, f64::min);
        let hi = vals.iter().map(|l| (l + shift).abs()).fold(0.0, f64::max);
        lo >= 0.1 * hi
    };
    let mut shift = 0.0;
    while !well_conditioned(shift) {
        shift = rng.random_range(-2.0..2.0) * spread;
    }
    for i in 0..n {
        m[(i, i)] += Complex::new(shift, 0.0);
    }
    let a = crate::linalg::hermitian_part(&(&w * m * w.adjoint()));
    let s = Subspace::from_orthonormal(w.columns(0, p).into_owned()).expect("unitary columns");
    Structured { a, s, frame: w, q }
}

/// Non-Hermitian analogue of [`structured_hermitian`]: the block of
/// `W* A W` mapping `S` into `(S + AS)^⊥` is zero. Conditioned like above.
pub fn structured_general(n: usize, p: usize, q: usize, field: Field, rng: &mut impl Rng) -> Structured {
    assert!(p + q <= n && q <= p, "need q <= min(p, n - p)");
    let w = random_unitary(n, field, rng);
    loop {
        let mut m = gaussian_matrix(n, n, field, rng);
        for i in (p + q)..n {
            for j in 0..p {
                m[(i, j)] = Complex::new(0.0, 0.0);
            }
        }
        let s = crate::linalg::svd(&m).sigma;
        let (hi, lo) = (s[0], s[n - 1]);
        if lo >= 0.05 * hi {
            let a = &w * m * w.adjoint();
            let sub = Subspace::from_orthonormal(w.columns(0, p).into_owned()).expect("unitary columns");
            return Structured { a, s: sub, frame: w.clone(), q };
        }
    }
}

/// Hermitian instance with `Img T ∩ Img B* = {0}`, `n = p + q + r`: `T`
/// kills the last `q` basis directions of `S`, which are exactly the
/// directions `B*` reaches.
pub fn trivial_intersection_hermitian(p: usize, q: usize, r: usize, field: Field, rng: &mut impl Rng) -> Structured {
    assert!(q <= p, "need q <= p");
    let n = p + q + r;
    loop {
        let mut m = CMat::zeros(n, n);
        for i in 0..(p - q) {
            let mag = rng.random_range(1.0..3.0);
            m[(i, i)] = Complex::new(if rng.random_bool(0.5) { mag } else { -mag }, 0.0);
        }
        let bq = gaussian_matrix(q, q, field, rng);
        for i in 0..q {
            for j in 0..q {
                m[(p + i, p - q + j)] = bq[(i, j)];
                m[(p - q + j, p + i)] = bq[(i, j)].conj();
            }
        }
        let c = gaussian_hermitian(q + r, field, rng);
        m.view_mut((p, p), (q + r, q + r)).copy_from(&c);
        let w = random_unitary(n, field, rng);
        let a = crate::linalg::hermitian_part(&(&w * &m * w.adjoint()));
        let e = hermitian_eig(&a).expect("Hermitian by construction");
        let lo = e.values.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        let b_ok = q == 0 || crate::linalg::svd(&bq).sigma[q - 1] > 0.1;
        if lo > 0.05 * e.spectral_norm() && b_ok {
            let s = Subspace::from_orthonormal(w.columns(0, p).into_owned()).expect("unitary columns");
            return Structured { a, s, frame: w, q };
        }
    }
}
