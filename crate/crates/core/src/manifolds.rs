//! The matrix sets `M(S, S') = { A : S + A S = S' }` for `S ⊆ S'` and their
//! refinements: invertible, Hermitian, Hermitian invertible, positive, and
//! Hermitian with `V* A V` invertible.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_defect, hermitian_eig, hstack, identity, orthogonal_complement, orthonormalize,
    rank_tol, re, spectral_norm, svd, CMat, DenseMatrix, Field, C64,
};
use crate::subspace::{outward_directions, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ManifoldClass {
    M,
    MInv,
    MSym,
    MSymInv,
    MPos,
    MSymT,
}

impl ManifoldClass {
    pub const ALL: [ManifoldClass; 6] = [
        ManifoldClass::M,
        ManifoldClass::MInv,
        ManifoldClass::MSym,
        ManifoldClass::MSymInv,
        ManifoldClass::MPos,
        ManifoldClass::MSymT,
    ];

    pub fn is_hermitian_class(self) -> bool {
        !matches!(self, ManifoldClass::M | ManifoldClass::MInv)
    }

    /// Every member of `self` is a member of `other`.
    pub fn contained_in(self, other: ManifoldClass) -> bool {
        use ManifoldClass::*;
        self == other
            || other == M
            || matches!(
                (self, other),
                (MSymInv, MInv)
                    | (MSymInv, MSym)
                    | (MPos, MInv)
                    | (MPos, MSym)
                    | (MPos, MSymInv)
                    | (MPos, MSymT)
                    | (MSymT, MSym)
            )
    }
}

impl fmt::Display for ManifoldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ManifoldClass::M => "M",
            ManifoldClass::MInv => "M_inv",
            ManifoldClass::MSym => "M_sym",
            ManifoldClass::MSymInv => "M_syminv",
            ManifoldClass::MPos => "M_pos",
            ManifoldClass::MSymT => "M_symT",
        })
    }
}

impl FromStr for ManifoldClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        Ok(match key.as_str() {
            "m" => ManifoldClass::M,
            "minv" => ManifoldClass::MInv,
            "msym" => ManifoldClass::MSym,
            "msyminv" => ManifoldClass::MSymInv,
            "mpos" => ManifoldClass::MPos,
            "msymt" => ManifoldClass::MSymT,
            _ => return Err(Error::Parse(format!("unknown manifold class '{s}'"))),
        })
    }
}

fn check_nested(s: &Subspace, s_prime: &Subspace, tol: f64) -> Result<()> {
    if s.ambient_dim() != s_prime.ambient_dim() {
        return Err(Error::Dimension(format!(
            "S in F^{} but S' in F^{}",
            s.ambient_dim(),
            s_prime.ambient_dim()
        )));
    }
    if !s_prime.contains(s.basis(), tol) {
        return Err(Error::Precondition("S is not contained in S'".into()));
    }
    Ok(())
}

/// A square matrix is invertible when its smallest singular value exceeds
/// `rank_tol * scale`; `scale` is `||M||_2` or, for a compression `V* A V`,
/// `||A||_2`.
fn invertible_at(m: &CMat, scale: f64) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    let s = svd(m).sigma;
    s.len() == m.nrows() && scale > 0.0 && *s.last().unwrap() > rank_tol(m.nrows(), m.ncols()) * scale
}

fn invertible(m: &CMat) -> bool {
    invertible_at(m, spectral_norm(m))
}

/// Whether `A` lies in `class(S, S')`. Subspace equality `S + A S = S'` is
/// checked as a dimension match plus `||P_{S'} - P_{S+AS}||_2 <= tol`.
pub fn membership(a: &CMat, s: &Subspace, s_prime: &Subspace, class: ManifoldClass, tol: f64) -> Result<bool> {
    check_nested(s, s_prime, tol)?;
    let n = s.ambient_dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("{}x{} operator on F^{n}", a.nrows(), a.ncols())));
    }
    let norm_a = spectral_norm(a);
    let out = outward_directions(a, s.basis(), norm_a);
    let closure = Subspace::from_orthonormal(hstack(&[s.basis(), &out]))?;
    if closure.dim() != s_prime.dim() || closure.distance(s_prime) > tol {
        return Ok(false);
    }
    let hermitian = || hermitian_defect(a) <= tol;
    Ok(match class {
        ManifoldClass::M => true,
        ManifoldClass::MInv => invertible(a),
        ManifoldClass::MSym => hermitian(),
        ManifoldClass::MSymInv => hermitian() && invertible(a),
        ManifoldClass::MPos => {
            hermitian() && {
                let e = hermitian_eig(&crate::linalg::hermitian_part(a))?;
                e.lambda_min() > rank_tol(n, n) * e.spectral_norm()
            }
        }
        ManifoldClass::MSymT => {
            hermitian() && invertible_at(&(s.basis().adjoint() * a * s.basis()), norm_a)
        }
    })
}

/// Orthonormal `[V, V', V'']` adapted to `S ⊆ S'`.
pub fn adapted_frame(s: &Subspace, s_prime: &Subspace) -> Result<(CMat, CMat, CMat)> {
    check_nested(s, s_prime, 1e-10)?;
    let v = s.basis().clone();
    let sp = s_prime.basis();
    let q = s_prime.dim() - s.dim();
    // For nested subspaces the residual of S' against S has singular values
    // that are exactly zero or one.
    let r = sp - &v * (v.adjoint() * sp);
    let sv = svd(&r);
    if q > 0 && sv.sigma.get(q - 1).is_none_or(|&x| x < 0.5) {
        return Err(Error::Precondition("could not split S' into S and its complement".into()));
    }
    let lead = sv.u.columns(0, q).into_owned();
    let vp = orthonormalize(&(&lead - &v * (v.adjoint() * &lead)));
    let vpp = orthogonal_complement(&hstack(&[&v, &vp]));
    Ok((v, vp, vpp))
}

/// A positive member of `M(S, S')` and the Hermitian swap map it was
/// shifted from.
#[derive(Clone, Debug)]
pub struct PositiveMember {
    pub matrix: DenseMatrix,
    /// `v_i <-> v_{p+i}` for `i <= q`, identity elsewhere.
    pub swap: CMat,
    /// Shift added to `swap`; zero when `q = 0`.
    pub omega: f64,
}

pub fn construct_positive_member(s: &Subspace, s_prime: &Subspace) -> Result<PositiveMember> {
    let (p, n) = (s.dim(), s.ambient_dim());
    let q = s_prime.dim().saturating_sub(p);
    if q > p {
        return Err(Error::Precondition(format!("M(S, S') is empty for q = {q} > p = {p}")));
    }
    let (v, vp, vpp) = adapted_frame(s, s_prime)?;
    let w = hstack(&[&v, &vp, &vpp]);
    let mut m = CMat::identity(n, n);
    for i in 0..q {
        m[(i, i)] = C64::new(0.0, 0.0);
        m[(p + i, p + i)] = C64::new(0.0, 0.0);
        m[(i, p + i)] = re(1.0);
        m[(p + i, i)] = re(1.0);
    }
    let swap = crate::linalg::hermitian_part(&(&w * m * w.adjoint()));
    // The swap has eigenvalues +-1, so it needs a shift exactly when q >= 1.
    let lambda_min = if q == 0 { 1.0 } else { hermitian_eig(&swap)?.lambda_min() };
    let omega = if lambda_min > 0.0 { 0.0 } else { 1.0 + lambda_min.abs() };
    let a = &swap + identity(n) * re(omega);
    let field = s.field().join(s_prime.field());
    let a = if field == Field::Real { a.map(|z| re(z.re)) } else { a };
    Ok(PositiveMember { matrix: DenseMatrix::new(a), swap, omega })
}

/// Real dimension of `class(S, S')` for `dim S = p`, `dim S' = p + q` in
/// `F^n`, or `None` when the set is empty (`q > p`).
pub fn manifold_dimension(n: usize, p: usize, q: usize, class: ManifoldClass, field: Field) -> Result<Option<usize>> {
    if p > n || p + q > n {
        return Err(Error::Dimension(format!("p = {p}, q = {q} do not fit in n = {n}")));
    }
    if q > p {
        return Ok(None);
    }
    let alpha = field.alpha();
    let fixed = p * (n - p - q);
    Ok(Some(if class.is_hermitian_class() {
        alpha * (n * (n - 1) / 2 - fixed) + n
    } else {
        alpha * (n * n - fixed)
    }))
}

/// Real dimension of the linear space `{ A : V''* A V = 0 }` (inside all
/// matrices, or inside Hermitian ones for the Hermitian classes), computed as
/// the nullity of the constraint map on a real basis. Each class is an open
/// subset of this space, so the two agree whenever the class is non-empty.
pub fn constraint_nullity(s: &Subspace, s_prime: &Subspace, class: ManifoldClass, field: Field) -> Result<usize> {
    let (v, _, vpp) = adapted_frame(s, s_prime)?;
    let n = s.ambient_dim();
    let mut basis: Vec<CMat> = Vec::new();
    let unit = |i: usize, j: usize, z: C64| {
        let mut e = CMat::zeros(n, n);
        e[(i, j)] = z;
        e
    };
    let imag = C64::new(0.0, 1.0);
    for i in 0..n {
        for j in 0..n {
            if class.is_hermitian_class() {
                if i == j {
                    basis.push(unit(i, i, re(1.0)));
                } else if i < j {
                    basis.push(unit(i, j, re(1.0)) + unit(j, i, re(1.0)));
                    if field == Field::Complex {
                        basis.push(unit(i, j, imag) - unit(j, i, imag));
                    }
                }
            } else {
                basis.push(unit(i, j, re(1.0)));
                if field == Field::Complex {
                    basis.push(unit(i, j, imag));
                }
            }
        }
    }
    let rows = 2 * vpp.ncols() * v.ncols();
    if rows == 0 {
        return Ok(basis.len());
    }
    let mut map = CMat::zeros(rows, basis.len());
    for (k, e) in basis.iter().enumerate() {
        let img = vpp.adjoint() * e * &v;
        for (idx, z) in img.iter().enumerate() {
            map[(2 * idx, k)] = re(z.re);
            map[(2 * idx + 1, k)] = re(z.im);
        }
    }
    let sigma = svd(&map).sigma;
    let rank = crate::linalg::rank_of_sigma(&sigma, 1e-10);
    Ok(basis.len() - rank)
}

/// Geometric schedule `first * ratio^k`, `k < steps`.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonSchedule {
    pub first: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl EpsilonSchedule {
    /// `1e-12 max(1, ||A||_2)`, ratio 10, 20 steps.
    pub fn for_matrix(a: &CMat) -> Self {
        EpsilonSchedule { first: 1e-12 * spectral_norm(a).max(1.0), ratio: 10.0, steps: 20 }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(move |k| self.first * self.ratio.powi(k as i32))
    }
}

#[derive(Clone, Debug)]
pub struct Perturbed {
    pub matrix: DenseMatrix,
    pub epsilon: f64,
}

/// `A + eps I` for the first `eps` in `{0} ∪ schedule` that makes it
/// invertible and, when `s` is given, makes `V* (A + eps I) V` invertible.
pub fn perturb_to_invertible(a: &CMat, schedule: &EpsilonSchedule, s: Option<&Subspace>) -> Result<Perturbed> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let ok = |m: &CMat| {
        let scale = spectral_norm(m);
        invertible_at(m, scale) && s.is_none_or(|s| invertible_at(&(s.basis().adjoint() * m * s.basis()), scale))
    };
    for eps in std::iter::once(0.0).chain(schedule.values()) {
        let m = a + identity(n) * re(eps);
        if ok(&m) {
            return Ok(Perturbed { matrix: DenseMatrix::new(m), epsilon: eps });
        }
    }
    Err(Error::NoConvergence("perturbation schedule exhausted"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::tridiagonal_block_decomposition;
    use crate::linalg::real_diag;
    use crate::random::{gaussian_hermitian, gaussian_matrix, random_subspace, substream};
    use crate::subspace::index_of_invariance;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    /// Random `S ⊆ S'` with the given dimensions.
    fn nested(n: usize, p: usize, q: usize, field: Field, seed: u64) -> (Subspace, Subspace) {
        let mut rng = substream(seed, "nested");
        let big = random_subspace(n, p + q, field, &mut rng);
        let s = Subspace::span(&big.basis().columns(0, p).into_owned());
        (s, big)
    }

    #[test]
    fn identity_is_in_m_s_s() {
        for p in 0..5 {
            let (s, _) = nested(5, p, 0, Field::Complex, p as u64);
            for c in ManifoldClass::ALL {
                assert!(membership(&identity(5), &s, &s, c, TOL).unwrap(), "{c} p={p}");
            }
        }
    }

    #[test]
    fn membership_requires_nesting() {
        let s = Subspace::coordinate(4, &[0]);
        let sp = Subspace::coordinate(4, &[1, 2]);
        assert!(membership(&identity(4), &s, &sp, ManifoldClass::M, TOL).is_err());
    }

    #[test]
    fn swap_pattern_n4_p2_q1() {
        let s = Subspace::coordinate(4, &[0, 1]);
        let sp = Subspace::coordinate(4, &[0, 1, 2]);
        let pm = construct_positive_member(&s, &sp).unwrap();
        let w = hstack(&[s.basis(), &adapted_frame(&s, &sp).unwrap().1, &adapted_frame(&s, &sp).unwrap().2]);
        let m = w.adjoint() * &pm.swap * &w;
        let mut expect = CMat::zeros(4, 4);
        expect[(0, 2)] = re(1.0);
        expect[(2, 0)] = re(1.0);
        expect[(1, 1)] = re(1.0);
        expect[(3, 3)] = re(1.0);
        assert!((m - expect).norm() < 1e-14);
        assert!((pm.omega - 2.0).abs() < 1e-14);
        assert_eq!(pm.matrix.field(), Field::Real);
        assert!(membership(&pm.matrix, &s, &sp, ManifoldClass::MPos, TOL).unwrap());
        let dec = tridiagonal_block_decomposition(&pm.matrix, &s).unwrap();
        assert_eq!(dec.q(), 1);
    }

    #[test]
    fn q_zero_gives_identity() {
        let (s, _) = nested(6, 3, 0, Field::Real, 1);
        let pm = construct_positive_member(&s, &s).unwrap();
        assert_eq!(pm.omega, 0.0);
        assert!((pm.matrix.as_matrix() - identity(6)).norm() < 1e-14);
    }

    #[test]
    fn empty_when_q_exceeds_p() {
        let (s, sp) = nested(7, 2, 3, Field::Complex, 4);
        assert!(construct_positive_member(&s, &sp).is_err());
        assert_eq!(manifold_dimension(7, 2, 3, ManifoldClass::M, Field::Real).unwrap(), None);
        let mut rng = substream(4, "q>p");
        for _ in 0..50 {
            let a = gaussian_matrix(7, 7, Field::Complex, &mut rng);
            assert!(!membership(&a, &s, &sp, ManifoldClass::M, TOL).unwrap());
            let h = gaussian_hermitian(7, Field::Complex, &mut rng);
            assert!(!membership(&h, &s, &sp, ManifoldClass::MSym, TOL).unwrap());
        }
    }

    #[test]
    fn dimension_formula_examples() {
        assert_eq!(manifold_dimension(5, 0, 0, ManifoldClass::M, Field::Real).unwrap(), Some(25));
        assert_eq!(manifold_dimension(4, 2, 1, ManifoldClass::MSym, Field::Real).unwrap(), Some(8));
        assert_eq!(manifold_dimension(4, 2, 1, ManifoldClass::M, Field::Complex).unwrap(), Some(28));
        assert!(manifold_dimension(4, 3, 2, ManifoldClass::M, Field::Real).is_err());
    }

    #[test]
    fn dimension_matches_constraint_nullity() {
        for (k, &(n, p, q)) in [(4, 2, 1), (5, 2, 2), (6, 3, 1), (5, 0, 0), (6, 2, 0), (4, 2, 2), (7, 3, 2)]
            .iter()
            .enumerate()
        {
            for field in [Field::Real, Field::Complex] {
                let (s, sp) = nested(n, p, q, field, k as u64);
                for class in ManifoldClass::ALL {
                    assert_eq!(
                        manifold_dimension(n, p, q, class, field).unwrap(),
                        Some(constraint_nullity(&s, &sp, class, field).unwrap()),
                        "{class} n={n} p={p} q={q} {field:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn perturbation_cases() {
        let a = real_diag(&[3.0, -1.0, 2.0]);
        let sched = EpsilonSchedule::for_matrix(&a);
        let r = perturb_to_invertible(&a, &sched, None).unwrap();
        assert_eq!(r.epsilon, 0.0);
        let a = real_diag(&[0.0, 1.0]);
        let r = perturb_to_invertible(&a, &EpsilonSchedule::for_matrix(&a), None).unwrap();
        assert_eq!(r.epsilon, 1e-12);
        assert!(invertible(&r.matrix));
        let z = CMat::zeros(2, 2);
        let bad = EpsilonSchedule { first: 0.0, ratio: 1.0, steps: 3 };
        assert!(perturb_to_invertible(&z, &bad, None).is_err());
    }

    #[test]
    fn singular_t_enters_msymt() {
        // p = q: the swap map has T = 0.
        let (s, sp) = nested(6, 2, 2, Field::Complex, 11);
        let pm = construct_positive_member(&s, &sp).unwrap();
        let a = &pm.swap;
        assert!(membership(a, &s, &sp, ManifoldClass::MSym, TOL).unwrap());
        assert!(!membership(a, &s, &sp, ManifoldClass::MSymT, TOL).unwrap());
        let r = perturb_to_invertible(a, &EpsilonSchedule::for_matrix(a), Some(&s)).unwrap();
        assert!(r.epsilon > 0.0 && r.epsilon <= 1e-6);
        assert!(membership(&r.matrix, &s, &sp, ManifoldClass::MSymT, TOL).unwrap());
        assert!(membership(&r.matrix, &s, &sp, ManifoldClass::MSym, TOL).unwrap());
    }

    #[test]
    fn class_names_round_trip() {
        for c in ManifoldClass::ALL {
            assert_eq!(c.to_string().parse::<ManifoldClass>().unwrap(), c);
        }
        assert!("M_foo".parse::<ManifoldClass>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn witness_round_trip(seed in any::<u64>(), n in 2usize..10, complex in any::<bool>()) {
            let field = if complex { Field::Complex } else { Field::Real };
            let p = 1 + (seed as usize) % (n / 2).max(1);
            let q = (seed as usize / 3) % (p.min(n - p) + 1);
            let (s, sp) = nested(n, p, q, field, seed);
            let pm = construct_positive_member(&s, &sp).unwrap();
            prop_assert_eq!(index_of_invariance(&pm.matrix, &s).unwrap(), q);
            for c in ManifoldClass::ALL {
                prop_assert!(membership(&pm.matrix, &s, &sp, c, TOL).unwrap(), "{}", c);
            }
        }

        #[test]
        fn shift_stability(seed in any::<u64>(), w in -5.0f64..5.0) {
            let (n, p, q) = (7, 3, 2);
            let (s, sp) = nested(n, p, q, Field::Complex, seed);
            let pm = construct_positive_member(&s, &sp).unwrap();
            // A generic member: random blocks with the zero pattern of the frame.
            let (v, vp, vpp) = adapted_frame(&s, &sp).unwrap();
            let w_frame = hstack(&[&v, &vp, &vpp]);
            let mut rng = substream(seed, "member");
            let mut blocks = gaussian_matrix(n, n, Field::Complex, &mut rng);
            for i in p + q..n {
                for j in 0..p {
                    blocks[(i, j)] = re(0.0);
                }
            }
            let a = &w_frame * blocks * w_frame.adjoint();
            let in_m = membership(&a, &s, &sp, ManifoldClass::M, TOL).unwrap();
            prop_assert!(in_m);
            let shifted = &a + identity(n) * re(w);
            prop_assert!(membership(&shifted, &s, &sp, ManifoldClass::M, TOL).unwrap());
            let h = pm.matrix.as_matrix() + identity(n) * re(w);
            prop_assert!(membership(&h, &s, &sp, ManifoldClass::MSym, TOL).unwrap());
        }

        #[test]
        fn containment_chain(seed in any::<u64>(), w in -3.0f64..3.0) {
            let (n, p, q) = (6, 3, 1);
            let (s, sp) = nested(n, p, q, Field::Real, seed);
            let pm = construct_positive_member(&s, &sp).unwrap();
            let mut rng = substream(seed, "chain");
            // Hermitian members with the block pattern, shifted to land in
            // different classes.
            let (v, vp, vpp) = adapted_frame(&s, &sp).unwrap();
            let fr = hstack(&[&v, &vp, &vpp]);
            let mut m = gaussian_hermitian(n, Field::Real, &mut rng);
            for i in p + q..n {
                for j in 0..p {
                    m[(i, j)] = re(0.0);
                    m[(j, i)] = re(0.0);
                }
            }
            let candidates = [
                pm.matrix.as_matrix().clone(),
                pm.swap.clone(),
                &fr * &m * fr.adjoint() + identity(n) * re(w),
            ];
            for a in &candidates {
                let flags: Vec<bool> = ManifoldClass::ALL
                    .iter()
                    .map(|&c| membership(a, &s, &sp, c, TOL).unwrap())
                    .collect();
                for (i, &ci) in ManifoldClass::ALL.iter().enumerate() {
                    for (j, &cj) in ManifoldClass::ALL.iter().enumerate() {
                        if ci.contained_in(cj) && flags[i] {
                            prop_assert!(flags[j], "{} member not in {}", ci, cj);
                        }
                    }
                }
            }
        }
    }
}
