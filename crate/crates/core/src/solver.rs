//! The solution family
//!
//! ```text
//! x_{b,w,s} = x0 + V (V* A A_w^s A V)^{-1} V* A A_w^s (b - A x0),   A_w = A + wI,
//! ```
//!
//! its limit `x_{b,inf}` (the residual minimizer over `x0 + S`), the maps
//! `D_A(w)` and the two-equation system that characterizes the differences
//! `d = V*(x_{b,w} - x_{b,mu})`.
//!
//! Direct solves use one cached eigendecomposition `A = U L U*`. In that basis
//! `x_{b,w,s}` is a weighted least squares problem
//! `min_y || (L + w)^{s/2} (U* r - L U* V y) ||`, solved by QR so the Gram
//! matrix is never formed.

use std::sync::Arc;

use crate::decomposition::{nullspace_n, shifted_blocks, TridiagDecomp};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, lstsq, rank_tol, re, solve_spd, vstack, CMat, CVec, Field, HermitianEig,
};
use crate::subspace::{AffineSubspace, Subspace};

/// A shift `w`, or the limit `w -> inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shift {
    Finite(f64),
    Infinite,
}

impl From<f64> for Shift {
    fn from(w: f64) -> Self {
        Shift::Finite(w)
    }
}

impl std::fmt::Display for Shift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shift::Finite(w) => write!(f, "{w:.16e}"),
            Shift::Infinite => f.write_str("inf"),
        }
    }
}

/// `A`, `x0 + S` and `b`, with the spectral data of `A` cached.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    a: Arc<CMat>,
    eig: Arc<HermitianEig>,
    /// `U* V`.
    uv: Arc<CMat>,
    affine: AffineSubspace,
    b: CVec,
}

impl ProblemInstance {
    pub fn new(a: &CMat, affine: AffineSubspace, b: CVec) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || affine.dir.ambient_dim() != n || b.len() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, S lives in F^{}, b has length {}",
                a.nrows(),
                a.ncols(),
                affine.dir.ambient_dim(),
                b.len()
            )));
        }
        let eig = hermitian_eig(a)?;
        let tol = rank_tol(n, n) * eig.spectral_norm();
        if eig.values.iter().any(|l| l.abs() <= tol) {
            return Err(Error::Singular);
        }
        let uv = eig.vectors.adjoint() * affine.dir.basis();
        Ok(ProblemInstance {
            a: Arc::new(crate::linalg::hermitian_part(a)),
            eig: Arc::new(eig),
            uv: Arc::new(uv),
            affine,
            b,
        })
    }

    pub fn linear(a: &CMat, s: Subspace, b: CVec) -> Result<Self> {
        ProblemInstance::new(a, AffineSubspace::linear(s), b)
    }

    /// Same `A` and `x0 + S` with a new right-hand side; the spectral data is
    /// shared, not recomputed.
    pub fn with_rhs(&self, b: CVec) -> Result<Self> {
        if b.len() != self.n() {
            return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), self.n())));
        }
        Ok(ProblemInstance { b, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.affine.dir.dim()
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CVec {
        &self.b
    }

    pub fn subspace(&self) -> &Subspace {
        &self.affine.dir
    }

    pub fn affine(&self) -> &AffineSubspace {
        &self.affine
    }

    pub fn eig(&self) -> &HermitianEig {
        &self.eig
    }

    pub fn field(&self) -> Field {
        Field::of(&self.a).join(self.affine.dir.field()).join(Field::of(&CMat::from_column_slice(
            self.b.len(),
            1,
            self.b.as_slice(),
        )))
    }

    /// `-lambda_min(A)`: shifts must stay above this.
    pub fn omega_min(&self) -> f64 {
        -self.eig.lambda_min()
    }

    pub fn guard(&self) -> f64 {
        1e-8 * self.eig.spectral_norm().max(1.0)
    }

    pub fn is_positive(&self) -> bool {
        self.eig.lambda_min() > 0.0
    }

    pub fn check_shift(&self, omega: Shift) -> Result<()> {
        match omega {
            Shift::Infinite => Ok(()),
            Shift::Finite(w) => {
                let bound = self.omega_min() + self.guard();
                if w.is_finite() && w >= bound {
                    Ok(())
                } else {
                    Err(Error::ShiftOutOfRange { omega: w, bound })
                }
            }
        }
    }

    /// `b - A x0`.
    pub fn residual_rhs(&self) -> CVec {
        &self.b - &*self.a * &self.affine.x0
    }

    /// Per-eigenvalue weights `(lambda + w)^{s/2}`, all ones at `w = inf`.
    fn weights(&self, omega: Shift, s: f64) -> Result<Vec<f64>> {
        self.check_shift(omega)?;
        Ok(match omega {
            Shift::Infinite => vec![1.0; self.n()],
            Shift::Finite(w) => self.eig.values.iter().map(|l| (l + w).powf(0.5 * s)).collect(),
        })
    }

    /// Coordinates `y` minimizing `|| W (U* rhs - L U* V y) ||` for each
    /// column of `rhs_hat = U* rhs`.
    fn weighted_coords(&self, weights: &[f64], rhs_hat: &CMat) -> Result<CMat> {
        let mut m = (*self.uv).clone();
        let mut rhs = rhs_hat.clone();
        for (i, (&w, &l)) in weights.iter().zip(&self.eig.values).enumerate() {
            m.row_mut(i).scale_mut(w * l);
            rhs.row_mut(i).scale_mut(w);
        }
        lstsq(&m, &rhs).map_err(|e| match e {
            Error::Singular => Error::Precondition("inner Gram matrix V* A A_w^s A V is singular".into()),
            other => other,
        })
    }
}

/// `x_{b,w,s}`. Any real `s` is accepted; `w = inf` gives the limit, which
/// does not depend on `s`.
pub fn solve_parametric(inst: &ProblemInstance, omega: Shift, s: f64) -> Result<CVec> {
    let weights = inst.weights(omega, s)?;
    let r_hat = inst.eig.vectors.adjoint() * inst.residual_rhs();
    let y = inst.weighted_coords(&weights, &CMat::from_column_slice(inst.n(), 1, r_hat.as_slice()))?;
    Ok(&inst.affine.x0 + inst.subspace().basis() * y.column(0))
}

/// `x_{b,w} = x_{b,w,-1}`.
pub fn solve_weighted(inst: &ProblemInstance, omega: f64) -> Result<CVec> {
    solve_parametric(inst, Shift::Finite(omega), -1.0)
}

/// `x_{b,inf}`: the minimizer of `||b - A x||` over `x0 + S`.
pub fn solve_limit(inst: &ProblemInstance) -> Result<CVec> {
    solve_parametric(inst, Shift::Infinite, -1.0)
}

/// `V* D_A(w)`, the `p x n` coordinate form of
/// `D_A(w) = V (V* A A_w^{-1} A V)^{-1} V* A A_w^{-1}`.
pub fn d_operator(inst: &ProblemInstance, omega: Shift) -> Result<CMat> {
    let weights = inst.weights(omega, -1.0)?;
    inst.weighted_coords(&weights, &inst.eig.vectors.adjoint())
}

/// `D_A(w)` as an `n x n` matrix.
pub fn d_map(inst: &ProblemInstance, omega: Shift) -> Result<CMat> {
    Ok(inst.subspace().basis() * d_operator(inst, omega)?)
}

/// `dD_A(w, mu) = D_A(w) - D_A(mu)`.
pub fn d_diff(inst: &ProblemInstance, omega: Shift, mu: Shift) -> Result<CMat> {
    let v = inst.subspace().basis();
    Ok(v * (d_operator(inst, omega)? - d_operator(inst, mu)?))
}

/// `V*(x_{b,w} - x_{b,mu})` from two direct solves.
pub fn d_direct(inst: &ProblemInstance, omega: Shift, mu: Shift) -> Result<CVec> {
    let xw = solve_parametric(inst, omega, -1.0)?;
    let xm = solve_parametric(inst, mu, -1.0)?;
    Ok(inst.subspace().basis().adjoint() * (xw - xm))
}

/// Solution of the two-equation system for `d = V*(x_{b,w} - x_{b,mu})`
/// together with its byproducts and per-equation residuals.
#[derive(Clone, Debug)]
pub struct SystemSolution {
    pub d: CVec,
    pub t: CVec,
    pub t_prime: CVec,
    /// `(B (H*H)^{-1} B*)^{-1} B d`, so that `d = (H*H)^{-1} B* u`.
    pub u: CVec,
    /// `[B, C - F_w] N t' - z`; agrees with `u` when the system is consistent.
    pub z_prime: CVec,
    pub residuals: SystemResiduals,
}

/// Residuals, each relative to `max(1, ||b||)`.
#[derive(Clone, Debug, Default)]
pub struct SystemResiduals {
    /// `H* G_w^{-1} (H d + ...)`.
    pub first: f64,
    /// `N t - J_mu h`.
    pub second: f64,
    /// `G_w N t' - (H d + ...)`.
    pub t_prime: f64,
    /// `d - (H*H)^{-1} B* z'`.
    pub recovery: f64,
}

impl SystemResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.t_prime).max(self.recovery)
    }
}

fn col(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

/// `J_mu h` with `J_mu = G_mu^{-1}(H (H* G_mu^{-1} H)^{-1} H* G_mu^{-1} - I)`,
/// or `J_inf = H (H*H)^{-1} H* - I`.
pub fn j_apply(dec: &TridiagDecomp, mu: Shift, h_vec: &CMat) -> Result<CMat> {
    let h = dec.h();
    match mu {
        Shift::Infinite => {
            let hh = h.adjoint() * &h;
            Ok(&h * solve_spd(&hh, &(h.adjoint() * h_vec))? - h_vec)
        }
        Shift::Finite(m) => {
            let sb = shifted_blocks(dec, m)?;
            let g = sb.g_solve(h_vec)?;
            let x = sb.g_solve(&h)?;
            let k = h.adjoint() * &x;
            Ok(&x * solve_spd(&k, &(h.adjoint() * &g))? - g)
        }
    }
}

/// The `(p+q) x (p+q)` matrix `J_mu`.
pub fn j_matrix(dec: &TridiagDecomp, mu: Shift) -> Result<CMat> {
    let m = dec.p() + dec.q();
    j_apply(dec, mu, &CMat::identity(m, m))
}

/// Solves the two-equation system for `d_{b,w,mu}` using only the blocks of
/// the decomposition. `w` must be finite; `mu` may be infinite. For an affine
/// `x0 + S`, pass `b - A x0`.
pub fn d_via_system(dec: &TridiagDecomp, b: &CVec, omega: f64, mu: Shift) -> Result<SystemSolution> {
    if b.len() != dec.n() {
        return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), dec.n())));
    }
    let (p, q) = (dec.p(), dec.q());
    let scale = b.norm().max(1.0);
    let (c, c1, c2) = dec.coordinates(b);
    let nn = nullspace_n(dec)?;
    let h = dec.h();
    let sw = shifted_blocks(dec, omega)?;
    let ew_c2 = sw.d_e_inv(&c2);

    // Second equation: N t = J_mu h_mu.
    let (h_mu, sm) = match mu {
        Shift::Infinite => (vstack(&[&col(&c), &col(&c1)]), None),
        Shift::Finite(m) => {
            let sm = shifted_blocks(dec, m)?;
            let top = col(&c);
            let bottom = col(&(&c1 - sm.d_e_inv(&c2)));
            (vstack(&[&top, &bottom]), Some(sm))
        }
    };
    let jh = j_apply(dec, mu, &h_mu)?;
    let t = nn.n.adjoint() * &jh;
    let second = (&nn.n * &t - &jh).norm() / scale;
    let nt = &nn.n * &t;

    // First equation: H* G_w^{-1}(H d + kappa N t + [0; z]) = 0.
    let bc = |f: &CMat| {
        let cf = &dec.c - f;
        crate::linalg::hstack(&[&dec.b, &cf])
    };
    let (kappa, z_low) = match &sm {
        None => (1.0, col(&ew_c2)),
        Some(sm) => {
            let z = col(&(&ew_c2 - sm.d_e_inv(&c2))) + bc(&sm.f) * &nt;
            (mu_value(mu), z)
        }
    };
    let rhs = &nt * re(kappa) + vstack(&[&CMat::zeros(p, 1), &z_low]);
    let x = sw.g_solve(&h)?;
    let k = h.adjoint() * &x;
    let d = -solve_spd(&k, &(x.adjoint() * &rhs))?;
    let inner = &h * &d + &rhs;
    let first = (x.adjoint() * &inner).norm() / scale;

    // t' from G_w N t' = H d + kappa N t + [0; z].
    let gn = &sw.g * &nn.n;
    let t_prime = if q == 0 { CMat::zeros(0, 1) } else { lstsq(&gn, &inner)? };
    let t_res = (&gn * &t_prime - &inner).norm() / scale;

    let z_prime = bc(&sw.f) * &nn.n * &t_prime - &z_low;
    let hh = h.adjoint() * &h;
    let recovered = solve_spd(&hh, &(dec.b.adjoint() * &z_prime))?;
    let recovery = (&recovered - &d).norm() / scale;
    let u = if q == 0 {
        CMat::zeros(0, 1)
    } else {
        let hb = solve_spd(&hh, &dec.b.adjoint())?;
        crate::linalg::solve_general(&(&dec.b * hb), &(&dec.b * &d))?
    };

    let v = |m: CMat| CVec::from_column_slice(m.as_slice());
    Ok(SystemSolution {
        d: v(d),
        t: v(t),
        t_prime: v(t_prime),
        u: v(u),
        z_prime: v(z_prime),
        residuals: SystemResiduals { first, second, t_prime: t_res, recovery },
    })
}

fn mu_value(mu: Shift) -> f64 {
    match mu {
        Shift::Finite(m) => m,
        Shift::Infinite => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::tridiagonal_block_decomposition;
    use crate::linalg::{from_real, hstack, identity, matrix_power_pos, solve_general};
    use crate::random::{gaussian_vector, random_hermitian_invertible, random_spd, random_subspace, substream};
    use proptest::prelude::*;
    use rand::Rng;

    fn alpha_instance(alpha: f64, b: [f64; 2]) -> ProblemInstance {
        let a = from_real(2, 2, &[alpha, 1.0, 1.0, alpha]);
        let b = CVec::from_vec(vec![re(b[0]), re(b[1])]);
        ProblemInstance::linear(&a, Subspace::coordinate(2, &[0]), b).unwrap()
    }

    /// Closed form of `V* x_{b,w}` for `A = [[a, 1], [1, a]]`, `S = span(e1)`.
    fn alpha_coord(alpha: f64, w: f64, c: f64, c1: f64) -> f64 {
        ((alpha * alpha + alpha * w - 1.0) * c + w * c1) / (alpha.powi(3) + alpha * alpha * w - alpha + w)
    }

    #[test]
    fn alpha_two_closed_form() {
        let inst = alpha_instance(2.0, [1.0, 0.0]);
        for w in [0.0, 0.25, 1.0, 3.0, 10.0, 1e3] {
            let x = solve_weighted(&inst, w).unwrap();
            assert!((x[0].re - (3.0 + 2.0 * w) / (6.0 + 5.0 * w)).abs() < 1e-14);
            assert_eq!(x[1], re(0.0));
        }
        let lim = solve_limit(&inst).unwrap();
        assert!((lim[0].re - 0.4).abs() < 1e-15);
        let d = d_direct(&inst, Shift::Finite(0.0), Shift::Finite(1.0)).unwrap();
        assert!((d[0].re - 1.0 / 22.0).abs() < 1e-15);
        let dec = tridiagonal_block_decomposition(inst.a(), inst.subspace()).unwrap();
        let sys = d_via_system(&dec, inst.b(), 0.0, Shift::Finite(1.0)).unwrap();
        assert!((sys.d[0].re - 1.0 / 22.0).abs() < 1e-14);
        assert!(sys.residuals.max() < 1e-14);
    }

    #[test]
    fn alpha_family_closed_form() {
        for (alpha, b) in [(1.5, [0.3, -0.7]), (3.0, [1.0, 2.0]), (-2.5, [-0.2, 0.9])] {
            let inst = alpha_instance(alpha, b);
            let lo = inst.omega_min() + 0.1;
            let dec = tridiagonal_block_decomposition(inst.a(), inst.subspace()).unwrap();
            for (w, m) in [(lo, lo + 1.0), (lo + 0.5, lo + 7.0), (lo + 2.0, lo + 0.3)] {
                let xw = solve_weighted(&inst, w).unwrap()[0].re;
                assert!((xw - alpha_coord(alpha, w, b[0], b[1])).abs() < 1e-13);
                let den = |s: f64| alpha.powi(3) + alpha * alpha * s - alpha + s;
                let expect = (m - w) * (alpha * alpha - 1.0) * (b[0] - alpha * b[1]) / (den(w) * den(m));
                let direct = d_direct(&inst, w.into(), m.into()).unwrap()[0].re;
                let system = d_via_system(&dec, inst.b(), w, m.into()).unwrap().d[0].re;
                assert!((direct - expect).abs() < 1e-13, "{direct} vs {expect}");
                assert!((system - expect).abs() < 1e-13, "{system} vs {expect}");
            }
        }
    }

    #[test]
    fn shift_guard() {
        let inst = alpha_instance(2.0, [1.0, 0.0]);
        assert!(matches!(solve_weighted(&inst, -1.0), Err(Error::ShiftOutOfRange { .. })));
        assert!(solve_weighted(&inst, -1.0 + 1e-6).is_ok());
        assert!(solve_weighted(&inst, f64::NAN).is_err());
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = ProblemInstance::linear(&a, Subspace::coordinate(2, &[0]), CVec::zeros(2));
        assert!(matches!(r, Err(Error::Singular)));
    }

    fn field(complex: bool) -> Field {
        if complex { Field::Complex } else { Field::Real }
    }

    struct Case {
        inst: ProblemInstance,
        omega: f64,
        mu: f64,
    }

    fn random_case(n: usize, p: usize, complex: bool, seed: u64, affine: bool) -> Case {
        let f = field(complex);
        let mut rng = substream(seed, "solver");
        let a = random_hermitian_invertible(n, f, &mut rng);
        let s = random_subspace(n, p, f, &mut rng);
        let x0 = if affine { gaussian_vector(n, f, &mut rng) } else { CVec::zeros(n) };
        let b = gaussian_vector(n, f, &mut rng);
        let inst = ProblemInstance::new(&a, AffineSubspace::new(x0, s).unwrap(), b).unwrap();
        let lo = inst.omega_min();
        let omega = lo + 10f64.powf(rng.random_range(-1.0..1.5));
        let mu = lo + 10f64.powf(rng.random_range(-1.0..1.5));
        Case { inst, omega, mu }
    }

    /// Dense normal-equation form of `x_{b,w,s}`.
    fn normal_equation_oracle(inst: &ProblemInstance, w: f64, s: f64) -> CVec {
        let n = inst.n();
        let a = inst.a();
        let v = inst.subspace().basis();
        let aws = matrix_power_pos(&(a + identity(n) * re(w)), s).unwrap();
        let av = a * v;
        let gram = av.adjoint() * &aws * &av;
        let r = inst.residual_rhs();
        let rhs = av.adjoint() * &aws * r;
        let y = solve_general(&gram, &CMat::from_column_slice(rhs.len(), 1, rhs.as_slice())).unwrap();
        &inst.affine().x0 + v * y.column(0)
    }

    fn close(a: &CVec, b: &CVec, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_normal_equations(
            n in 2usize..14, pf in 0.1f64..0.95, seed in any::<u64>(), complex in any::<bool>(),
            s in prop::sample::select(vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
        ) {
            let p = ((n as f64 * pf) as usize).clamp(1, n - 1);
            let case = random_case(n, p, complex, seed, true);
            let x = solve_parametric(&case.inst, case.omega.into(), s).unwrap();
            let oracle = normal_equation_oracle(&case.inst, case.omega, s);
            prop_assert!(close(&x, &oracle, 1e-9));
            // x - x0 stays in S.
            let dx = CMat::from_column_slice(n, 1, (&x - &case.inst.affine().x0).as_slice());
            prop_assert!(case.inst.subspace().contains(&dx, 1e-12));
            if s == -1.0 {
                prop_assert_eq!(x, solve_weighted(&case.inst, case.omega).unwrap());
            }
        }

        #[test]
        fn exact_solution_is_a_fixed_point(
            n in 2usize..12, seed in any::<u64>(), complex in any::<bool>()
        ) {
            let mut case = random_case(n, (n / 2).max(1), complex, seed, true);
            let mut rng = substream(seed, "fixed");
            let coeff = gaussian_vector(case.inst.p(), field(complex), &mut rng);
            let xs = &case.inst.affine().x0 + case.inst.subspace().basis() * coeff;
            let b = case.inst.a() * &xs;
            case.inst = case.inst.with_rhs(b).unwrap();
            for w in [Shift::Finite(case.omega), Shift::Finite(case.mu), Shift::Infinite] {
                for s in [-1.0, 0.5] {
                    prop_assert!(close(&solve_parametric(&case.inst, w, s).unwrap(), &xs, 1e-10));
                }
            }
        }

        #[test]
        fn large_shift_approaches_limit(
            n in 2usize..12, seed in any::<u64>(), complex in any::<bool>()
        ) {
            let case = random_case(n, (n / 2).max(1), complex, seed, false);
            let lim = solve_limit(&case.inst).unwrap();
            let far = solve_weighted(&case.inst, 1e9).unwrap();
            prop_assert!(close(&far, &lim, 1e-6));
        }

        #[test]
        fn system_route_matches_direct_route(
            n in 3usize..14, pf in 0.1f64..0.9, seed in any::<u64>(), complex in any::<bool>(),
            infinite in any::<bool>()
        ) {
            let p = ((n as f64 * pf) as usize).clamp(1, n - 1);
            let case = random_case(n, p, complex, seed, false);
            let inst = &case.inst;
            let dec = tridiagonal_block_decomposition(inst.a(), inst.subspace()).unwrap();
            let mu = if infinite { Shift::Infinite } else { Shift::Finite(case.mu) };
            let direct = d_direct(inst, case.omega.into(), mu).unwrap();
            let sys = d_via_system(&dec, inst.b(), case.omega, mu).unwrap();
            prop_assert!(close(&sys.d, &direct, 1e-9), "system {} direct {}", sys.d, direct);
            prop_assert!(sys.residuals.max() < 1e-9, "{:?}", sys.residuals);
            prop_assert!(close(&sys.u, &sys.z_prime, 1e-8));
            // d = (H*H)^{-1} B* u.
            let h = dec.h();
            let back = solve_spd(&(h.adjoint() * &h), &(dec.b.adjoint() * col(&sys.u))).unwrap();
            prop_assert!(close(&CVec::from_column_slice(back.as_slice()), &sys.d, 1e-8));
        }

        #[test]
        fn image_of_j_is_image_of_n(
            n in 3usize..12, seed in any::<u64>(), complex in any::<bool>(), infinite in any::<bool>()
        ) {
            let case = random_case(n, (n / 2).max(1), complex, seed, false);
            let dec = tridiagonal_block_decomposition(case.inst.a(), case.inst.subspace()).unwrap();
            let mu = if infinite { Shift::Infinite } else { Shift::Finite(case.mu) };
            let j = j_matrix(&dec, mu).unwrap();
            let nn = nullspace_n(&dec).unwrap();
            prop_assert!(Subspace::span(&j).equals(&Subspace::span(&nn.n), 1e-8));
        }

        #[test]
        fn positive_case_single_equation(
            n in 3usize..12, seed in any::<u64>(), complex in any::<bool>()
        ) {
            let f = field(complex);
            let mut rng = substream(seed, "positive");
            let a = random_spd(n, 0.5, 4.0, f, &mut rng);
            let s = random_subspace(n, (n / 2).max(1), f, &mut rng);
            let b = gaussian_vector(n, f, &mut rng);
            let inst = ProblemInstance::linear(&a, s, b.clone()).unwrap();
            let omega = rng.random_range(0.1..5.0);
            let d = col(&d_direct(&inst, omega.into(), 0.0.into()).unwrap());
            let dec = tridiagonal_block_decomposition(&a, inst.subspace()).unwrap();
            let sb = shifted_blocks(&dec, omega).unwrap();
            let (c, c1, c2) = dec.coordinates(&b);
            let t_inv_c = solve_general(&dec.t, &col(&c)).unwrap();
            let z = col(&sb.d_e_inv(&c2)) + &dec.b * t_inv_c - col(&c1);
            let h = dec.h();
            let inner = &h * &d + vstack(&[&CMat::zeros(dec.p(), 1), &z]);
            let lhs = sb.g_solve(&h).unwrap().adjoint() * inner;
            prop_assert!(lhs.norm() < 1e-10 * b.norm().max(1.0));
            // H* G_0^{-1} = [I 0].
            let s0 = shifted_blocks(&dec, 0.0).unwrap();
            let hg = s0.g_solve(&h).unwrap().adjoint();
            let expect = hstack(&[&identity(dec.p()), &CMat::zeros(dec.p(), dec.q())]);
            prop_assert!((hg - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn d_maps_agree_with_solutions() {
        let case = random_case(7, 3, true, 11, false);
        let inst = &case.inst;
        let dd = d_diff(inst, case.omega.into(), Shift::Infinite).unwrap();
        let x = solve_weighted(inst, case.omega).unwrap() - solve_limit(inst).unwrap();
        assert!(close(&(dd * inst.b()), &x, 1e-10));
        let dm = d_map(inst, case.mu.into()).unwrap();
        // D_A(w) A is a projection onto S.
        let da = &dm * inst.a();
        assert!((&da * &da - &da).norm() < 1e-10 * da.norm());
        assert!((&da * inst.subspace().basis() - inst.subspace().basis()).norm() < 1e-10);
        assert_eq!(d_operator(inst, Shift::Infinite).unwrap().shape(), (3, 7));
    }
}
