//! Dimension, tightness, convexity and injectivity checks on the solution
//! family: the subspace `Y`, sampled estimates of `dim X_b` and `dim X`, the
//! kernel of `F_w`, the sufficient conditions for `dim X = q`, the matrices
//! `L(w, mu)`, convexity coordinates and injectivity scans.

use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::TridiagDecomp;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hstack, identity, nullspace_with, rank_tol, re, solve_hermitian, solve_spd, svd,
    CMat, CVec,
};
use crate::random::{gaussian_vector, substream};
use crate::solver::{d_operator, solve_parametric, ProblemInstance, Shift};
use crate::subspace::{
    index_of_invariance, krylov, EigenspaceSplit, Subspace,
};

/// Singular value ratio `sigma_{r+1} / sigma_1` at or below which the
/// sampled dimension is declared to be `r`.
pub const EST_DIM_RTOL: f64 = 1e-8;

/// Relative tolerance for the rank of the stacked `f_{w,ij}` rows.
pub const KERNEL_RTOL: f64 = 1e-9;

/// Numerical rank of a sample matrix with singular values `sigma`. A
/// leading singular value at or below `EST_DIM_RTOL * scale` means every
/// sample is rounding noise around one point, so the rank is zero.
pub fn estimated_rank(sigma: &[f64], scale: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > EST_DIM_RTOL * scale && s1 > 0.0 => {
            sigma.iter().filter(|&&s| s > EST_DIM_RTOL * s1).count()
        }
        _ => 0,
    }
}

/// `K` log-spaced points `10^(lo + (hi - lo) j / (K - 1))`.
pub fn log_grid(lo_exp: f64, hi_exp: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..k)
            .map(|j| 10f64.powf(lo_exp + (hi_exp - lo_exp) * j as f64 / (k - 1) as f64))
            .collect(),
    }
}

/// The default sweep grid: 200 points from `1e-3` to `1e3`.
pub fn default_grid() -> Vec<f64> {
    log_grid(-3.0, 3.0, 200)
}

/// `Y = Img(V (H*H)^{-1} B*)`, the subspace containing every difference
/// `x_{b,w} - x_{b,mu}`.
#[derive(Clone, Debug)]
pub struct YSubspace {
    pub basis: Subspace,
    pub q: usize,
}

pub fn y_subspace(dec: &TridiagDecomp) -> Result<YSubspace> {
    let (n, q) = (dec.n(), dec.q());
    if q == 0 {
        return Ok(YSubspace { basis: Subspace::zero(n), q });
    }
    let h = dec.h();
    let hh = h.adjoint() * &h;
    let gen = &dec.v * solve_spd(&hh, &dec.b.adjoint())?;
    Ok(YSubspace { basis: Subspace::span(&gen), q })
}

/// `||(I - P_Y) x|| / max(||x||, floor)`.
pub fn membership_residual(x_diff: &CVec, y: &YSubspace, floor: f64) -> f64 {
    let xm = CMat::from_column_slice(x_diff.len(), 1, x_diff.as_slice());
    let out = &xm - y.basis.project(&xm);
    out.norm() / x_diff.norm().max(floor).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub residual: f64,
    pub member: bool,
}

pub fn verify_membership(x_diff: &CVec, y: &YSubspace, tol: f64) -> Membership {
    let residual = membership_residual(x_diff, y, f64::MIN_POSITIVE);
    Membership { residual, member: residual <= tol }
}

/// Solutions of one instance over a grid of shifts.
#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Grid points that solved, in grid order.
    pub omegas: Vec<f64>,
    /// One column per entry of `omegas`.
    pub x: CMat,
    /// Singular values of the row-centered solution matrix.
    pub sigma: Vec<f64>,
    pub est_dim: usize,
    /// Coordinates of each centered solution on the leading left singular
    /// vectors: `K x min(3, K, n)`.
    pub coords: CMat,
    /// Grid points that failed, with the error text.
    pub failures: Vec<(f64, String)>,
}

impl SweepResult {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// `sigma_i / sigma_1`.
    pub fn sigma_ratios(&self) -> Vec<f64> {
        let s1 = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().map(|s| if s1 > 0.0 { s / s1 } else { 0.0 }).collect()
    }
}

/// Solves at every grid point, centers the solutions and reads `dim X_b` off
/// the singular values.
pub fn estimate_dim_xb(inst: &ProblemInstance, grid: &[Shift]) -> Result<SweepResult> {
    for w in grid {
        if let Shift::Finite(x) = w {
            if !x.is_finite() {
                return Err(Error::Invalid(format!("grid point {x}")));
            }
        }
    }
    let solved: Vec<(Shift, Result<CVec>)> =
        grid.par_iter().map(|&w| (w, solve_parametric(inst, w, -1.0))).collect();
    let mut omegas = Vec::new();
    let mut cols = Vec::new();
    let mut failures = Vec::new();
    for (w, r) in solved {
        let wf = match w {
            Shift::Finite(x) => x,
            Shift::Infinite => f64::INFINITY,
        };
        match r {
            Ok(x) => {
                omegas.push(wf);
                cols.push(x);
            }
            Err(e) => failures.push((wf, e.to_string())),
        }
    }
    let n = inst.n();
    let x = if cols.is_empty() { CMat::zeros(n, 0) } else { CMat::from_columns(&cols) };
    let (sigma, est_dim, coords) = centered_spectrum(&x);
    Ok(SweepResult { omegas, x, sigma, est_dim, coords, failures })
}

/// Singular values, estimated rank and leading coordinates of the
/// row-centered columns of `x`.
fn centered_spectrum(x: &CMat) -> (Vec<f64>, usize, CMat) {
    let k = x.ncols();
    if k == 0 {
        return (vec![], 0, CMat::zeros(0, 0));
    }
    let mean = x.column_mean();
    let mut yc = x.clone();
    for mut c in yc.column_iter_mut() {
        c -= &mean;
    }
    let scale = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let s = svd(&yc);
    let est = estimated_rank(&s.sigma, scale);
    let m = 3.min(s.u.ncols());
    let coords = (s.u.columns(0, m).adjoint() * &yc).transpose();
    (s.sigma, est, coords)
}

/// Sampling plan for `dim X`.
#[derive(Clone, Debug)]
pub struct XSampling {
    /// Number of random right-hand sides; `None` means `max(4q, 4)`.
    pub n_samples: Option<usize>,
    /// Number of `(w, mu)` pairs; the first pair uses `mu = inf`.
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for XSampling {
    fn default() -> Self {
        XSampling { n_samples: None, n_pairs: 4, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct XEstimate {
    pub est_dim: usize,
    pub sigma: Vec<f64>,
    pub pairs: Vec<(Shift, Shift)>,
    pub n_samples: usize,
}

/// Shifts `omega_min + 10^u * max(1, ||A||)` with `u` uniform in `[-3, 1]`.
fn sample_shift(inst: &ProblemInstance, rng: &mut impl rand::Rng) -> f64 {
    let u: f64 = rng.random_range(-3.0..1.0);
    let scale = inst.eig().spectral_norm().max(1.0);
    let w = inst.omega_min() + 10f64.powf(u) * scale;
    w.max(inst.omega_min() + 2.0 * inst.guard())
}

/// Numerical dimension of the span of `x_{b,w} - x_{b,mu}` over random `b`
/// and sampled pairs `(w, mu)`.
pub fn estimate_dim_x(a: &CMat, s: &Subspace, plan: &XSampling) -> Result<XEstimate> {
    let n = a.nrows();
    let field = crate::linalg::Field::of(a).join(s.field());
    let base = ProblemInstance::linear(a, s.clone(), CVec::zeros(n))?;
    let q = index_of_invariance(a, s)?;
    let n_samples = plan.n_samples.unwrap_or((4 * q).max(4));
    let mut prng = substream(plan.seed, "x-pairs");
    let pairs: Vec<(Shift, Shift)> = (0..plan.n_pairs)
        .map(|i| {
            let w = Shift::Finite(sample_shift(&base, &mut prng));
            let mut m = sample_shift(&base, &mut prng);
            if Shift::Finite(m) == w {
                m += 1.0;
            }
            (w, if i == 0 { Shift::Infinite } else { Shift::Finite(m) })
        })
        .collect();
    let per_sample: Vec<Result<(Vec<CVec>, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(plan.seed, &format!("x-rhs-{i}"));
            let inst = base.with_rhs(gaussian_vector(n, field, &mut rng))?;
            let mut diffs = Vec::with_capacity(pairs.len());
            let mut scale: f64 = 0.0;
            for &(w, m) in &pairs {
                let xw = solve_parametric(&inst, w, -1.0)?;
                let xm = solve_parametric(&inst, m, -1.0)?;
                scale = scale.max(xw.norm()).max(xm.norm());
                diffs.push(xw - xm);
            }
            Ok((diffs, scale))
        })
        .collect();
    let mut cols = Vec::new();
    let mut scale: f64 = 0.0;
    for r in per_sample {
        let (d, s) = r?;
        cols.extend(d);
        scale = scale.max(s);
    }
    if cols.is_empty() {
        return Ok(XEstimate { est_dim: 0, sigma: vec![], pairs, n_samples });
    }
    let sigma = svd(&CMat::from_columns(&cols)).sigma;
    let est_dim = estimated_rank(&sigma, scale);
    Ok(XEstimate { est_dim, sigma, pairs, n_samples })
}

/// The stacked rows `f_{w,ij} = v_j* Q_i Q_i* (I - A D_A(w))` over the
/// eigenspaces `Q_i` of `A` and the basis vectors `v_j` of `S`.
pub fn f_operator(a: &CMat, s: &Subspace, omega: Shift) -> Result<CMat> {
    let n = a.nrows();
    let inst = ProblemInstance::linear(a, s.clone(), CVec::zeros(n))?;
    let resid = identity(n) - a * s.basis() * d_operator(&inst, omega)?;
    let split = EigenspaceSplit::new(a)?;
    let v = s.basis();
    let mut rows = CMat::zeros(split.len() * v.ncols(), n);
    for (i, qi) in split.blocks.iter().enumerate() {
        let proj = qi * (qi.adjoint() * &resid);
        let block = v.adjoint() * proj;
        rows.rows_mut(i * v.ncols(), v.ncols()).copy_from(&block);
    }
    Ok(rows)
}

/// `Ker F_w`: the right-hand sides with `dim X_b = 0`.
pub fn zero_dim_kernel(a: &CMat, s: &Subspace, omega: Shift) -> Result<Subspace> {
    let f = f_operator(a, s, omega)?;
    // Each row is a vector of norm at most one times an oblique projector, so
    // an all-rounding F is judged against 1, not against its own size.
    let s1 = crate::linalg::spectral_norm(&f);
    let rtol = KERNEL_RTOL * s1.max(1.0) / s1.max(f64::MIN_POSITIVE);
    Subspace::from_orthonormal(nullspace_with(&f, rtol))
}

/// `b - A x_{b,w}` is strongly orthogonal to every basis vector of `S`
/// with respect to the eigenspaces of `A`. Inner products are judged
/// against `tol ||b||`, since the residual itself may be pure rounding.
pub fn residual_strongly_orthogonal(inst: &ProblemInstance, omega: Shift, tol: f64) -> Result<bool> {
    let x = solve_parametric(inst, omega, -1.0)?;
    let r = inst.residual_rhs() - inst.a() * (x - &inst.affine().x0);
    let split = EigenspaceSplit::new(inst.a())?;
    let bound = tol * inst.residual_rhs().norm();
    Ok(split.blocks.iter().all(|q| {
        let qr = q.adjoint() * &r;
        inst.subspace().basis().column_iter().all(|v| (q.adjoint() * v).dotc(&qr).norm() <= bound)
    }))
}

/// One sampled `L(w, mu) = C - B T^{-1} B* - D* K(w, mu) D`.
#[derive(Clone, Debug, Serialize)]
pub struct LSample {
    pub omega: f64,
    pub mu: f64,
    /// Eigenvalues of `L`, descending.
    pub eigenvalues: Vec<f64>,
    pub invertible: bool,
    pub positive: bool,
    #[serde(skip)]
    pub l: CMat,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    #[serde(rename = "T_invertible")]
    pub t_invertible: bool,
    /// `Img T ∩ Img B* = {0}`.
    pub images_trivial_intersection: bool,
    #[serde(rename = "L_matrices")]
    pub l_matrices: Vec<LSample>,
}

impl ConditionReport {
    /// Either sufficient condition for `dim X = q` holds.
    pub fn sufficient(&self) -> bool {
        self.t_invertible || self.images_trivial_intersection
    }
}

fn rank_at_scale(m: &CMat, scale: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let tol = rank_tol(m.nrows(), m.ncols()) * scale;
    svd(m).sigma.iter().filter(|&&s| s > tol).count()
}

/// `K(w, mu) = (mu E_w^{-1} - w E_mu^{-1}) / (mu - w)`.
pub fn k_matrix(dec: &TridiagDecomp, omega: f64, mu: f64) -> Result<CMat> {
    let r = dec.r();
    let ew = &dec.e + identity(r) * re(omega);
    let em = &dec.e + identity(r) * re(mu);
    let iw = solve_hermitian(&ew, &identity(r))?;
    let im = solve_hermitian(&em, &identity(r))?;
    Ok((iw * re(mu) - im * re(omega)) / re(mu - omega))
}

pub fn l_matrix(dec: &TridiagDecomp, omega: f64, mu: f64) -> Result<CMat> {
    let schur = &dec.c - &dec.b * solve_hermitian(&dec.t, &dec.b.adjoint())?;
    if dec.r() == 0 {
        return Ok(crate::linalg::hermitian_part(&schur));
    }
    let k = k_matrix(dec, omega, mu)?;
    Ok(crate::linalg::hermitian_part(&(schur - dec.d.adjoint() * k * &dec.d)))
}

/// Evaluates both sufficient conditions and, for each `(w, mu)` with
/// `w != mu`, the matrix `L(w, mu)`.
pub fn condition_report(dec: &TridiagDecomp, samples: &[(f64, f64)]) -> Result<ConditionReport> {
    let h = dec.h();
    let scale = crate::linalg::spectral_norm(&h).max(f64::MIN_POSITIVE);
    let p = dec.p();
    let rank_t = rank_at_scale(&dec.t, scale);
    let t_invertible = rank_t == p;
    let bs = dec.b.adjoint();
    let joint = hstack(&[&dec.t, &bs]);
    let images_trivial_intersection =
        rank_t + rank_at_scale(&bs, scale) == rank_at_scale(&joint, scale);
    if !samples.is_empty() && !t_invertible {
        return Err(Error::Precondition("T is singular, L(w, mu) is undefined".into()));
    }
    let mut l_matrices = Vec::with_capacity(samples.len());
    for &(w, m) in samples {
        if w == m {
            return Err(Error::Invalid(format!("L needs distinct shifts, got {w} twice")));
        }
        dec.check_shift(w)?;
        dec.check_shift(m)?;
        let l = l_matrix(dec, w, m)?;
        let (eigenvalues, invertible, positive) = if l.nrows() == 0 {
            (vec![], true, true)
        } else {
            let e = hermitian_eig(&l)?;
            let tol = rank_tol(l.nrows(), l.ncols()) * e.spectral_norm().max(scale);
            let inv = e.values.iter().all(|v| v.abs() > tol);
            let pos = e.lambda_min() > tol;
            (e.values, inv, pos)
        };
        l_matrices.push(LSample { omega: w, mu: m, eigenvalues, invertible, positive, l });
    }
    Ok(ConditionReport { t_invertible, images_trivial_intersection, l_matrices })
}

/// Position of each `x_{b,w}` along the segment from `x_{b,0}` to
/// `x_{b,inf}`.
#[derive(Clone, Debug)]
pub struct Convexity {
    pub x_zero: CVec,
    pub x_inf: CVec,
    pub omegas: Vec<f64>,
    /// Least-squares coordinate `t` with `x_{b,w} ~ (1 - t) x_{b,0} + t x_{b,inf}`.
    pub t: Vec<f64>,
    /// `||x_{b,w} - x_{b,0} - t (x_{b,inf} - x_{b,0})|| / ||x_{b,inf} - x_{b,0}||`.
    pub off_segment: Vec<f64>,
    /// `||x_{b,inf} - x_{b,0}|| / max(||x_{b,0}||, ||x_{b,inf}||)`. Rounding in
    /// the solutions is divided by this when forming `t` and `off_segment`,
    /// so values near machine precision leave both unresolved.
    pub segment: f64,
    /// `x_{b,0} = x_{b,inf}`: the family is constant and `t` is meaningless.
    pub degenerate: bool,
}

/// Requires `A` positive, `S = K_k(A, b)` and `x0 = 0`.
pub fn convexity_coordinates(inst: &ProblemInstance, grid: &[f64]) -> Result<Convexity> {
    if !inst.is_positive() {
        return Err(Error::Precondition("convexity needs a positive definite A".into()));
    }
    if inst.affine().x0.norm() != 0.0 {
        return Err(Error::Precondition("convexity needs x0 = 0".into()));
    }
    let s = inst.subspace();
    let kry = krylov(inst.a(), inst.b(), s.dim())?;
    if kry.space.dim() != s.dim() || !kry.space.equals(s, 1e-8) {
        return Err(Error::Precondition("S is not the Krylov space K_p(A, b)".into()));
    }
    let x_zero = solve_parametric(inst, Shift::Finite(0.0), -1.0)?;
    let x_inf = solve_parametric(inst, Shift::Infinite, -1.0)?;
    let dir = &x_inf - &x_zero;
    let dn = dir.norm();
    let segment = dn / x_zero.norm().max(x_inf.norm()).max(f64::MIN_POSITIVE);
    let degenerate = segment <= 1e-12;
    let rows: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|&w| {
            let x = solve_parametric(inst, Shift::Finite(w), -1.0)?;
            let rel = x - &x_zero;
            if degenerate {
                return Ok((0.0, rel.norm() / x_zero.norm().max(f64::MIN_POSITIVE)));
            }
            let t = dir.dotc(&rel).re / (dn * dn);
            let off = (&rel - &dir * re(t)).norm() / dn;
            Ok((t, off))
        })
        .collect();
    let mut t = Vec::with_capacity(grid.len());
    let mut off_segment = Vec::with_capacity(grid.len());
    for r in rows {
        let (a, b) = r?;
        t.push(a);
        off_segment.push(b);
    }
    Ok(Convexity { x_zero, x_inf, omegas: grid.to_vec(), t, off_segment, segment, degenerate })
}

/// Pairs of grid points whose solutions coincide to within `tol * scale`.
/// An empty list only means no collision was seen at this sampling.
#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub collisions: Vec<(f64, f64)>,
    pub scale: f64,
    pub min_separation: f64,
}

pub fn injectivity_scan(inst: &ProblemInstance, grid: &[f64], tol: f64) -> Result<InjectivityReport> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("injectivity grid must be strictly increasing".into()));
    }
    let xs: Vec<CVec> = grid
        .par_iter()
        .map(|&w| solve_parametric(inst, Shift::Finite(w), -1.0))
        .collect::<Result<_>>()?;
    let scale = xs.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let mut collisions = Vec::new();
    let mut min_separation = f64::INFINITY;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = (&xs[i] - &xs[j]).norm();
            min_separation = min_separation.min(d / scale);
            if d <= tol * scale {
                collisions.push((grid[i], grid[j]));
            }
        }
    }
    Ok(InjectivityReport { collisions, scale, min_separation })
}
