//! Seeded randomized suites for the structural identities. Each trial draws
//! its instance from its own substream, so trials run in parallel and a
//! failing trial can be replayed from `(seed, suite, index)` alone.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{convexity_coordinates, log_grid, membership_residual, y_subspace};
use crate::decomposition::{nullspace_n, tridiagonal_block_decomposition};
use crate::error::{Error, Result};
use crate::linalg::{identity, lstsq, numerical_rank, re, solve_general, spectral_norm, vstack, CMat, CVec, Field};
use crate::manifolds::{
    construct_positive_member, constraint_nullity, manifold_dimension, membership, ManifoldClass,
};
use crate::random::{
    gaussian_hermitian, gaussian_matrix, gaussian_vector, random_hermitian_invertible, random_spd,
    random_subspace, structured_general, structured_hermitian, substream, trivial_intersection_hermitian, Stream,
};
use crate::solver::{solve_limit, solve_parametric, ProblemInstance, Shift};
use crate::subspace::{complement, image, index_of_invariance, intersect, krylov, sum, Subspace};

/// Relative residual bound shared by the floating-point checks.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Agreement with the CG and least-squares oracles, which accumulate their
/// own rounding.
pub const ORACLE_TOL: f64 = 1e-8;
const MANIFOLD_TOL: f64 = 1e-9;
const MAX_REPORTED: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Index,
    MainTheorem,
    Convexity,
    Nullspace,
    Manifolds,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Index, Suite::MainTheorem, Suite::Convexity, Suite::Nullspace, Suite::Manifolds];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Index => "index",
            Suite::MainTheorem => "main-theorem",
            Suite::Convexity => "convexity",
            Suite::Nullspace => "nullspace",
            Suite::Manifolds => "manifolds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    /// Largest floating-point residual over passing and failing trials;
    /// zero for suites that only compare integers.
    pub max_residual: f64,
    /// The first few failures as `trial i: message`.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

/// A trial passes with its largest residual, or fails with a message.
type Trial = std::result::Result<f64, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn alternate_field(i: usize) -> Field {
    if i.is_multiple_of(2) { Field::Real } else { Field::Complex }
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> SuiteReport {
    let trial: fn(usize, &mut Stream) -> Trial = match suite {
        Suite::Index => index_trial,
        Suite::MainTheorem => main_theorem_trial,
        Suite::Convexity => convexity_trial,
        Suite::Nullspace => nullspace_trial,
        Suite::Manifolds => manifolds_trial,
    };
    let outcomes: Vec<(Trial, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &format!("{suite}-{i}"));
            let out = trial(i, &mut rng);
            let res = *out.as_ref().unwrap_or(&0.0);
            (out, res)
        })
        .collect();
    let mut report = SuiteReport { suite, seed, trials, passed: 0, max_residual: 0.0, failures: Vec::new() };
    for (i, (out, res)) in outcomes.into_iter().enumerate() {
        report.max_residual = report.max_residual.max(res);
        match out {
            Ok(_) => report.passed += 1,
            Err(msg) if report.failures.len() < MAX_REPORTED => report.failures.push(format!("trial {i}: {msg}")),
            Err(_) => {}
        }
    }
    report
}

pub fn run_all(seed: u64, trials: usize) -> Vec<SuiteReport> {
    Suite::ALL.into_iter().map(|s| run_suite(s, seed, trials)).collect()
}

/// Random `(n, p, q)` with `1 <= p < n` and `q <= min(p, n - p)`.
fn dims(rng: &mut Stream, n_lo: usize, n_hi: usize) -> (usize, usize, usize) {
    let n = rng.random_range(n_lo..=n_hi);
    let p = rng.random_range(1..n);
    let q = rng.random_range(0..=p.min(n - p));
    (n, p, q)
}

fn index_trial(i: usize, rng: &mut Stream) -> Trial {
    let field = alternate_field(i);
    let (n, p, q) = dims(rng, 2, 12);
    let st = structured_hermitian(n, p, q, field, rng);
    let ind = |m: &CMat, s: &Subspace| lift(index_of_invariance(m, s));

    let base = ind(&st.a, &st.s)?;
    ensure!(base == q, "Ind_A(S) = {base}, built with q = {q}");
    ensure!(base <= p.min(n - p), "index {base} above min(p, n - p)");
    let omega = rng.random_range(-3.0..3.0);
    let shifted = ind(&(&st.a + identity(n) * re(omega)), &st.s)?;
    ensure!(shifted == q, "shift by {omega}: index {shifted} != {q}");
    let inv = lift(solve_general(&st.a, &identity(n)))?;
    let ii = ind(&inv, &st.s)?;
    ensure!(ii == q, "inverse: index {ii} != {q}");

    let perp = complement(&st.s);
    let ip = ind(&st.a, &perp)?;
    ensure!(ip == q, "Ind_A(S^perp) = {ip} != {q}");
    let s_plus = lift(sum(&st.s, &lift(image(&st.a, &st.s))?))?;
    let s_prime = lift(intersect(&perp, &s_plus))?;
    ensure!(s_prime.dim() == q, "dim S' = {} != {q}", s_prime.dim());
    let isp = ind(&st.a, &s_prime)?;
    ensure!(isp == q, "Ind_A(S') = {isp} != {q}");

    // Subadditivity with two operators sharing S, and two subspaces.
    let ga = structured_general(n, p, q, field, rng);
    let q2 = rng.random_range(0..=p.min(n - p));
    let gb = structured_general(n, p, q2, field, rng);
    let rot = &ga.frame * gb.frame.adjoint();
    let bm = &rot * &gb.a * rot.adjoint();
    let s = &ga.s;
    let ia = ind(&ga.a, s)?;
    let ib = ind(&bm, s)?;
    ensure!(ia == q && ib == q2, "generators gave indices ({ia}, {ib}) for ({q}, {q2})");
    let isum = ind(&(&ga.a + &bm), s)?;
    ensure!(isum <= ia + ib, "Ind_(A+B) = {isum} > {ia} + {ib}");
    let iprod = ind(&(&ga.a * &bm), s)?;
    ensure!(iprod <= ia + ib, "Ind_(AB) = {iprod} > {ia} + {ib}");
    let k = rng.random_range(1..n);
    let other = random_subspace(n, k, field, rng);
    let io = ind(&ga.a, &other)?;
    let joint = lift(sum(s, &other))?;
    let ij = ind(&ga.a, &joint)?;
    ensure!(ij <= ia + io, "Ind_A(S + S') = {ij} > {ia} + {io}");
    Ok(0.0)
}

fn random_shift(inst: &ProblemInstance, rng: &mut Stream) -> f64 {
    inst.omega_min() + 10f64.powf(rng.random_range(-1.0..2.0))
}

fn main_theorem_trial(i: usize, rng: &mut Stream) -> Trial {
    let field = alternate_field(i);
    let n = rng.random_range(4..=40);
    let p = rng.random_range(1..n);
    let a = random_hermitian_invertible(n, field, rng);
    let s = random_subspace(n, p, field, rng);
    let b = gaussian_vector(n, field, rng);
    let q = lift(index_of_invariance(&a, &s))?;
    let dec = lift(tridiagonal_block_decomposition(&a, &s))?;
    let y = lift(y_subspace(&dec))?;
    ensure!(dec.q() == q, "decomposition q = {} but index {q}", dec.q());
    ensure!(y.basis.dim() == q, "dim Y = {} != q = {q}", y.basis.dim());
    let inst = lift(ProblemInstance::linear(&a, s, b))?;
    let w = random_shift(&inst, rng);
    let mu = if rng.random_bool(0.25) { Shift::Infinite } else { Shift::Finite(random_shift(&inst, rng)) };
    let xw = lift(solve_parametric(&inst, Shift::Finite(w), -1.0))?;
    let xm = lift(solve_parametric(&inst, mu, -1.0))?;
    // Differences below 1e-6 of the solutions are rounding dominated and
    // measured against that floor instead.
    let floor = 1e-6 * xw.norm().max(xm.norm());
    let res = membership_residual(&(xw - xm), &y, floor);
    ensure!(res <= RESIDUAL_TOL, "residual against Y {res:e} (w = {w}, mu = {mu})");
    Ok(res)
}

/// `k` steps of conjugate gradients from zero.
fn conjugate_gradient(a: &CMat, b: &CVec, k: usize) -> CVec {
    let mut x = CVec::zeros(b.len());
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rs = r.norm_squared();
    for _ in 0..k {
        let ad = a * &d;
        let alpha = re(rs) / d.dotc(&ad);
        x += &d * alpha;
        r -= &ad * alpha;
        let next = r.norm_squared();
        d = &r + &d * re(next / rs);
        rs = next;
    }
    x
}

/// Convexity instances whose segment `x_{b,0} -> x_{b,inf}` is shorter than
/// this, relative to the solutions, are redrawn: `K_k` has then nearly
/// captured `A^{-1} b` and the segment is below what the solves resolve.
pub const MIN_SEGMENT: f64 = 1e-5;

fn convexity_trial(i: usize, rng: &mut Stream) -> Trial {
    let field = alternate_field(i);
    for _ in 0..50 {
        let n = rng.random_range(6..=30);
        let k = rng.random_range(1..=6usize.min(n - 1));
        let lo = rng.random_range(0.2..1.0);
        let hi = lo * rng.random_range(2.0..50.0);
        let a = random_spd(n, lo, hi, field, rng);
        let b = gaussian_vector(n, field, rng);
        let kr = lift(krylov(&a, &b, k))?;
        let inst = lift(ProblemInstance::linear(&a, kr.space.clone(), b.clone()))?;
        let cv = lift(convexity_coordinates(&inst, &log_grid(-3.0, 3.0, 40)))?;
        if cv.segment < MIN_SEGMENT {
            continue;
        }
        let ind = lift(index_of_invariance(&a, &kr.space))?;
        ensure!(ind == 1 && kr.space.dim() == k, "Krylov space of dim {} has index {ind}", kr.space.dim());

        let cg = conjugate_gradient(&a, &b, k);
        let e_cg = (&cv.x_zero - &cg).norm() / cg.norm();
        ensure!(e_cg <= ORACLE_TOL, "x_(b,0) differs from CG by {e_cg:e}");
        let x_inf = lift(solve_limit(&inst))?;
        let v = kr.space.basis();
        let y = lift(lstsq(&(&a * v), &CMat::from_column_slice(n, 1, b.as_slice())))?;
        let minres = v * y.column(0);
        let e_mr = (&x_inf - &minres).norm() / minres.norm();
        ensure!(e_mr <= ORACLE_TOL, "limit differs from residual minimizer by {e_mr:e}");

        let mut worst = e_cg.max(e_mr);
        for ((&w, &t), &off) in cv.omegas.iter().zip(&cv.t).zip(&cv.off_segment) {
            ensure!((-1e-10..=1.0 + 1e-10).contains(&t), "t = {t} at w = {w}");
            ensure!(off <= 1e-9, "off-segment residual {off:e} at w = {w} (segment {:e})", cv.segment);
            worst = worst.max(off);
        }
        return Ok(worst);
    }
    Err("no instance with a resolvable segment in 50 draws".into())
}

fn nullspace_trial(i: usize, rng: &mut Stream) -> Trial {
    let field = alternate_field(i / 3);
    // Rotate through generic instances, p = q, and Img T ∩ Img B* = {0}.
    let st = match i % 3 {
        0 => {
            let n = rng.random_range(2..=12);
            let p = rng.random_range(1..n);
            let q = rng.random_range(1..=p.min(n - p));
            structured_hermitian(n, p, q, field, rng)
        }
        1 => {
            let p = rng.random_range(1..=5);
            let r = rng.random_range(0..=3);
            structured_hermitian(2 * p + r, p, p, field, rng)
        }
        _ => {
            let p = rng.random_range(2..=6);
            let q = rng.random_range(1..p);
            let r = rng.random_range(0..=3);
            trivial_intersection_hermitian(p, q, r, field, rng)
        }
    };
    let dec = lift(tridiagonal_block_decomposition(&st.a, &st.s))?;
    let (p, q) = (dec.p(), dec.q());
    ensure!(q == st.q, "decomposition q = {q}, built with {}", st.q);
    let nn = lift(nullspace_n(&dec))?;
    let h = dec.h();
    let scale = spectral_norm(&h);
    let r_h = (h.adjoint() * &nn.n).norm() / scale;
    ensure!(r_h <= RESIDUAL_TOL, "||H* N|| = {r_h:e}");
    ensure!(nn.n.ncols() == q && numerical_rank(&nn.n) == q, "rank N != q = {q}");
    // B B* N2 = -B T N1, in residual form.
    let bt = &dec.b * &dec.t;
    let r_n2 = (&dec.b * dec.b.adjoint() * &nn.n2 + &bt * &nn.n1).norm() / (scale * scale);
    ensure!(r_n2 <= RESIDUAL_TOL, "N2 identity residual {r_n2:e}");
    let mut worst = r_h.max(r_n2);

    let t_img = Subspace::span(&dec.t);
    let bs_img = Subspace::span(&dec.b.adjoint());
    let t_inv = numerical_rank(&dec.t) == p;
    let bs_inv = q == p && numerical_rank(&dec.b) == p;
    ensure!(t_inv == t_img.contains(bs_img.basis(), 1e-8), "T invertible <=> Img B* in Img T fails");
    ensure!(bs_inv == bs_img.contains(t_img.basis(), 1e-8), "B* invertible <=> Img T in Img B* fails");
    if t_inv {
        let n1 = -lift(solve_general(&dec.t, &dec.b.adjoint()))?;
        let choice = vstack(&[&n1, &identity(q)]);
        let r = (h.adjoint() * &choice).norm() / (scale * choice.norm());
        let d = Subspace::span(&choice).distance(&Subspace::span(&nn.n));
        ensure!(r <= RESIDUAL_TOL && d <= 1e-8, "N1 = -T^-1 B*, N2 = I: residual {r:e}, span distance {d:e}");
        worst = worst.max(r);
    }
    if bs_inv {
        ensure!(numerical_rank(&nn.n1) == p, "B* invertible but N1 singular");
    }
    if lift(intersect(&t_img, &bs_img))?.dim() == 0 {
        let n2 = nn.n2.norm();
        let d = Subspace::span(&nn.n1).distance(&complement(&t_img));
        ensure!(n2 <= RESIDUAL_TOL && d <= RESIDUAL_TOL, "trivial intersection: ||N2|| = {n2:e}, distance {d:e}");
        worst = worst.max(n2).max(d);
    }
    Ok(worst)
}

fn manifolds_trial(i: usize, rng: &mut Stream) -> Trial {
    let field = alternate_field(i / 2);
    let n = rng.random_range(3..=10);
    if i.is_multiple_of(2) {
        let p = rng.random_range(0..n);
        let q = rng.random_range(0..=p.min(n - p));
        let big = random_subspace(n, p + q, field, rng);
        let s = Subspace::span(&big.basis().columns(0, p).into_owned());
        let member = lift(construct_positive_member(&s, &big))?;
        let ok = lift(membership(member.matrix.as_matrix(), &s, &big, ManifoldClass::MPos, MANIFOLD_TOL))?;
        ensure!(ok, "constructed witness not in M_pos for (n, p, q) = ({n}, {p}, {q})");
        let class = ManifoldClass::ALL[rng.random_range(0..ManifoldClass::ALL.len())];
        let formula = lift(manifold_dimension(n, p, q, class, field))?;
        let nullity = lift(constraint_nullity(&s, &big, class, field))?;
        ensure!(formula == Some(nullity), "{class} dimension {formula:?}, constraint nullity {nullity}");
    } else {
        let p = rng.random_range(0..=(n - 1) / 2);
        let q = rng.random_range(p + 1..=n - p);
        let big = random_subspace(n, p + q, field, rng);
        let s = Subspace::span(&big.basis().columns(0, p).into_owned());
        ensure!(construct_positive_member(&s, &big).is_err(), "witness built for q > p");
        ensure!(lift(manifold_dimension(n, p, q, ManifoldClass::M, field))?.is_none(), "q > p has a dimension");
        let general = gaussian_matrix(n, n, field, rng);
        let herm = gaussian_hermitian(n, field, rng);
        for class in ManifoldClass::ALL {
            let m = if class.is_hermitian_class() { &herm } else { &general };
            ensure!(!lift(membership(m, &s, &big, class, MANIFOLD_TOL))?, "{class} member with q > p");
        }
    }
    Ok(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("all".parse::<Suite>().is_err());
    }

    #[test]
    fn cg_matches_galerkin_on_small_system() {
        let mut rng = substream(3, "cg");
        let a = random_spd(8, 1.0, 4.0, Field::Real, &mut rng);
        let b = gaussian_vector(8, Field::Real, &mut rng);
        // Full CG solves the system.
        let x = conjugate_gradient(&a, &b, 8);
        assert!((&a * x - &b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn every_suite_passes_small_runs() {
        for s in Suite::ALL {
            let r = run_suite(s, 11, 24);
            assert!(r.ok(), "{s}: {:?}", r.failures);
            assert_eq!(r.trials, 24);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_suite(Suite::MainTheorem, 5, 10);
        let b = run_suite(Suite::MainTheorem, 5, 10);
        assert_eq!(a.max_residual, b.max_residual);
    }
}
