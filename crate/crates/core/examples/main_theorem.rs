//! Differences `x_{b,w} - x_{b,mu}` stay in the fixed `q`-dimensional
//! subspace `Y = Img(V (H*H)^{-1} B*)`, whatever `b`, `w` and `mu` are.

use paramlsq::analysis::{membership_residual, y_subspace};
use paramlsq::decomposition::tridiagonal_block_decomposition;
use paramlsq::linalg::Field;
use paramlsq::random::{gaussian_vector, random_hermitian_invertible, random_subspace, substream};
use paramlsq::solver::{solve_parametric, ProblemInstance, Shift};

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(5, "main-example");
    let (n, p) = (20, 6);
    let a = random_hermitian_invertible(n, Field::Complex, &mut rng);
    let s = random_subspace(n, p, Field::Complex, &mut rng);
    let dec = tridiagonal_block_decomposition(&a, &s)?;
    let y = y_subspace(&dec)?;
    println!("dim S = {p}, q = {}, dim Y = {}", dec.q(), y.basis.dim());
    for trial in 0..4 {
        let inst = ProblemInstance::linear(&a, s.clone(), gaussian_vector(n, Field::Complex, &mut rng))?;
        let w = inst.omega_min() + 0.5 + trial as f64;
        let mu = if trial % 2 == 0 { Shift::Infinite } else { Shift::Finite(w * 10.0) };
        let d = solve_parametric(&inst, Shift::Finite(w), -1.0)? - solve_parametric(&inst, mu, -1.0)?;
        println!("  w = {w:.3}, mu = {mu}: |d| = {:.3e}, distance to Y / |d| = {:.2e}",
            d.norm(), membership_residual(&d, &y, 0.0));
    }
    Ok(())
}
