//! The family `x_{b,w}` over a grid of shifts: estimated dimension of the
//! solution set against the index, for a few subspace sizes.

use paramlsq::analysis::{estimate_dim_x, estimate_dim_xb, log_grid, XSampling};
use paramlsq::linalg::Field;
use paramlsq::random::{gaussian_vector, random_spd, random_subspace, substream};
use paramlsq::solver::{solve_limit, ProblemInstance, Shift};
use paramlsq::subspace::index_of_invariance;

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(11, "family-example");
    let n = 30;
    let a = random_spd(n, 0.1, 10.0, Field::Real, &mut rng);
    let b = gaussian_vector(n, Field::Real, &mut rng);
    let grid: Vec<Shift> = log_grid(-3.0, 3.0, 120).into_iter().map(Shift::Finite).collect();
    for p in [1, 2, 4, 8] {
        let s = random_subspace(n, p, Field::Real, &mut rng);
        let q = index_of_invariance(&a, &s)?;
        let inst = ProblemInstance::linear(&a, s.clone(), b.clone())?;
        let sweep = estimate_dim_xb(&inst, &grid)?;
        let x = estimate_dim_x(&a, &s, &XSampling::default())?;
        let limit = solve_limit(&inst)?;
        let last = sweep.x.column(sweep.x.ncols() - 1);
        println!(
            "p = {p}: Ind = {q}, est dim X_b = {}, est dim X = {}, |x_(b,1e3) - x_(b,inf)| = {:.2e}",
            sweep.est_dim,
            x.est_dim,
            (last - &limit).norm()
        );
    }
    Ok(())
}
