//! Right-hand sides for which the whole family collapses to one point: the
//! kernel of `F_w`, strong orthogonality of the residual, and `b in A S`.

use paramlsq::analysis::{injectivity_scan, log_grid, residual_strongly_orthogonal, zero_dim_kernel};
use paramlsq::linalg::{real_diag, CVec, Field};
use paramlsq::random::{gaussian_vector, substream};
use paramlsq::solver::{ProblemInstance, Shift};
use paramlsq::subspace::Subspace;

fn main() -> paramlsq::Result<()> {
    let a = real_diag(&[1.0, 2.0, 3.0, 4.0]);
    let s = Subspace::span(&paramlsq::linalg::from_real(4, 1, &[1.0, 1.0, 1.0, 1.0]));
    let kernel = zero_dim_kernel(&a, &s, Shift::Finite(0.5))?;
    println!("A = diag(1, 2, 3, 4), S = span(1, 1, 1, 1): dim Ker F = {}", kernel.dim());

    let grid = log_grid(-3.0, 3.0, 30);
    let pairs = grid.len() * (grid.len() - 1) / 2;
    let from_kernel: CVec = kernel.basis().column(0).into_owned();
    let mut rng = substream(2, "kernel-example");
    let generic = gaussian_vector(4, Field::Real, &mut rng);
    for (label, b) in [("b in Ker F", from_kernel), ("b = A s", &a * s.basis().column(0)), ("generic b", generic)] {
        let inst = ProblemInstance::linear(&a, s.clone(), b)?;
        let scan = injectivity_scan(&inst, &grid, 1e-10)?;
        let strong = residual_strongly_orthogonal(&inst, Shift::Finite(1.0), 1e-10)?;
        println!(
            "{label:>11}: {}/{pairs} colliding pairs, residual strongly orthogonal to S: {strong}",
            scan.collisions.len()
        );
    }
    Ok(())
}
