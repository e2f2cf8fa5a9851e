//! For positive `A` and `S = K_k(A, b)`, every `x_{b,w}` lies on the segment
//! from the Galerkin solution `x_{b,0}` to the residual minimizer `x_{b,inf}`.

use paramlsq::analysis::{convexity_coordinates, log_grid};
use paramlsq::linalg::Field;
use paramlsq::random::{gaussian_vector, random_spd, substream};
use paramlsq::solver::ProblemInstance;
use paramlsq::subspace::krylov;

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(9, "convexity-example");
    let n = 40;
    let a = random_spd(n, 0.05, 20.0, Field::Real, &mut rng);
    let b = gaussian_vector(n, Field::Real, &mut rng);
    let s = krylov(&a, &b, 4)?.space;
    let inst = ProblemInstance::linear(&a, s, b)?;
    let cv = convexity_coordinates(&inst, &log_grid(-3.0, 3.0, 13))?;
    println!("segment length / |x| = {:.3e}", cv.segment);
    println!("{:>12} {:>10} {:>12}", "omega", "t", "off-segment");
    for ((w, t), off) in cv.omegas.iter().zip(&cv.t).zip(&cv.off_segment) {
        println!("{w:>12.3e} {t:>10.6} {off:>12.2e}");
    }
    Ok(())
}
