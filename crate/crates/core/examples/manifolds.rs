//! Matrix sets `M(S, S')`: a positive witness, membership across the
//! classes, dimension formulas, and perturbation into `M_symT`.

use paramlsq::linalg::Field;
use paramlsq::manifolds::{
    construct_positive_member, manifold_dimension, membership, perturb_to_invertible, EpsilonSchedule, ManifoldClass,
};
use paramlsq::random::{random_subspace, substream};
use paramlsq::subspace::Subspace;

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(4, "manifold-example");
    let (n, p, q) = (8, 3, 2);
    let big = random_subspace(n, p + q, Field::Real, &mut rng);
    let s = Subspace::span(&big.basis().columns(0, p).into_owned());
    let w = construct_positive_member(&s, &big)?;
    println!("witness for (n, p, q) = ({n}, {p}, {q}) shifted by omega = {:.3}", w.omega);
    for class in ManifoldClass::ALL {
        let member = membership(w.matrix.as_matrix(), &s, &big, class, 1e-9)?;
        let dim = manifold_dimension(n, p, q, class, Field::Real)?.expect("q <= p");
        println!("  {class:<9} member {member:<5}  real dimension {dim}");
    }
    // The swap pattern before shifting has V* A V singular; A + eps I fixes it.
    let fixed = perturb_to_invertible(&w.swap, &EpsilonSchedule::for_matrix(&w.swap), Some(&s))?;
    println!("swap pattern made T-invertible with eps = {:.1e}", fixed.epsilon);
    println!("q > p: {:?}", manifold_dimension(n, 1, 3, ManifoldClass::M, Field::Real)?);
    Ok(())
}
