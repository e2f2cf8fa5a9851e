//! Index of invariance: Krylov spaces, shift and inverse invariance, the
//! Hermitian complement, and the closure chain `S, S + AS, ...`.

use paramlsq::linalg::{identity, re, solve_general, Field};
use paramlsq::random::{gaussian_vector, random_hermitian_invertible, random_subspace, substream};
use paramlsq::subspace::{complement, index_of_invariance, invariant_closure, krylov};

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(7, "index-example");
    let n = 10;
    let a = random_hermitian_invertible(n, Field::Real, &mut rng);
    let b = gaussian_vector(n, Field::Real, &mut rng);

    for k in [1, 3, 5, n] {
        let kr = krylov(&a, &b, k)?;
        println!("K_{k}(A, b): dim {}, index {}", kr.space.dim(), index_of_invariance(&a, &kr.space)?);
    }

    let s = random_subspace(n, 3, Field::Real, &mut rng);
    let q = index_of_invariance(&a, &s)?;
    let shifted = &a + identity(n) * re(2.5);
    let inv = solve_general(&a, &identity(n))?;
    println!("random S (dim 3): Ind_A = {q}");
    println!("  Ind_(A + 2.5 I) = {}", index_of_invariance(&shifted, &s)?);
    println!("  Ind_(A^-1)      = {}", index_of_invariance(&inv, &s)?);
    println!("  Ind_A(S^perp)   = {}", index_of_invariance(&a, &complement(&s))?);

    let chain = invariant_closure(&a, &random_subspace(n, 1, Field::Real, &mut rng))?;
    let dims: Vec<usize> = chain.iter().map(|c| c.dim()).collect();
    println!("closure chain of a line: dims {dims:?}");
    Ok(())
}
