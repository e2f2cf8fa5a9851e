//! Block decomposition of a Hermitian matrix adapted to a subspace, and the
//! null space of `H* = [T B*]`.

use paramlsq::decomposition::{nullspace_n, tridiagonal_block_decomposition};
use paramlsq::linalg::Field;
use paramlsq::random::{structured_hermitian, substream};

fn main() -> paramlsq::Result<()> {
    let mut rng = substream(3, "decomposition-example");
    let st = structured_hermitian(9, 3, 2, Field::Complex, &mut rng);
    let dec = tridiagonal_block_decomposition(&st.a, &st.s)?;
    println!("n = {}, p = {}, q = {}, r = {}", dec.n(), dec.p(), dec.q(), dec.r());
    println!("||A - W (W*AW) W*|| / ||A|| = {:.2e}", dec.reconstruction_error());
    println!("block norms: T {:.3}, B {:.3}, C {:.3}, D {:.3}, E {:.3}",
        dec.t.norm(), dec.b.norm(), dec.c.norm(), dec.d.norm(), dec.e.norm());
    // Everything outside the tridiagonal pattern is zero.
    let w = dec.frame();
    let m = w.adjoint() * &st.a * &w;
    let corner = m.view((dec.p() + dec.q(), 0), (dec.r(), dec.p())).norm();
    println!("V''* A V block: {corner:.2e}");

    let nn = nullspace_n(&dec)?;
    println!("N is {}x{}, ||H* N|| = {:.2e}", nn.n.nrows(), nn.n.ncols(), (dec.h().adjoint() * &nn.n).norm());
    Ok(())
}
