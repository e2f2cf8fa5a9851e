pub mod analysis;
pub mod decomposition;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod manifolds;
pub mod solver;
pub mod random;
pub mod subspace;
pub mod verify;

pub use error::{Error, Result};
