//! Problem generators and the low-dimensionality sweep on a 2D Poisson
//! matrix with a sum of Krylov subspaces.

use std::path::PathBuf;

use serde::Serialize;

use crate::analysis::{estimate_dim_xb, log_grid, SweepResult};
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{hstack, re, CMat, CVec, DenseMatrix, Field};
use crate::random::{gaussian_vector, substream};
use crate::solver::{ProblemInstance, Shift};
use crate::subspace::{index_of_invariance, krylov, Subspace};

/// 5-point finite difference Laplacian on an `m x m` interior grid:
/// 4 on the diagonal, -1 between grid neighbours.
pub fn poisson_2d(m: usize) -> Result<DenseMatrix> {
    if m < 2 {
        return Err(Error::Invalid(format!("Poisson grid side must be at least 2, got {m}")));
    }
    let n = m * m;
    let mut a = CMat::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let k = i * m + j;
            a[(k, k)] = re(4.0);
            if j + 1 < m {
                a[(k, k + 1)] = re(-1.0);
                a[(k + 1, k)] = re(-1.0);
            }
            if i + 1 < m {
                a[(k, k + m)] = re(-1.0);
                a[(k + m, k)] = re(-1.0);
            }
        }
    }
    DenseMatrix::with_field(a, Field::Real)
}

#[derive(Clone, Debug, Serialize)]
pub struct KrylovSumSpec {
    pub orders: Vec<usize>,
    /// Redraw seeds until `Ind_A(S)` equals this value.
    pub target_index: Option<usize>,
    pub max_attempts: usize,
    pub field: Field,
    pub seed: u64,
}

impl KrylovSumSpec {
    pub fn new(orders: Vec<usize>, seed: u64) -> Self {
        let target = Some(orders.len());
        KrylovSumSpec { orders, target_index: target, max_attempts: 20, field: Field::Real, seed }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovSum {
    pub space: Subspace,
    pub seeds: Vec<CVec>,
    pub index: usize,
    /// Number of seed draws used, starting at 1.
    pub attempts: usize,
}

/// `S = sum_i K_{k_i}(A, b_i)` for Gaussian `b_i` drawn from named
/// substreams of the master seed. With a target index, seeds are redrawn
/// until both `Ind_A(S)` and `dim S = sum k_i` come out as expected.
pub fn krylov_sum_subspace(a: &CMat, spec: &KrylovSumSpec) -> Result<KrylovSum> {
    if spec.orders.is_empty() || spec.orders.contains(&0) {
        return Err(Error::Invalid("Krylov orders must be non-empty and at least 1".into()));
    }
    let n = a.nrows();
    let want_dim: usize = spec.orders.iter().sum();
    for attempt in 0..spec.max_attempts.max(1) {
        let seeds: Vec<CVec> = (0..spec.orders.len())
            .map(|i| gaussian_vector(n, spec.field, &mut substream(spec.seed, &format!("krylov-{attempt}-{i}"))))
            .collect();
        let mut cols = Vec::with_capacity(spec.orders.len());
        for (b, &k) in seeds.iter().zip(&spec.orders) {
            cols.push(krylov(a, b, k)?.space.into_basis());
        }
        let refs: Vec<&CMat> = cols.iter().collect();
        let space = Subspace::span(&hstack(&refs));
        let index = index_of_invariance(a, &space)?;
        match spec.target_index {
            Some(t) if t != index || space.dim() != want_dim => continue,
            _ => return Ok(KrylovSum { space, seeds, index, attempts: attempt + 1 }),
        }
    }
    Err(Error::NoConvergence("Krylov seeds never reached the target index"))
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonSweepConfig {
    /// Poisson grid side; `N = m^2`.
    pub m: usize,
    pub orders: Vec<usize>,
    /// Number of grid points `K`.
    pub count: usize,
    pub omega_lo_exp: f64,
    pub omega_hi_exp: f64,
    pub seed: u64,
    pub max_attempts: usize,
    /// Directory for `sigma.csv`, `coords.csv` and `meta.json`.
    pub out_dir: Option<PathBuf>,
    /// Also write every solution to `solutions.csv`.
    pub write_solutions: bool,
}

impl Default for PoissonSweepConfig {
    fn default() -> Self {
        PoissonSweepConfig {
            m: 23,
            orders: vec![11, 6],
            count: 200,
            omega_lo_exp: -3.0,
            omega_hi_exp: 3.0,
            seed: 2024,
            max_attempts: 20,
            out_dir: None,
            write_solutions: false,
        }
    }
}

/// Run metadata, written next to the CSV files.
#[derive(Clone, Debug, Serialize)]
pub struct PoissonSweepMeta {
    pub config: PoissonSweepConfig,
    pub n: usize,
    pub dim_s: usize,
    pub index: usize,
    pub krylov_attempts: usize,
    pub est_dim: usize,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct PoissonSweepResult {
    pub sweep: SweepResult,
    pub meta: PoissonSweepMeta,
}

pub fn run_poisson_sweep(config: &PoissonSweepConfig) -> Result<PoissonSweepResult> {
    let a = poisson_2d(config.m)?.into_matrix();
    let n = a.nrows();
    let spec = KrylovSumSpec {
        orders: config.orders.clone(),
        target_index: Some(config.orders.len()),
        max_attempts: config.max_attempts,
        field: Field::Real,
        seed: config.seed,
    };
    let ks = krylov_sum_subspace(&a, &spec)?;
    let b = gaussian_vector(n, Field::Real, &mut substream(config.seed, "rhs"));
    let inst = ProblemInstance::linear(&a, ks.space.clone(), b)?;
    let grid: Vec<Shift> = log_grid(config.omega_lo_exp, config.omega_hi_exp, config.count)
        .into_iter()
        .map(Shift::Finite)
        .collect();
    let sweep = estimate_dim_xb(&inst, &grid)?;
    let meta = PoissonSweepMeta {
        config: config.clone(),
        n,
        dim_s: ks.space.dim(),
        index: ks.index,
        krylov_attempts: ks.attempts,
        est_dim: sweep.est_dim,
        failures: sweep.failures.len(),
    };
    if let Some(dir) = &config.out_dir {
        write_sweep(dir, &sweep, config.write_solutions)?;
        let w = io::create(&dir.join("meta.json"))?;
        serde_json::to_writer_pretty(w, &meta)?;
    }
    Ok(PoissonSweepResult { sweep, meta })
}

/// Writes `sigma.csv`, `coords.csv` (on `max(est_dim, 1)` directions) and
/// optionally `solutions.csv` into `dir`.
pub fn write_sweep(dir: &std::path::Path, sweep: &SweepResult, solutions: bool) -> Result<()> {
    io::write_sigma_csv(io::create(&dir.join("sigma.csv"))?, &sweep.sigma)?;
    io::write_coords_csv(io::create(&dir.join("coords.csv"))?, &sweep.omegas, &sweep.coords, sweep.est_dim.max(1))?;
    if solutions {
        io::write_solutions_csv(io::create(&dir.join("solutions.csv"))?, &sweep.omegas, &sweep.x)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;

    #[test]
    fn poisson_small() {
        let a = poisson_2d(2).unwrap();
        assert_eq!(a.shape(), (4, 4));
        assert!(a.is_hermitian());
        assert_eq!(a.field(), Field::Real);
        let minus_ones = a.iter().filter(|z| z.re == -1.0).count();
        assert_eq!(minus_ones, 8); // four grid edges, each stored twice
        assert!((0..4).all(|i| a[(i, i)].re == 4.0));
        // 2x2 grid: 0-1, 2-3 horizontal and 0-2, 1-3 vertical.
        for (i, j) in [(0, 1), (2, 3), (0, 2), (1, 3)] {
            assert_eq!(a[(i, j)].re, -1.0);
        }
        assert_eq!(a[(0, 3)].re, 0.0);
        assert!(poisson_2d(1).is_err());
    }

    #[test]
    fn poisson_spectrum_inside_gershgorin() {
        let a = poisson_2d(7).unwrap();
        let e = hermitian_eig(&a).unwrap();
        assert!(e.lambda_min() > 0.0 && e.lambda_max() < 8.0);
        // Closed form: 4 - 2 cos(i pi / (m+1)) - 2 cos(j pi / (m+1)).
        let h = std::f64::consts::PI / 8.0;
        let lo = 4.0 - 4.0 * h.cos();
        assert!((e.lambda_min() - lo).abs() < 1e-12);
        assert_eq!(poisson_2d(23).unwrap().nrows(), 529);
    }

    #[test]
    fn single_krylov_has_index_one() {
        let a = poisson_2d(5).unwrap().into_matrix();
        let ks = krylov_sum_subspace(&a, &KrylovSumSpec::new(vec![5], 3)).unwrap();
        assert_eq!(ks.index, 1);
        assert_eq!(ks.space.dim(), 5);
    }

    #[test]
    fn krylov_sum_index_is_subadditive() {
        let a = poisson_2d(6).unwrap().into_matrix();
        let spec = KrylovSumSpec { target_index: None, ..KrylovSumSpec::new(vec![4, 3, 2], 8) };
        let ks = krylov_sum_subspace(&a, &spec).unwrap();
        assert!(ks.index <= 3);
        assert_eq!(ks.attempts, 1);
        assert!(krylov_sum_subspace(&a, &KrylovSumSpec::new(vec![], 1)).is_err());
        let impossible = KrylovSumSpec { target_index: Some(5), max_attempts: 2, ..KrylovSumSpec::new(vec![2], 1) };
        assert!(krylov_sum_subspace(&a, &impossible).is_err());
    }

    #[test]
    fn small_poisson_run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PoissonSweepConfig {
            m: 8,
            orders: vec![5, 3],
            count: 60,
            out_dir: Some(dir.path().to_path_buf()),
            write_solutions: true,
            ..Default::default()
        };
        let r = run_poisson_sweep(&cfg).unwrap();
        assert_eq!(r.meta.index, 2);
        assert_eq!(r.meta.dim_s, 8);
        assert_eq!(r.sweep.est_dim, 2);
        let sigma = std::fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
        assert_eq!(sigma.lines().count(), 61);
        let coords = std::fs::read_to_string(dir.path().join("coords.csv")).unwrap();
        assert!(coords.starts_with("omega,pc1,pc2\n"));
        assert!(dir.path().join("solutions.csv").exists());
        assert!(dir.path().join("meta.json").exists());

        // Same seed, same bytes.
        let dir2 = tempfile::tempdir().unwrap();
        let cfg2 = PoissonSweepConfig { out_dir: Some(dir2.path().to_path_buf()), ..cfg };
        run_poisson_sweep(&cfg2).unwrap();
        for f in ["sigma.csv", "coords.csv", "solutions.csv"] {
            assert_eq!(
                std::fs::read(dir.path().join(f)).unwrap(),
                std::fs::read(dir2.path().join(f)).unwrap(),
                "{f}"
            );
        }
    }

    #[test]
    fn invariant_subspace_gives_constant_sweep() {
        let a = poisson_2d(6).unwrap().into_matrix();
        let e = hermitian_eig(&a).unwrap();
        let s = Subspace::span(&e.vectors.columns(3, 4).into_owned());
        let b = gaussian_vector(36, Field::Real, &mut substream(1, "b"));
        let inst = ProblemInstance::linear(&a, s, b).unwrap();
        let grid: Vec<Shift> = log_grid(-3.0, 3.0, 50).into_iter().map(Shift::Finite).collect();
        let r = estimate_dim_xb(&inst, &grid).unwrap();
        assert_eq!(r.est_dim, 0);
        let scale = r.x.column(0).norm();
        assert!(r.sigma[0] <= 1e-12 * scale);
    }
}
