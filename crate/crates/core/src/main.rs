use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paramlsq::analysis::{estimate_dim_x, estimate_dim_xb, XSampling};
use paramlsq::decomposition::tridiagonal_block_decomposition;
use paramlsq::experiments::{poisson_2d, run_poisson_sweep, PoissonSweepConfig};
use paramlsq::io::{self, fmt_f64, MmLayout};
use paramlsq::linalg::{DenseMatrix, Field};
use paramlsq::manifolds::{construct_positive_member, manifold_dimension, membership, ManifoldClass};
use paramlsq::solver::{ProblemInstance, Shift};
use paramlsq::subspace::{image, index_of_invariance, sum};
use paramlsq::verify::{run_suite, Suite};
use paramlsq::{Error, Result};

#[derive(Parser)]
#[command(name = "paramlsq", version, about = "Shifted least squares over a subspace: sweeps, index, decomposition, checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the 2D Poisson matrix on an m x m grid.
    Poisson {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve over a grid of shifts and estimate dim X_b.
    Sweep {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        omega_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Seed for the dim X sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Files are written as `<prefix>sigma.csv`, `<prefix>coords.csv`,
        /// `<prefix>solutions.csv`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Print Ind_A(S).
    Index {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Tridiagonal block decomposition as JSON with Matrix Market blocks.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run randomized verification suites; exits 0 iff all pass.
    Verify {
        /// index, main-theorem, convexity, nullspace, manifolds or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Matrix sets M(S, S') and refinements.
    Manifold {
        #[command(subcommand)]
        cmd: ManifoldCmd,
    },
    /// Poisson sweep with S a sum of Krylov spaces.
    PoissonSweep {
        #[arg(long, default_value_t = 23)]
        m: usize,
        /// Krylov orders, one per random seed vector.
        #[arg(long, value_delimiter = ',', default_value = "11,6")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        solutions: bool,
    },
}

#[derive(Subcommand)]
enum ManifoldCmd {
    /// Decide whether A lies in class(S, S').
    Member {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        s_prime: PathBuf,
        /// M, M_inv, M_sym, M_syminv, M_pos or M_symT.
        #[arg(long)]
        class: ManifoldClass,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Build a positive definite member of M_pos(S, S').
    Construct {
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        s_prime: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dimension of class(S, S') for dim S = p, dim S' = p + q.
    Dim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        class: ManifoldClass,
        /// real or complex.
        #[arg(long, default_value = "real")]
        field: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(matrix: &Path, subspace: &Path) -> Result<(DenseMatrix, paramlsq::subspace::Subspace)> {
    let a = io::load_matrix_market(matrix)?;
    let s = io::load_subspace(subspace)?;
    if a.nrows() != s.ambient_dim() {
        return Err(Error::Dimension(format!("{}x{} matrix, subspace in F^{}", a.nrows(), a.ncols(), s.ambient_dim())));
    }
    Ok((a, s))
}

fn with_suffix(prefix: &Path, name: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(name);
    PathBuf::from(s)
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Poisson { m, out } => {
            let a = poisson_2d(m)?;
            io::save_matrix_market(&out, &a, MmLayout::Coordinate)?;
            println!("n {}", a.nrows());
        }
        Cmd::Sweep { matrix, subspace, b, omega_min, omega_max, count, seed, out_prefix } => {
            let (a, s) = load(&matrix, &subspace)?;
            let b = io::load_vector(&b)?;
            if count < 2 || omega_min >= omega_max {
                return Err(Error::Invalid("need count >= 2 and omega-min < omega-max".into()));
            }
            // Log spacing for positive ranges, linear otherwise.
            let grid: Vec<f64> = if omega_min > 0.0 {
                paramlsq::analysis::log_grid(omega_min.log10(), omega_max.log10(), count)
            } else {
                (0..count).map(|i| omega_min + (omega_max - omega_min) * i as f64 / (count - 1) as f64).collect()
            };
            let inst = ProblemInstance::linear(a.as_matrix(), s.clone(), b)?;
            let shifts: Vec<Shift> = grid.iter().copied().map(Shift::Finite).collect();
            let sweep = estimate_dim_xb(&inst, &shifts)?;
            let x = estimate_dim_x(a.as_matrix(), &s, &XSampling { seed, ..Default::default() })?;
            let q = index_of_invariance(a.as_matrix(), &s)?;
            io::write_sigma_csv(io::create(&with_suffix(&out_prefix, "sigma.csv"))?, &sweep.sigma)?;
            io::write_coords_csv(
                io::create(&with_suffix(&out_prefix, "coords.csv"))?,
                &sweep.omegas,
                &sweep.coords,
                sweep.est_dim.max(1),
            )?;
            io::write_solutions_csv(io::create(&with_suffix(&out_prefix, "solutions.csv"))?, &sweep.omegas, &sweep.x)?;
            println!("index {q}");
            println!("est_dim_xb {}", sweep.est_dim);
            println!("est_dim_x {}", x.est_dim);
            for (i, r) in sweep.sigma_ratios().iter().take(q + 2).enumerate() {
                println!("sigma_ratio[{}] {}", i + 1, fmt_f64(*r));
            }
            for (w, msg) in &sweep.failures {
                eprintln!("skipped omega {}: {msg}", fmt_f64(*w));
            }
        }
        Cmd::Index { matrix, subspace } => {
            let (a, s) = load(&matrix, &subspace)?;
            let q = index_of_invariance(a.as_matrix(), &s)?;
            let closure = sum(&s, &image(a.as_matrix(), &s)?)?;
            println!("n {}", s.ambient_dim());
            println!("dim_s {}", s.dim());
            println!("dim_s_plus_as {}", closure.dim());
            println!("index {q}");
        }
        Cmd::Decompose { matrix, subspace, out } => {
            let (a, s) = load(&matrix, &subspace)?;
            let dec = tridiagonal_block_decomposition(a.as_matrix(), &s)?;
            io::save_decomposition(&out, &dec)?;
            println!("n {} p {} q {} r {}", dec.n(), dec.p(), dec.q(), dec.r());
            println!("reconstruction_error {}", fmt_f64(dec.reconstruction_error()));
        }
        Cmd::Verify { suite, seed, trials } => {
            let suites = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let mut ok = true;
            for s in suites {
                let r = run_suite(s, seed, trials);
                println!(
                    "{} {} {}/{} max_residual {}",
                    if r.ok() { "PASS" } else { "FAIL" },
                    r.suite,
                    r.passed,
                    r.trials,
                    fmt_f64(r.max_residual)
                );
                for f in &r.failures {
                    println!("  {f}");
                }
                ok &= r.ok();
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Cmd::Manifold { cmd } => manifold(cmd)?,
        Cmd::PoissonSweep { m, orders, count, seed, out_dir, solutions } => {
            let cfg = PoissonSweepConfig { m, orders, count, seed, out_dir, write_solutions: solutions, ..Default::default() };
            let r = run_poisson_sweep(&cfg)?;
            println!("n {} dim_s {} index {}", r.meta.n, r.meta.dim_s, r.meta.index);
            println!("est_dim_xb {}", r.meta.est_dim);
            for (i, x) in r.sweep.sigma_ratios().iter().take(r.meta.index + 2).enumerate() {
                println!("sigma_ratio[{}] {}", i + 1, fmt_f64(*x));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn manifold(cmd: ManifoldCmd) -> Result<()> {
    match cmd {
        ManifoldCmd::Member { matrix, s, s_prime, class, tol } => {
            let a = io::load_matrix_market(&matrix)?;
            let (s, sp) = (io::load_subspace(&s)?, io::load_subspace(&s_prime)?);
            println!("{}", membership(a.as_matrix(), &s, &sp, class, tol)?);
        }
        ManifoldCmd::Construct { s, s_prime, out } => {
            let (s, sp) = (io::load_subspace(&s)?, io::load_subspace(&s_prime)?);
            let w = construct_positive_member(&s, &sp)?;
            io::save_matrix_market(&out, &w.matrix, MmLayout::Array)?;
            println!("omega {}", fmt_f64(w.omega));
        }
        ManifoldCmd::Dim { n, p, q, class, field } => {
            let field = match field.as_str() {
                "real" => Field::Real,
                "complex" => Field::Complex,
                other => return Err(Error::Invalid(format!("field must be real or complex, got '{other}'"))),
            };
            match manifold_dimension(n, p, q, class, field)? {
                Some(d) => println!("{d}"),
                None => println!("empty"),
            }
        }
    }
    Ok(())
}
