//! Runs every randomized verification suite and prints a summary line each.
//!
//! `cargo run --release --example verify_suites -- [SEED] [TRIALS]`

use paramlsq::verify::run_all;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);
    let trials: usize = args.next().map(|s| s.parse().expect("trials")).unwrap_or(200);
    let mut all_ok = true;
    for r in run_all(seed, trials) {
        println!(
            "{:<13} {:>5}/{:<5} max residual {:.3e}",
            r.suite.to_string(),
            r.passed,
            r.trials,
            r.max_residual
        );
        for f in &r.failures {
            println!("    {f}");
        }
        all_ok &= r.ok();
    }
    std::process::exit(if all_ok { 0 } else { 1 });
}
