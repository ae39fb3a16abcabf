//! One circuit-level batch: calibrate soft information, sample the noisy
//! preparation, decode every trial.
//!
//! `cargo run --release --example circuit_batch -- 4 3 0.01`

use cluster_qec::experiments::{run_batch, ExperimentConfig};

fn main() -> cluster_qec::Result<()> {
    let mut args = std::env::args().skip(1);
    let d = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let p = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let config = ExperimentConfig { d, n, p, beta: 1000.0, trials: 2000, master_seed: 7, ..Default::default() };
    let r = run_batch(&config)?;
    println!(
        "d={d} n={n} p={p}: {}/{} failures, rate {:.4} [{:.4}, {:.4}], axes {:?}, {:.2}s",
        r.failures, r.trials, r.rate, r.ci_lo, r.ci_hi, r.fail_axis, r.seconds
    );
    Ok(())
}
