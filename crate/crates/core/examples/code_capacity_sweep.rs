//! Face-level noise sweep over distances and error rates, then a threshold fit.
//!
//! `cargo run --release --example code_capacity_sweep -- 2000`

use cluster_qec::experiments::{fit_rows, run_sweep, BatchOptions, ExperimentConfig, SweepOutput, SweepSpec};
use cluster_qec::noise::NoiseMode;

fn main() -> cluster_qec::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let spec = SweepSpec {
        base: ExperimentConfig { mode: NoiseMode::CodeCapacity, trials, master_seed: 11, ..Default::default() },
        distances: vec![4, 6, 8],
        rates: vec![0.024, 0.027, 0.030, 0.033, 0.036],
    };
    let rows = run_sweep(&spec.configs()?, &BatchOptions::default(), SweepOutput::default(), |row, _| {
        println!("d={} p={:.3} rate={:.4} [{:.4}, {:.4}]", row.d, row.p, row.rate, row.ci_lo, row.ci_hi);
    })?;
    match fit_rows(&rows) {
        Ok(fit) => println!("p_th = {:.4e} +- {:.1e} ({:?} model)", fit.p_th(), fit.p_th_se(), fit.primary),
        Err(e) => println!("fit failed: {e}"),
    }
    Ok(())
}
