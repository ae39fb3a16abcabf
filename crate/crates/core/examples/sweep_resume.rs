//! Crash-safe sweep: rows are appended as they finish and a resumed run
//! skips the ones already on disk.

use cluster_qec::experiments::{read_results, run_sweep, BatchOptions, ExperimentConfig, SweepOutput, SweepSpec};
use cluster_qec::noise::NoiseMode;

fn main() -> cluster_qec::Result<()> {
    let path = std::env::temp_dir().join("cluster-qec-sweep-example.csv");
    let _ = std::fs::remove_file(&path);
    let spec = SweepSpec {
        base: ExperimentConfig { mode: NoiseMode::Erasure, trials: 500, master_seed: 2, ..Default::default() },
        distances: vec![3, 4],
        rates: vec![0.2, 0.25, 0.3],
    };
    let configs = spec.configs()?;
    let out = SweepOutput { csv: Some(&path), resume: true, calibration: None };
    // First run stops after two points, as if interrupted.
    run_sweep(&configs[..2], &BatchOptions::default(), out, |_, _| {})?;
    println!("{} rows on disk", read_results(&path)?.len());
    run_sweep(&configs, &BatchOptions::default(), out, |row, skipped| {
        println!("d={} p={} {}", row.d, row.p, if skipped { "skipped" } else { "ran" });
    })?;
    println!("{} rows on disk at {}", read_results(&path)?.len(), path.display());
    Ok(())
}
