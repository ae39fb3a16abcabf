use std::path::Path;

use super::{read_results, BatchOptions, CsvRow, ExperimentConfig, ResultsWriter, TrialBatchResult, TrialRunner};
use crate::error::{Error, Result};
use crate::noise::NoiseMode;
use crate::rep_code::{calibrate_flip_rate, CalibrationStore};

/// Grid of distances and error rates around a base config.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub distances: Vec<usize>,
    pub rates: Vec<f64>,
}

impl SweepSpec {
    /// One config per grid point, distance-major. Each point gets its own
    /// seed derived from the base seed and the point's parameters.
    pub fn configs(&self) -> Result<Vec<ExperimentConfig>> {
        if self.distances.is_empty() || self.rates.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        let mut out = Vec::with_capacity(self.distances.len() * self.rates.len());
        for &d in &self.distances {
            for &p in &self.rates {
                let mut c = ExperimentConfig { d, p, ..self.base };
                c.master_seed = point_seed(self.base.master_seed, &c);
                c.validate()?;
                out.push(c);
            }
        }
        Ok(out)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one grid point. Points of a sweep get independent streams; a row
/// is replayed by running its config with the recorded seed.
pub fn point_seed(master_seed: u64, config: &ExperimentConfig) -> u64 {
    let mode = match config.mode {
        NoiseMode::Circuit => 0,
        NoiseMode::CodeCapacity => 1,
        NoiseMode::Erasure => 2,
    };
    let fields = [
        config.d as u64,
        config.n as u64,
        config.p.to_bits(),
        config.beta.to_bits(),
        config.meas_scale.to_bits(),
        config.fused_init_measure as u64,
        mode,
    ];
    fields.iter().fold(splitmix64(master_seed), |h, &f| splitmix64(h ^ f))
}

/// Where sweep results and calibration tables go.
#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOutput<'a> {
    /// Results CSV, appended row by row.
    pub csv: Option<&'a Path>,
    /// Skip grid points already present in `csv`.
    pub resume: bool,
    /// Calibration store consulted before calibrating and updated after.
    pub calibration: Option<&'a Path>,
}

/// Whether `row` records the batch `config` would produce.
fn same_point(row: &CsvRow, config: &ExperimentConfig) -> bool {
    let c = row.config();
    c.d == config.d
        && c.n == config.n
        && c.p == config.p
        && c.beta == config.beta
        && c.meas_scale == config.meas_scale
        && c.fused_init_measure == config.fused_init_measure
        && c.mode == config.mode
        && c.trials == config.trials
        && c.master_seed == config.master_seed
}

/// Runs each config in turn, persisting every row as soon as it is done.
/// Returns the rows of all grid points, including ones skipped on resume.
pub fn run_sweep(
    configs: &[ExperimentConfig],
    options: &BatchOptions,
    output: SweepOutput<'_>,
    mut progress: impl FnMut(&CsvRow, bool),
) -> Result<Vec<CsvRow>> {
    if configs.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    // Opening the writer first drops a partial line left by an interruption.
    let mut writer = match output.csv {
        Some(path) => {
            if !output.resume && path.exists() {
                std::fs::remove_file(path)?;
            }
            Some(ResultsWriter::open(path)?)
        }
        None => None,
    };
    let existing = match output.csv {
        Some(path) if output.resume => read_results(path)?,
        _ => Vec::new(),
    };
    let mut store = match output.calibration {
        Some(path) => Some(CalibrationStore::load(path)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(configs.len());
    for config in configs {
        if let Some(row) = existing.iter().find(|r| same_point(r, config)) {
            progress(row, true);
            rows.push(row.clone());
            continue;
        }
        let mut opts = *options;
        if config.mode == NoiseMode::Circuit && opts.flip_rates.is_none() {
            if let Some(store) = store.as_mut() {
                let table = match store.get(config) {
                    Some(t) => t.clone(),
                    None => {
                        let t = calibrate_flip_rate(config, opts.calibration_trials)?;
                        store.insert(t.clone());
                        store.save(output.calibration.expect("store implies path"))?;
                        t
                    }
                };
                opts.flip_rates = Some(table.rates);
            }
        }
        let result: TrialBatchResult = TrialRunner::new(config, &opts)?.run_batch()?;
        let row = CsvRow::from(&result);
        if let Some(w) = writer.as_mut() {
            w.append(&row)?;
        }
        progress(&row, false);
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SweepSpec {
        SweepSpec {
            base: ExperimentConfig { mode: NoiseMode::CodeCapacity, trials: 200, master_seed: 3, ..Default::default() },
            distances: vec![3, 4],
            rates: vec![0.02, 0.04, 0.06],
        }
    }

    #[test]
    fn grid_cardinality_and_distinct_seeds() {
        let configs = spec().configs().unwrap();
        assert_eq!(configs.len(), 6);
        let mut seeds: Vec<u64> = configs.iter().map(|c| c.master_seed).collect();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 6);
        assert!(SweepSpec { rates: vec![], ..spec() }.configs().is_err());
    }

    #[test]
    fn single_point_matches_batch() {
        let config = spec().configs().unwrap()[0];
        let rows = run_sweep(&[config], &BatchOptions::default(), SweepOutput::default(), |_, _| {}).unwrap();
        let batch = super::super::run_batch(&config).unwrap();
        assert_eq!(rows[0].failures, batch.failures);
        assert_eq!(rows[0].seed, config.master_seed);
    }

    #[test]
    fn resume_skips_completed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("sweep.csv");
        let configs = spec().configs().unwrap();
        let out = SweepOutput { csv: Some(&csv), resume: true, calibration: None };
        let first = run_sweep(&configs[..2], &BatchOptions::default(), out, |_, _| {}).unwrap();
        let mut skipped = 0;
        let all = run_sweep(&configs, &BatchOptions::default(), out, |_, s| skipped += s as usize).unwrap();
        assert_eq!(skipped, 2);
        assert_eq!(&all[..2], &first[..]);
        assert_eq!(read_results(&csv).unwrap().len(), 6);

        let fresh = run_sweep(&configs, &BatchOptions::default(), SweepOutput::default(), |_, _| {}).unwrap();
        for (a, b) in fresh.iter().zip(&all) {
            assert_eq!(a.reproducible_text().unwrap(), b.reproducible_text().unwrap());
        }
    }
}
