//! Empirical per-qubit measurement flip rates used as the i.i.d. flip model
//! behind the block posteriors.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::lattice::{LatticeGeometry, PositionClass, PrepSchedule, PreparationCircuit};
use crate::noise::{trial_rng, NoiseMode};

pub const MIN_CALIBRATION_TRIALS: u64 = 1_000;

/// Keeps calibration streams disjoint from the decoding trials of the same seed.
const CALIBRATION_SEED_DOMAIN: u64 = 0xC0DE_CA1B_0000_0001;

/// Flip rate per position class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRates {
    pub rates: [f64; PositionClass::COUNT],
}

impl FlipRates {
    pub fn uniform(q: f64) -> Self {
        Self { rates: [q; PositionClass::COUNT] }
    }

    pub fn get(&self, class: PositionClass) -> f64 {
        self.rates[class.0]
    }

    /// Rate pulled just inside `[0, 1/2)`, where the posterior is defined.
    pub fn clamped(&self, class: PositionClass) -> f64 {
        self.get(class).clamp(0.0, 0.5 - 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub schema_version: u32,
    pub key: String,
    pub trials: u64,
    pub seed: u64,
    /// Flipped outcomes per class.
    pub flips: [u64; PositionClass::COUNT],
    /// Measured outcomes per class.
    pub samples: [u64; PositionClass::COUNT],
    pub rates: FlipRates,
}

impl CalibrationTable {
    /// Standard error of each class rate.
    pub fn standard_errors(&self) -> [f64; PositionClass::COUNT] {
        let mut out = [0.0; PositionClass::COUNT];
        for (c, se) in out.iter_mut().enumerate() {
            let q = self.rates.rates[c];
            *se = (q * (1.0 - q) / self.samples[c].max(1) as f64).sqrt();
        }
        out
    }
}

/// Runs the noisy preparation circuit `calibration_trials` times and records
/// how often each physical X outcome differs from the noiseless one, pooled
/// over each position class.
pub fn calibrate_flip_rate(config: &ExperimentConfig, calibration_trials: u64) -> Result<CalibrationTable> {
    config.validate()?;
    if config.mode != NoiseMode::Circuit {
        return Err(Error::Calibration(format!("no circuit to calibrate in {} mode", config.mode)));
    }
    if calibration_trials < MIN_CALIBRATION_TRIALS {
        return Err(Error::Calibration(format!(
            "{calibration_trials} trials requested, need at least {MIN_CALIBRATION_TRIALS}"
        )));
    }
    let geometry = LatticeGeometry::new(config.d)?;
    let schedule = PrepSchedule::with_options(&geometry, config.schedule)?;
    let circuit = PreparationCircuit::new(&geometry, &schedule, config.n)?;
    let noise = config.noise_model()?;
    let seed = config.master_seed ^ CALIBRATION_SEED_DOMAIN;

    let flips = (0..calibration_trials)
        .into_par_iter()
        .map_init(
            || (circuit.new_frame(), Vec::new()),
            |(frame, readouts), t| -> Result<[u64; PositionClass::COUNT]> {
                let mut rng = trial_rng(seed, t);
                circuit.run(frame, &noise, None, &mut rng, readouts)?;
                let mut counts = [0u64; PositionClass::COUNT];
                for (q, r) in readouts.iter().enumerate() {
                    counts[circuit.position_class(q).0] += r.outcomes.count_ones() as u64;
                }
                Ok(counts)
            },
        )
        .try_reduce(
            || [0u64; PositionClass::COUNT],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    let mut per_class_qubits = [0u64; PositionClass::COUNT];
    for q in 0..circuit.num_cluster_qubits() {
        per_class_qubits[circuit.position_class(q).0] += config.n as u64;
    }
    let samples = per_class_qubits.map(|k| k * calibration_trials);
    let mut rates = [0.0; PositionClass::COUNT];
    for c in 0..PositionClass::COUNT {
        if noise.p > 0.0 && flips[c] == 0 {
            return Err(Error::Calibration(format!(
                "no flips observed for {} in {calibration_trials} trials; increase the trial count",
                PositionClass(c).label()
            )));
        }
        rates[c] = flips[c] as f64 / samples[c] as f64;
    }
    Ok(CalibrationTable {
        schema_version: crate::SCHEMA_VERSION,
        key: config.calibration_key(),
        trials: calibration_trials,
        seed,
        flips,
        samples,
        rates: FlipRates { rates },
    })
}

/// JSON file of calibration tables keyed by configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStore {
    pub schema_version: u32,
    pub tables: BTreeMap<String, CalibrationTable>,
}

impl CalibrationStore {
    pub fn new() -> Self {
        Self { schema_version: crate::SCHEMA_VERSION, tables: BTreeMap::new() }
    }

    /// Loads a store, or returns an empty one if the file does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::new());
        }
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn get(&self, config: &ExperimentConfig) -> Option<&CalibrationTable> {
        self.tables.get(&config.calibration_key())
    }

    pub fn insert(&mut self, table: CalibrationTable) {
        self.tables.insert(table.key.clone(), table);
    }
}
