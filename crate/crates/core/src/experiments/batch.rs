use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentConfig;
use crate::decoder::{DecodeRecord, Decoder};
use crate::error::{Error, Result};
use crate::lattice::{
    extract_syndrome, logical_failure, FaceSet, Homology, LatticeGeometry, PrepSchedule, PreparationCircuit, SoftInfo,
    Syndrome,
};
use crate::noise::{trial_rng, FaceNoise, NoiseMode, NoiseModel};
use crate::pauli::PauliFrame;
use crate::rep_code::{calibrate_flip_rate, FlipRates, RepBlockReadout, MIN_CALIBRATION_TRIALS};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Verdict of one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub homology: Homology,
}

impl TrialOutcome {
    pub fn failed(&self) -> bool {
        self.homology.is_failure()
    }
}

/// Full record of one trial, for debugging.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// Faces whose decoded readout is flipped.
    pub error: Vec<usize>,
    pub syndrome: Syndrome,
    pub decode: DecodeRecord,
    pub homology: Homology,
    pub failed: bool,
}

/// Aggregated statistics of one batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialBatchResult {
    pub config: ExperimentConfig,
    pub trials: u64,
    pub failures: u64,
    /// Failures with odd winding around each axis.
    pub fail_axis: [u64; 3],
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl TrialBatchResult {
    pub fn from_counts(config: ExperimentConfig, counts: &FailureCounts, seconds: f64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(counts.failures, counts.trials, Z_95);
        Self {
            config,
            trials: counts.trials,
            failures: counts.failures,
            fail_axis: counts.fail_axis,
            rate: if counts.trials == 0 { 0.0 } else { counts.failures as f64 / counts.trials as f64 },
            ci_lo,
            ci_hi,
            seed: config.master_seed,
            seconds,
        }
    }

    /// Binomial standard error of the rate.
    pub fn std_error(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials.max(1) as f64).sqrt()
    }
}

/// Mergeable failure tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FailureCounts {
    pub trials: u64,
    pub failures: u64,
    pub fail_axis: [u64; 3],
}

impl FailureCounts {
    pub fn record(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        self.failures += outcome.failed() as u64;
        for (c, &p) in self.fail_axis.iter_mut().zip(&outcome.homology.parity) {
            *c += p as u64;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.failures += other.failures;
        for (a, b) in self.fail_axis.iter_mut().zip(other.fail_axis) {
            *a += b;
        }
        self
    }
}

/// Settings that do not belong in a config file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchOptions {
    /// Trials of the calibration run behind the soft information.
    pub calibration_trials: u64,
    /// Precomputed flip rates; skips calibration.
    pub flip_rates: Option<FlipRates>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { calibration_trials: MIN_CALIBRATION_TRIALS, flip_rates: None }
    }
}

/// Everything a trial needs, built once per batch and shared across threads.
#[derive(Clone, Debug)]
pub struct TrialRunner {
    config: ExperimentConfig,
    noise: NoiseModel,
    geometry: LatticeGeometry,
    circuit: Option<(PreparationCircuit, SoftInfo)>,
    /// Face posteriors in the face-level modes: unlocated, located.
    face_soft: (f64, f64),
}

/// Per-thread buffers.
#[derive(Clone, Debug)]
pub struct TrialScratch {
    frame: Option<PauliFrame>,
    readouts: Vec<RepBlockReadout>,
    faces: FaceNoise,
    decoder: Decoder,
}

impl TrialRunner {
    pub fn new(config: &ExperimentConfig, options: &BatchOptions) -> Result<Self> {
        config.validate()?;
        let noise = config.noise_model()?;
        let geometry = LatticeGeometry::new(config.d)?;
        let circuit = if config.mode == NoiseMode::Circuit {
            let schedule = PrepSchedule::with_options(&geometry, config.schedule)?;
            let circuit = PreparationCircuit::new(&geometry, &schedule, config.n)?;
            let rates = match options.flip_rates {
                Some(r) => r,
                None => calibrate_flip_rate(config, options.calibration_trials)?.rates,
            };
            let soft = SoftInfo::new(config.n, &rates)?;
            Some((circuit, soft))
        } else {
            if config.n != 1 {
                return Err(Error::Config(format!("{} mode acts on bare faces and needs n = 1", config.mode)));
            }
            None
        };
        let face_soft = match config.mode {
            NoiseMode::Erasure => (0.0, 0.5),
            _ => (config.p, 0.5),
        };
        Ok(Self { config: *config, noise, geometry, circuit, face_soft })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn scratch(&self) -> TrialScratch {
        let faces = self.geometry.num_faces();
        TrialScratch {
            frame: self.circuit.as_ref().map(|(c, _)| c.new_frame()),
            readouts: Vec::new(),
            faces: FaceNoise { flips: vec![false; faces], located: vec![false; faces] },
            decoder: Decoder::new(&self.geometry),
        }
    }

    /// Samples the noise of trial `trial_index` and returns the syndrome and
    /// the face flips it came from.
    fn sample(&self, trial_index: u64, scratch: &mut TrialScratch) -> Result<(Syndrome, FaceSet)> {
        let mut rng = trial_rng(self.config.master_seed, trial_index);
        let g = &self.geometry;
        match &self.circuit {
            Some((circuit, soft)) => {
                let frame = scratch.frame.as_mut().expect("circuit scratch has a frame");
                circuit.run(frame, &self.noise, Some(soft), &mut rng, &mut scratch.readouts)?;
                let syndrome = extract_syndrome(g, &scratch.readouts)?;
                let error =
                    FaceSet::from_mask(scratch.readouts[..g.num_faces()].iter().map(|r| r.majority_flip).collect());
                Ok((syndrome, error))
            }
            None => {
                self.noise.sample_code_capacity_into(&mut rng, &mut scratch.faces)?;
                let flips = FaceSet::from_mask(scratch.faces.flips.clone());
                let (plain, located) = self.face_soft;
                let mut syndrome = Syndrome::from_faces(g, &flips, plain);
                for (s, &l) in syndrome.face_soft_info.iter_mut().zip(&scratch.faces.located) {
                    if l {
                        *s = located;
                    }
                }
                Ok((syndrome, flips))
            }
        }
    }

    pub fn run_trial(&self, trial_index: u64, scratch: &mut TrialScratch) -> Result<TrialOutcome> {
        let (syndrome, error) = self.sample(trial_index, scratch)?;
        let correction = scratch.decoder.decode(&self.geometry, &syndrome)?;
        let homology = logical_failure(&self.geometry, &error, &correction)?;
        Ok(TrialOutcome { homology })
    }

    pub fn trial_record(&self, trial_index: u64, scratch: &mut TrialScratch) -> Result<TrialRecord> {
        let (syndrome, error) = self.sample(trial_index, scratch)?;
        let decode = scratch.decoder.decode_record(&self.geometry, &syndrome)?;
        let correction = FaceSet::from_faces(self.geometry.num_faces(), decode.correction.iter().copied());
        let homology = logical_failure(&self.geometry, &error, &correction)?;
        Ok(TrialRecord {
            trial_index,
            error: error.iter().collect(),
            syndrome,
            decode,
            homology,
            failed: homology.is_failure(),
        })
    }

    /// Runs trials `range` in parallel and tallies failures. The sum does not
    /// depend on how rayon splits the range.
    pub fn run_range(&self, range: std::ops::Range<u64>) -> Result<FailureCounts> {
        range
            .into_par_iter()
            .map_init(
                || self.scratch(),
                |scratch, t| {
                    let mut counts = FailureCounts::default();
                    counts.record(&self.run_trial(t, scratch)?);
                    Ok(counts)
                },
            )
            .try_reduce(FailureCounts::default, |a, b| Ok(a.merge(b)))
    }

    pub fn run_batch(&self) -> Result<TrialBatchResult> {
        let start = Instant::now();
        let counts = self.run_range(0..self.config.trials)?;
        Ok(TrialBatchResult::from_counts(self.config, &counts, start.elapsed().as_secs_f64()))
    }
}

/// Verdict of a single trial, replayable from `(config, trial_index)`.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialOutcome> {
    let runner = TrialRunner::new(config, &BatchOptions::default())?;
    let mut scratch = runner.scratch();
    runner.run_trial(trial_index, &mut scratch)
}

/// All `config.trials` trials with default options.
pub fn run_batch(config: &ExperimentConfig) -> Result<TrialBatchResult> {
    run_batch_with(config, &BatchOptions::default())
}

pub fn run_batch_with(config: &ExperimentConfig, options: &BatchOptions) -> Result<TrialBatchResult> {
    TrialRunner::new(config, options)?.run_batch()
}
