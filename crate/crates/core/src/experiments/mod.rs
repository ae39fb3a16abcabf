//! Monte Carlo batches, parameter sweeps, result files and threshold fits.

mod batch;
mod config;
mod fit;
mod results;
mod sweep;

pub use batch::{
    run_batch, run_batch_with, run_trial, wilson_interval, BatchOptions, FailureCounts, TrialBatchResult, TrialOutcome,
    TrialRecord, TrialRunner, TrialScratch, Z_95,
};
pub use config::{ExperimentConfig, CONFIG_KEYS};
pub use fit::{
    crossing_estimate, fit_ansatz, fit_rows, fit_threshold, monotonicity_warnings, Ansatz, FitModel, FitPoint,
    FitResult, ThresholdFit, MIN_DISTANCES, MIN_RATES_PER_DISTANCE,
};
pub use results::{read_results, read_results_from, CsvRow, ResultsSummary, ResultsWriter, CSV_COLUMNS};
pub use sweep::{point_seed, run_sweep, SweepOutput, SweepSpec};
