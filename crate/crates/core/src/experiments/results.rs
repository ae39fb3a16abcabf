use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, TrialBatchResult};
use crate::error::{Error, Result};
use crate::lattice::ScheduleOptions;
use crate::noise::NoiseMode;

/// Column order of the results CSV.
pub const CSV_COLUMNS: [&str; 18] = [
    "schema_version",
    "d",
    "n",
    "p",
    "beta",
    "meas_scale",
    "fused",
    "mode",
    "trials",
    "failures",
    "fail_x",
    "fail_y",
    "fail_z",
    "rate",
    "ci_lo",
    "ci_hi",
    "seed",
    "seconds",
];

/// One CSV row: a batch result flattened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema_version: u32,
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub meas_scale: f64,
    pub fused: bool,
    pub mode: NoiseMode,
    pub trials: u64,
    pub failures: u64,
    pub fail_x: u64,
    pub fail_y: u64,
    pub fail_z: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl From<&TrialBatchResult> for CsvRow {
    fn from(r: &TrialBatchResult) -> Self {
        let c = &r.config;
        Self {
            schema_version: crate::SCHEMA_VERSION,
            d: c.d,
            n: c.n,
            p: c.p,
            beta: c.beta,
            meas_scale: c.meas_scale,
            fused: c.fused_init_measure,
            mode: c.mode,
            trials: r.trials,
            failures: r.failures,
            fail_x: r.fail_axis[0],
            fail_y: r.fail_axis[1],
            fail_z: r.fail_axis[2],
            rate: r.rate,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            seed: r.seed,
            seconds: r.seconds,
        }
    }
}

impl CsvRow {
    /// Config that produced this row (default schedule).
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            d: self.d,
            n: self.n,
            p: self.p,
            beta: self.beta,
            meas_scale: self.meas_scale,
            fused_init_measure: self.fused,
            mode: self.mode,
            trials: self.trials,
            master_seed: self.seed,
            schedule: ScheduleOptions::default(),
        }
    }

    /// The row rendered as CSV text without the trailing newline, with the
    /// `seconds` column left out. Two runs of the same batch agree on this.
    pub fn reproducible_text(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.serialize(self)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let line = String::from_utf8(bytes).expect("csv output is utf-8");
        let line = line.trim_end();
        Ok(line.rsplit_once(',').map_or(line, |(head, _)| head).to_string())
    }
}

/// Reads a results CSV, checking the header first so that a wrong file gets
/// a column-level diagnostic.
pub fn read_results(path: &Path) -> Result<Vec<CsvRow>> {
    read_results_from(File::open(path)?)
}

pub fn read_results_from<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let missing: Vec<&str> = CSV_COLUMNS.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("results file lacks column(s): {}", missing.join(", "))));
    }
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: CsvRow = row?;
        if row.schema_version != crate::SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "row has schema version {}, expected {}",
                row.schema_version,
                crate::SCHEMA_VERSION
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Append-only CSV sink. Each row is flushed and synced before `append`
/// returns, so an interrupted run loses at most the row in flight.
pub struct ResultsWriter {
    file: File,
}

impl ResultsWriter {
    /// Opens `path` for appending, writing the header if the file is new or
    /// empty. A trailing partial line left by an earlier crash is cut off.
    pub fn open(path: &Path) -> Result<Self> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let len = file.metadata()?.len();
        if len > 0 {
            let mut text = Vec::new();
            file.seek(SeekFrom::Start(0))?;
            file.read_to_end(&mut text)?;
            if text.last() != Some(&b'\n') {
                let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                file.set_len(keep as u64)?;
            }
        }
        let mut writer = Self { file };
        if writer.file.metadata()?.len() == 0 {
            writeln!(writer.file, "{}", CSV_COLUMNS.join(","))?;
            writer.file.sync_data()?;
        }
        Ok(writer)
    }

    pub fn append(&mut self, row: &CsvRow) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.serialize(row)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.file.write_all(&bytes)?;
        self.file.flush()?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// JSON summary of a set of batches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsSummary {
    pub schema_version: u32,
    pub rows: Vec<CsvRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<serde_json::Value>,
}

impl ResultsSummary {
    pub fn new(rows: Vec<CsvRow>) -> Self {
        Self { schema_version: crate::SCHEMA_VERSION, rows, fit: None }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
