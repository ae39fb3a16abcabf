use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cluster_qec::experiments::{
    fit_rows, read_results, run_sweep, BatchOptions, CsvRow, ExperimentConfig, ResultsSummary, ResultsWriter,
    SweepOutput, SweepSpec, TrialRunner, CSV_COLUMNS,
};
use cluster_qec::lattice::LatticeGeometry;
use cluster_qec::noise::NoiseMode;
use cluster_qec::rep_code::{calibrate_flip_rate, CalibrationStore, MIN_CALIBRATION_TRIALS};
use cluster_qec::Error;

#[derive(Parser)]
#[command(
    name = "cluster-qec",
    version,
    about = "Threshold Monte Carlo for a repetition code concatenated with the topological cluster state"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one batch and print its CSV row.
    Simulate(SimulateArgs),
    /// Run a grid over distances and error rates.
    Sweep(SweepArgs),
    /// Fit the threshold to a results CSV.
    Fit(FitArgs),
    /// Measure per-class readout flip rates for the soft information.
    Calibrate(CalibrateArgs),
    /// Write the lattice qubit and cell tables as JSON.
    GeometryDump(GeometryArgs),
}

/// Config file plus per-key overrides.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    meas_scale: Option<f64>,
    /// Merge preparation into measurement (no preparation error).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    fused: Option<bool>,
    /// circuit, code_capacity or erasure.
    #[arg(long)]
    mode: Option<NoiseMode>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, alias = "master-seed")]
    seed: Option<u64>,
    /// Trials of the calibration run in circuit mode.
    #[arg(long, default_value_t = MIN_CALIBRATION_TRIALS)]
    calibration_trials: u64,
    /// Calibration store (JSON), read and updated.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

impl ConfigArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.d {
            c.d = v;
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.beta {
            c.beta = v;
        }
        if let Some(v) = self.meas_scale {
            c.meas_scale = v;
        }
        if let Some(v) = self.fused {
            c.fused_init_measure = v;
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn batch_options(&self, config: &ExperimentConfig) -> Result<BatchOptions, Error> {
        let mut options = BatchOptions { calibration_trials: self.calibration_trials, flip_rates: None };
        if let (Some(path), NoiseMode::Circuit) = (&self.calibration, config.mode) {
            let mut store = CalibrationStore::load(path)?;
            let table = match store.get(config) {
                Some(t) => t.clone(),
                None => {
                    let t = calibrate_flip_rate(config, self.calibration_trials)?;
                    store.insert(t.clone());
                    store.save(path)?;
                    t
                }
            };
            options.flip_rates = Some(table.rates);
        }
        Ok(options)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Append the row to this CSV.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write a JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write syndrome, matching and correction of the first trials as JSON.
    #[arg(long)]
    debug_dump: Option<PathBuf>,
    /// Number of trials in the debug dump.
    #[arg(long, default_value_t = 10)]
    debug_trials: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated distances.
    #[arg(long, value_delimiter = ',', required = true)]
    ds: Vec<usize>,
    /// Comma-separated physical error rates.
    #[arg(long, value_delimiter = ',', required = true)]
    ps: Vec<f64>,
    /// Results CSV, appended row by row.
    #[arg(long)]
    output: PathBuf,
    /// Keep existing rows and skip grid points already in the output.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Results CSV.
    #[arg(long)]
    input: PathBuf,
    /// Only use rows with this code length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    meas_scale: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    fused: Option<bool>,
    #[arg(long)]
    mode: Option<NoiseMode>,
    /// Write the fit as JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Write the table into this store instead of printing it.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn csv_line(row: &CsvRow) -> Result<String, Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(row)?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8"))
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let config = args.config.config()?;
    let runner = TrialRunner::new(&config, &args.config.batch_options(&config)?)?;
    if let Some(path) = &args.debug_dump {
        let mut scratch = runner.scratch();
        let records = (0..args.debug_trials.min(config.trials))
            .map(|t| runner.trial_record(t, &mut scratch))
            .collect::<Result<Vec<_>, _>>()?;
        std::fs::write(path, serde_json::to_string_pretty(&records)?)?;
    }
    let row = CsvRow::from(&runner.run_batch()?);
    if let Some(path) = &args.output {
        ResultsWriter::open(path)?.append(&row)?;
    }
    if let Some(path) = &args.summary {
        ResultsSummary::new(vec![row.clone()]).save(path)?;
    }
    print!("{}\n{}", CSV_COLUMNS.join(","), csv_line(&row)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let base = args.config.config()?;
    let spec = SweepSpec { base, distances: args.ds, rates: args.ps };
    let configs = spec.configs()?;
    let options = BatchOptions { calibration_trials: args.config.calibration_trials, flip_rates: None };
    let output =
        SweepOutput { csv: Some(&args.output), resume: args.resume, calibration: args.config.calibration.as_deref() };
    let total = configs.len();
    let mut done = 0;
    let rows = run_sweep(&configs, &options, output, |row, skipped| {
        done += 1;
        let tag = if skipped { "skipped" } else { "done" };
        eprintln!(
            "[{done}/{total}] {tag} d={} p={} rate={:.4e} ({}/{}) {:.1}s",
            row.d, row.p, row.rate, row.failures, row.trials, row.seconds
        );
    })?;
    if let Some(path) = &args.summary {
        ResultsSummary::new(rows).save(path)?;
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Error> {
    let rows: Vec<CsvRow> = read_results(&args.input)?
        .into_iter()
        .filter(|r| args.n.is_none_or(|v| r.n == v))
        .filter(|r| args.beta.is_none_or(|v| r.beta == v))
        .filter(|r| args.meas_scale.is_none_or(|v| r.meas_scale == v))
        .filter(|r| args.fused.is_none_or(|v| r.fused == v))
        .filter(|r| args.mode.is_none_or(|v| r.mode == v))
        .collect();
    if let Some(first) = rows.first() {
        let key = |r: &CsvRow| (r.n, r.beta.to_bits(), r.meas_scale.to_bits(), r.fused, r.mode);
        if rows.iter().any(|r| key(r) != key(first)) {
            return Err(Error::Config(
                "rows mix several noise settings; select one with --n, --beta, --meas-scale, --fused or --mode".into(),
            ));
        }
    }
    let fit = fit_rows(&rows)?;
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("p_th = {:.5e} +- {:.1e} ({:?})", fit.p_th(), fit.p_th_se(), fit.primary);
    let json = serde_json::json!({ "schema_version": cluster_qec::SCHEMA_VERSION, "fit": fit });
    write_or_print(args.output.as_deref(), &serde_json::to_string_pretty(&json)?)
}

fn calibrate(args: CalibrateArgs) -> Result<(), Error> {
    let config = args.config.config()?;
    let table = calibrate_flip_rate(&config, args.config.calibration_trials)?;
    match &args.store {
        Some(path) => {
            let mut store = CalibrationStore::load(path)?;
            store.insert(table);
            store.save(path)
        }
        None => write_or_print(None, &serde_json::to_string_pretty(&table)?),
    }
}

fn geometry_dump(args: GeometryArgs) -> Result<(), Error> {
    let g = LatticeGeometry::new(args.d).map_err(|e| Error::Config(e.to_string()))?;
    write_or_print(args.output.as_deref(), &serde_json::to_string_pretty(&g.dump_json())?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
        Command::Calibrate(a) => calibrate(a),
        Command::GeometryDump(a) => geometry_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 1,
                Error::FitDegenerate(_) => 3,
                _ => 2,
            })
        }
    }
}
