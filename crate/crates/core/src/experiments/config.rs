use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::ScheduleOptions;
use crate::noise::{NoiseMode, NoiseModel};
use crate::rep_code::MAX_CODE_LENGTH;

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 9] =
    ["d", "n", "p", "beta", "meas_scale", "fused_init_measure", "mode", "trials", "master_seed"];

/// One Monte Carlo batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub meas_scale: f64,
    pub fused_init_measure: bool,
    pub mode: NoiseMode,
    pub trials: u64,
    pub master_seed: u64,
    pub schedule: ScheduleOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 4,
            n: 1,
            p: 0.0,
            beta: 1.0,
            meas_scale: 1.0,
            fused_init_measure: false,
            mode: NoiseMode::Circuit,
            trials: 10_000,
            master_seed: 0,
            schedule: ScheduleOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("d = {} must be at least 2", self.d)));
        }
        if self.n == 0 || self.n > MAX_CODE_LENGTH {
            return Err(Error::Config(format!("n = {} outside 1..={MAX_CODE_LENGTH}", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.schedule.validate()?;
        self.noise_model().map(|_| ())
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let model = NoiseModel {
            p: self.p,
            beta: self.beta,
            meas_scale: self.meas_scale,
            fused_init_measure: self.fused_init_measure,
            mode: self.mode,
        };
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }

    /// Identifies the calibration run this config needs.
    pub fn calibration_key(&self) -> String {
        let order: String = self.schedule.round_order.iter().map(|r| r.to_string()).collect();
        format!(
            "d={},n={},p={},beta={},meas_scale={},fused={},seed={},order={order}",
            self.d, self.n, self.p, self.beta, self.meas_scale, self.fused_init_measure, self.master_seed
        )
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("invalid {what} '{value}' for key '{key}'"));
        match key.trim() {
            "d" => self.d = value.parse().map_err(|_| bad("integer"))?,
            "n" => self.n = value.parse().map_err(|_| bad("integer"))?,
            "p" => self.p = value.parse().map_err(|_| bad("number"))?,
            "beta" => self.beta = value.parse().map_err(|_| bad("number"))?,
            "meas_scale" => self.meas_scale = value.parse().map_err(|_| bad("number"))?,
            "fused_init_measure" => self.fused_init_measure = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "mode" => self.mode = value.parse()?,
            "trials" => self.trials = value.parse().map_err(|_| bad("integer"))?,
            "master_seed" => self.master_seed = value.parse().map_err(|_| bad("integer"))?,
            other => {
                return Err(Error::Config(format!("unknown key '{other}'; expected one of {}", CONFIG_KEYS.join(", "))))
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` text (`key: value` also accepted). Blank
    /// lines and `#` comments are skipped; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            config.set(key, value).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Inverse of [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        format!(
            "d = {}\nn = {}\np = {}\nbeta = {}\nmeas_scale = {}\nfused_init_measure = {}\nmode = {}\ntrials = {}\nmaster_seed = {}\n",
            self.d,
            self.n,
            self.p,
            self.beta,
            self.meas_scale,
            self.fused_init_measure,
            self.mode,
            self.trials,
            self.master_seed
        )
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}
