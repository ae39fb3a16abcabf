//! Stochastic dephasing-biased error model.
//!
//! CZ gates are followed by two independent events: a bit-flip event with
//! probability `p / beta` drawn uniformly from `{IX, XI, XX}`, and a phase-flip
//! event with probability `p` drawn uniformly from `{IZ, ZI, ZZ}`. Preparation
//! is followed, and measurement preceded, by a uniform `{X, Y, Z}` error with
//! probability `p` (`p * meas_scale` for measurement).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::pauli::Pauli;

/// Which error model a trial runs under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Full concatenated preparation circuit with gate-level noise.
    Circuit,
    /// Independent flips applied directly to primal face qubits.
    CodeCapacity,
    /// Independent erasures of primal face qubits.
    Erasure,
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::Circuit => "circuit",
            NoiseMode::CodeCapacity => "code_capacity",
            NoiseMode::Erasure => "erasure",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "circuit" => Ok(NoiseMode::Circuit),
            "code_capacity" | "capacity" => Ok(NoiseMode::CodeCapacity),
            "erasure" => Ok(NoiseMode::Erasure),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub beta: f64,
    pub meas_scale: f64,
    pub fused_init_measure: bool,
    pub mode: NoiseMode,
}

impl NoiseModel {
    pub fn new(p: f64, beta: f64) -> Result<Self> {
        Self { p, beta, meas_scale: 1.0, fused_init_measure: false, mode: NoiseMode::Circuit }.validated()
    }

    pub fn code_capacity(p: f64) -> Result<Self> {
        Self { p, mode: NoiseMode::CodeCapacity, ..Self::noiseless() }.validated()
    }

    pub fn erasure(p: f64) -> Result<Self> {
        Self { p, mode: NoiseMode::Erasure, ..Self::noiseless() }.validated()
    }

    pub fn noiseless() -> Self {
        Self { p: 0.0, beta: 1.0, meas_scale: 1.0, fused_init_measure: false, mode: NoiseMode::Circuit }
    }

    pub fn with_meas_scale(mut self, meas_scale: f64) -> Result<Self> {
        self.meas_scale = meas_scale;
        self.validated()
    }

    pub fn with_fused_init_measure(mut self, fused: bool) -> Self {
        self.fused_init_measure = fused;
        self
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if self.beta.is_nan() || self.beta < 1.0 {
            return bad(format!("beta = {} must be at least 1", self.beta));
        }
        if self.meas_scale.is_nan() || self.meas_scale < 0.0 || self.p * self.meas_scale > 1.0 {
            return bad(format!("measurement error rate p * {} exceeds 1", self.meas_scale));
        }
        // Total two-qubit error budget; the slack admits p = 1 at huge bias.
        if self.mode == NoiseMode::Circuit && self.p * (1.0 + 1.0 / self.beta) > 1.0 + 1e-9 {
            return bad(format!("p (1 + 1/beta) = {} exceeds 1", self.p * (1.0 + 1.0 / self.beta)));
        }
        Ok(())
    }

    #[inline]
    pub fn bit_flip_rate(&self) -> f64 {
        self.p / self.beta
    }

    #[inline]
    pub fn meas_error_rate(&self) -> f64 {
        self.p * self.meas_scale
    }

    /// Paulis to apply to the two outputs of a CZ gate.
    #[inline]
    pub fn sample_cz_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> (Pauli, Pauli) {
        let mut xa = false;
        let mut xb = false;
        let mut za = false;
        let mut zb = false;
        let px = self.bit_flip_rate();
        let u: f64 = rng.gen();
        if u < px {
            match pick3(u, px) {
                0 => xb = true,
                1 => xa = true,
                _ => {
                    xa = true;
                    xb = true;
                }
            }
        }
        let u: f64 = rng.gen();
        if u < self.p {
            match pick3(u, self.p) {
                0 => zb = true,
                1 => za = true,
                _ => {
                    za = true;
                    zb = true;
                }
            }
        }
        (Pauli::from_bits(xa, za), Pauli::from_bits(xb, zb))
    }

    /// Error following `|+>` preparation. Identity when preparation is fused
    /// with the measurement of the previous layer.
    #[inline]
    pub fn sample_prep_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        if self.fused_init_measure {
            return Pauli::I;
        }
        sample_uniform_pauli(self.p, rng)
    }

    /// Error preceding X-basis measurement.
    #[inline]
    pub fn sample_meas_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        sample_uniform_pauli(self.meas_error_rate(), rng)
    }

    /// Face-level noise for the code-capacity and erasure modes.
    pub fn sample_code_capacity<R: Rng + ?Sized>(&self, geometry: &LatticeGeometry, rng: &mut R) -> Result<FaceNoise> {
        let faces = geometry.num_faces();
        let mut sample = FaceNoise { flips: vec![false; faces], located: vec![false; faces] };
        self.sample_code_capacity_into(rng, &mut sample)?;
        Ok(sample)
    }

    pub(crate) fn sample_code_capacity_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut FaceNoise) -> Result<()> {
        match self.mode {
            NoiseMode::Circuit => Err(Error::InvalidArgument("face-level sampling requested in circuit mode".into())),
            NoiseMode::CodeCapacity => {
                out.located.fill(false);
                for flip in out.flips.iter_mut() {
                    *flip = rng.gen::<f64>() < self.p;
                }
                Ok(())
            }
            NoiseMode::Erasure => {
                for (flip, located) in out.flips.iter_mut().zip(out.located.iter_mut()) {
                    *located = rng.gen::<f64>() < self.p;
                    *flip = *located && rng.gen::<bool>();
                }
                Ok(())
            }
        }
    }
}

#[inline]
fn pick3(u: f64, total: f64) -> usize {
    // u is uniform on [0, total) here.
    ((u / total) * 3.0).min(2.0) as usize
}

#[inline]
fn sample_uniform_pauli<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Pauli {
    let u: f64 = rng.gen();
    if u < rate {
        Pauli::NON_IDENTITY[pick3(u, rate)]
    } else {
        Pauli::I
    }
}

/// Face flips plus the erasure mask (all false outside erasure mode).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceNoise {
    pub flips: Vec<bool>,
    pub located: Vec<bool>,
}

/// Independent random stream for one trial. ChaCha's 64-bit stream id keeps
/// trials disjoint, so results do not depend on execution order.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}
