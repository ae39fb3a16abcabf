//! Length-`n` repetition code in the dual basis.
//!
//! Stabilizers are `X_i X_{i+1}`, the logical X is `X_1` and the logical Z is
//! `Z^{⊗n}`. `|+̄>` is `|+>^{⊗n}`, the logical X measurement is a majority vote
//! over `n` single-qubit X measurements, and the encoded CZ between two blocks
//! is `n^2` physical CZs. Z errors commute with CZ and never spread inside a
//! block; X errors are not corrected at all.

mod calibration;

pub use calibration::{calibrate_flip_rate, CalibrationStore, CalibrationTable, FlipRates, MIN_CALIBRATION_TRIALS};

use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::PauliFrame;

/// Largest code length whose outcomes fit in a [`FlipBits`].
pub const MAX_CODE_LENGTH: usize = 64;

/// Physical CZs of one encoded CZ, grouped into parallel rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CzSchedule {
    n: usize,
    /// `(i, j)`: qubit `i` of block A with qubit `j` of block B.
    pub rounds: Vec<Vec<(usize, usize)>>,
}

impl CzSchedule {
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Round `t` pairs qubit `i` of block A with qubit `(i + t) mod n` of block B.
pub fn encoded_cz_schedule(n: usize) -> Result<CzSchedule> {
    if n == 0 || n > MAX_CODE_LENGTH {
        return Err(Error::InvalidArgument(format!("code length {n} outside 1..={MAX_CODE_LENGTH}")));
    }
    let rounds = (0..n).map(|t| (0..n).map(|i| (i, (i + t) % n)).collect()).collect();
    Ok(CzSchedule { n, rounds })
}

/// Noisy encoded CZ between two blocks of physical qubits. Gates run round by
/// round, each followed by its own two-qubit noise; there are no idle
/// locations between rounds.
pub fn apply_encoded_cz<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    block_a: &[usize],
    block_b: &[usize],
    schedule: &CzSchedule,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    let n = schedule.n();
    if block_a.len() != n || block_b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "blocks of length {} and {} for code length {n}",
            block_a.len(),
            block_b.len()
        )));
    }
    for &q in block_a.iter().chain(block_b) {
        if q >= frame.len() {
            return Err(Error::QubitOutOfRange { index: q, len: frame.len() });
        }
    }
    if let Some(&q) = block_a.iter().find(|q| block_b.contains(q)) {
        return Err(Error::OverlappingBlocks(q));
    }
    for round in &schedule.rounds {
        for &(i, j) in round {
            let (a, b) = (block_a[i], block_b[j]);
            frame.apply_cz_unchecked(a, b);
            let (ea, eb) = noise.sample_cz_noise(rng);
            frame.apply_pauli_unchecked(a, ea);
            frame.apply_pauli_unchecked(b, eb);
        }
    }
    Ok(())
}

/// Up to 64 measurement-flip bits of one block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FlipBits {
    bits: u64,
    len: u8,
}

impl FlipBits {
    pub fn new(len: usize) -> Self {
        assert!(len <= MAX_CODE_LENGTH);
        Self { bits: 0, len: len as u8 }
    }

    pub fn from_slice(flips: &[bool]) -> Result<Self> {
        if flips.len() > MAX_CODE_LENGTH {
            return Err(Error::InvalidArgument(format!("{} outcomes exceed 64", flips.len())));
        }
        let mut out = Self::new(flips.len());
        for (i, &f) in flips.iter().enumerate() {
            out.set(i, f);
        }
        Ok(out)
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len as usize);
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn to_vec(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

/// Decoded readout of one repetition-code block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepBlockReadout {
    pub outcomes: FlipBits,
    /// Flip of the encoded X outcome. For a located (split) block this is the
    /// first qubit's flip; it carries no information either way.
    pub majority_flip: bool,
    pub located: bool,
    /// Probability that `majority_flip` is wrong; `None` until soft
    /// information has been attached.
    pub posterior_flip_prob: Option<f64>,
}

impl RepBlockReadout {
    /// Number of outcomes disagreeing with the majority.
    pub fn dissent(&self) -> usize {
        let k = self.outcomes.count_ones();
        k.min(self.outcomes.len() - k)
    }
}

pub fn majority_vote(outcomes: &[bool], located_allowed: bool) -> Result<RepBlockReadout> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("majority vote over zero outcomes".into()));
    }
    vote(FlipBits::from_slice(outcomes)?, located_allowed)
}

#[inline]
pub(crate) fn vote(outcomes: FlipBits, located_allowed: bool) -> Result<RepBlockReadout> {
    let n = outcomes.len();
    let k = outcomes.count_ones();
    let located = 2 * k == n;
    if located && !located_allowed {
        return Err(Error::SplitVote);
    }
    let majority_flip = if located { outcomes.get(0) } else { 2 * k > n };
    Ok(RepBlockReadout { outcomes, majority_flip, located, posterior_flip_prob: None })
}

/// Posterior probability that the majority vote is wrong, given the outcome
/// pattern and i.i.d. flips at rate `q_phys` on each qubit, with a uniform
/// prior on the encoded value.
pub fn posterior_flip_prob(outcomes: &[bool], q_phys: f64) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument("posterior over zero outcomes".into()));
    }
    let k = outcomes.iter().filter(|&&f| f).count();
    posterior_from_dissent(outcomes.len(), k.min(outcomes.len() - k), q_phys)
}

/// Same as [`posterior_flip_prob`] in terms of code length and dissent count.
pub fn posterior_from_dissent(n: usize, dissent: usize, q_phys: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&q_phys) {
        return Err(Error::InvalidArgument(format!("flip rate {q_phys} outside [0, 1/2)")));
    }
    if 2 * dissent > n {
        return Err(Error::InvalidArgument(format!("dissent {dissent} exceeds half of {n}")));
    }
    let margin = (n - 2 * dissent) as i32;
    if margin == 0 {
        return Ok(0.5);
    }
    // Likelihood ratio of "majority wrong" to "majority right".
    let ratio = (q_phys / (1.0 - q_phys)).powi(margin);
    Ok(ratio / (1.0 + ratio))
}

/// Posterior lookup indexed by dissent count, for one flip rate.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorTable {
    by_dissent: Vec<f64>,
}

impl PosteriorTable {
    pub fn new(n: usize, q_phys: f64) -> Result<Self> {
        let by_dissent = (0..=n / 2).map(|m| posterior_from_dissent(n, m, q_phys)).collect::<Result<_>>()?;
        Ok(Self { by_dissent })
    }

    #[inline]
    pub fn get(&self, dissent: usize) -> f64 {
        self.by_dissent[dissent]
    }
}
