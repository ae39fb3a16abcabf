//! Pauli frame tracking for circuits built from `|+>` preparation, CZ and
//! X-basis measurement.
//!
//! The frame stores, per physical qubit, whether an X and/or a Z error has
//! accumulated relative to the noiseless circuit. Global phases are dropped:
//! only X-measurement flips matter downstream, and those are decided by the
//! Z component alone.

use std::fmt;

use crate::error::{Error, Result};

/// Single-qubit Pauli operator, phase discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Product up to phase.
    pub fn compose(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.has_x() ^ other.has_x(), self.has_z() ^ other.has_z())
    }

    /// Whether this error flips the outcome of an X-basis measurement.
    #[inline]
    pub fn flips_x_measurement(self) -> bool {
        self.has_z()
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Address of one physical qubit: repetition-code slot `rep_index` inside the
/// block that encodes cluster qubit `cluster_qubit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysicalQubitId {
    pub cluster_qubit: usize,
    pub rep_index: usize,
}

impl PhysicalQubitId {
    pub fn new(cluster_qubit: usize, rep_index: usize, num_cluster_qubits: usize, n: usize) -> Result<Self> {
        if rep_index >= n {
            return Err(Error::InvalidArgument(format!("rep_index {rep_index} not below code length {n}")));
        }
        if cluster_qubit >= num_cluster_qubits {
            return Err(Error::InvalidArgument(format!(
                "cluster qubit {cluster_qubit} not below {num_cluster_qubits}"
            )));
        }
        Ok(Self { cluster_qubit, rep_index })
    }

    /// Blocks are laid out contiguously: `cluster_qubit * n + rep_index`.
    #[inline]
    pub fn flat(self, n: usize) -> usize {
        self.cluster_qubit * n + self.rep_index
    }

    #[inline]
    pub fn from_flat(index: usize, n: usize) -> Self {
        Self { cluster_qubit: index / n, rep_index: index % n }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct BitVec64 {
    words: Vec<u64>,
}

impl BitVec64 {
    fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    fn toggle(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    fn clear(&mut self) {
        self.words.fill(0);
    }

    fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Binary X/Z error record over all physical qubits of one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    len: usize,
    x_record: BitVec64,
    z_record: BitVec64,
    consumed: BitVec64,
}

impl PauliFrame {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("frame needs at least one qubit".into()));
        }
        Ok(Self {
            len: num_qubits,
            x_record: BitVec64::zeros(num_qubits),
            z_record: BitVec64::zeros(num_qubits),
            consumed: BitVec64::zeros(num_qubits),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Clears all errors and measurement marks so the frame can be reused.
    pub fn reset(&mut self) {
        self.x_record.clear();
        self.z_record.clear();
        self.consumed.clear();
    }

    /// True when neither record carries an error.
    pub fn is_identity(&self) -> bool {
        self.x_record.is_zero() && self.z_record.is_zero()
    }

    pub fn x_weight(&self) -> usize {
        self.x_record.count_ones()
    }

    pub fn z_weight(&self) -> usize {
        self.z_record.count_ones()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.len {
            return Err(Error::QubitOutOfRange { index: q, len: self.len });
        }
        Ok(())
    }

    pub fn x(&self, q: usize) -> Result<bool> {
        self.check(q)?;
        Ok(self.x_record.get(q))
    }

    pub fn z(&self, q: usize) -> Result<bool> {
        self.check(q)?;
        Ok(self.z_record.get(q))
    }

    pub fn pauli(&self, q: usize) -> Result<Pauli> {
        self.check(q)?;
        Ok(Pauli::from_bits(self.x_record.get(q), self.z_record.get(q)))
    }

    pub fn is_consumed(&self, q: usize) -> Result<bool> {
        self.check(q)?;
        Ok(self.consumed.get(q))
    }

    pub fn apply_pauli(&mut self, q: usize, pauli: Pauli) -> Result<()> {
        self.check(q)?;
        self.apply_pauli_unchecked(q, pauli);
        Ok(())
    }

    /// Conjugation by CZ: an X on one side picks up a Z on the other.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        self.apply_cz_unchecked(a, b);
        Ok(())
    }

    /// Returns whether the X-basis outcome of `q` is flipped relative to the
    /// noiseless circuit, and marks the qubit as measured.
    pub fn measure_x_flip(&mut self, q: usize) -> Result<bool> {
        self.check(q)?;
        if self.consumed.get(q) {
            return Err(Error::AlreadyMeasured(q));
        }
        self.consumed.set(q);
        Ok(self.z_record.get(q))
    }

    #[inline]
    pub(crate) fn apply_pauli_unchecked(&mut self, q: usize, pauli: Pauli) {
        if pauli.has_x() {
            self.x_record.toggle(q);
        }
        if pauli.has_z() {
            self.z_record.toggle(q);
        }
    }

    #[inline]
    pub(crate) fn apply_cz_unchecked(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        let xa = self.x_record.get(a);
        let xb = self.x_record.get(b);
        if xa {
            self.z_record.toggle(b);
        }
        if xb {
            self.z_record.toggle(a);
        }
    }
}
