use serde::Serialize;

use super::LatticeGeometry;
use crate::error::{Error, Result};
use crate::rep_code::RepBlockReadout;

/// Subset of primal face qubits, as a dense mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceSet {
    mask: Vec<bool>,
}

impl FaceSet {
    pub fn empty(num_faces: usize) -> Self {
        Self { mask: vec![false; num_faces] }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn from_faces(num_faces: usize, faces: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(num_faces);
        for f in faces {
            s.toggle(f);
        }
        s
    }

    pub fn num_faces(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    pub fn contains(&self, face: usize) -> bool {
        self.mask[face]
    }

    #[inline]
    pub fn toggle(&mut self, face: usize) {
        self.mask[face] ^= true;
    }

    pub fn clear(&mut self) {
        self.mask.fill(false);
    }

    pub fn weight(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn as_mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn xor(&self, other: &FaceSet) -> FaceSet {
        assert_eq!(self.mask.len(), other.mask.len());
        FaceSet { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| a ^ b).collect() }
    }

    pub fn xor_assign(&mut self, other: &FaceSet) {
        assert_eq!(self.mask.len(), other.mask.len());
        for (a, b) in self.mask.iter_mut().zip(&other.mask) {
            *a ^= *b;
        }
    }
}

/// Odd-parity primal cells plus per-face soft information.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Syndrome {
    /// Sorted cell indices.
    pub odd_cells: Vec<usize>,
    /// Posterior flip probability per face, `1/2` for located faces.
    pub face_soft_info: Vec<f64>,
}

impl Syndrome {
    pub fn is_empty(&self) -> bool {
        self.odd_cells.is_empty()
    }

    /// Syndrome of a face-flip set with uniform soft information.
    pub fn from_faces(geometry: &LatticeGeometry, flips: &FaceSet, soft: f64) -> Self {
        Self { odd_cells: face_syndrome(geometry, flips.as_mask()), face_soft_info: vec![soft; geometry.num_faces()] }
    }
}

/// Cells whose six faces contain an odd number of flips, sorted.
pub fn face_syndrome(geometry: &LatticeGeometry, flips: &[bool]) -> Vec<usize> {
    let mut parity = vec![false; geometry.num_cells()];
    for (f, _) in flips.iter().enumerate().filter(|(_, &b)| b) {
        for c in geometry.face_cells(f) {
            parity[c] ^= true;
        }
    }
    parity.iter().enumerate().filter_map(|(c, &odd)| odd.then_some(c)).collect()
}

/// Cell parities from the majority-voted face readouts. Edge readouts belong
/// to the dual lattice and are ignored.
pub fn extract_syndrome(geometry: &LatticeGeometry, readouts: &[RepBlockReadout]) -> Result<Syndrome> {
    if readouts.len() != geometry.num_cluster_qubits() {
        return Err(Error::MissingReadouts { expected: geometry.num_cluster_qubits(), got: readouts.len() });
    }
    let faces = &readouts[..geometry.num_faces()];
    let flips: Vec<bool> = faces.iter().map(|r| r.majority_flip).collect();
    let face_soft_info =
        faces.iter().map(|r| r.posterior_flip_prob.unwrap_or(if r.located { 0.5 } else { 0.0 })).collect();
    Ok(Syndrome { odd_cells: face_syndrome(geometry, &flips), face_soft_info })
}

/// Winding parities of a closed face chain around the three torus axes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Homology {
    pub parity: [bool; 3],
}

impl Homology {
    pub fn is_failure(&self) -> bool {
        self.parity.iter().any(|&p| p)
    }
}

/// Homology of `error XOR correction`. The combined set must have no odd
/// cells; otherwise the correction did not match the syndrome.
pub fn logical_failure(geometry: &LatticeGeometry, error: &FaceSet, correction: &FaceSet) -> Result<Homology> {
    let combined = error.xor(correction);
    let remaining = face_syndrome(geometry, combined.as_mask());
    if !remaining.is_empty() {
        return Err(Error::UnclearedSyndrome(remaining.len()));
    }
    Ok(homology_unchecked(geometry, &combined))
}

pub(crate) fn homology_unchecked(geometry: &LatticeGeometry, combined: &FaceSet) -> Homology {
    let mut parity = [false; 3];
    for (axis, p) in parity.iter_mut().enumerate() {
        *p = geometry.cross_section(axis).filter(|&f| combined.contains(f)).count() % 2 == 1;
    }
    Homology { parity }
}
