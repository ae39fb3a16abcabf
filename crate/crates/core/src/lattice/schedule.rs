use serde::{Deserialize, Serialize};

use super::LatticeGeometry;
use crate::error::{Error, Result};

/// Execution order of the four encoded-CZ rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub round_order: [usize; 4],
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self { round_order: [0, 1, 2, 3] }
    }
}

impl ScheduleOptions {
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for &r in &self.round_order {
            if r >= 4 || seen[r] {
                return Err(Error::Config(format!("round order {:?} is not a permutation of 0..4", self.round_order)));
            }
            seen[r] = true;
        }
        Ok(())
    }
}

/// Face–edge interactions of the cluster state, split into four rounds of
/// disjoint pairs.
///
/// A face with normal `c` meets its edges at offsets `+a, -a, +b, -b` where
/// `a = c + 1`, `b = c + 2` (mod 3); the offset slot is the round. Seen from
/// an edge the four incident faces then land in four different rounds, so the
/// slots form a proper 4-edge-colouring. Colouring by offset direction alone
/// would need six colours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrepSchedule {
    /// `(face, edge)` pairs, in execution order.
    pub rounds: Vec<Vec<(usize, usize)>>,
}

impl PrepSchedule {
    pub fn new(geometry: &LatticeGeometry) -> Self {
        Self::with_options(geometry, ScheduleOptions::default()).expect("default order is valid")
    }

    pub fn with_options(geometry: &LatticeGeometry, options: ScheduleOptions) -> Result<Self> {
        options.validate()?;
        let mut by_slot: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 4];
        for face in 0..geometry.num_faces() {
            for (slot, edge) in geometry.neighbors(face).into_iter().enumerate() {
                by_slot[slot].push((face, edge));
            }
        }
        let rounds = options.round_order.iter().map(|&s| by_slot[s].clone()).collect();
        Ok(Self { rounds })
    }

    pub fn num_gates(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }
}
