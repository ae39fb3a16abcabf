use rand::Rng;

use super::{LatticeGeometry, PositionClass, PrepSchedule};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::{Pauli, PauliFrame};
use crate::rep_code::{encoded_cz_schedule, vote, FlipBits, FlipRates, PosteriorTable, RepBlockReadout};

/// The concatenated preparation circuit flattened into physical gates.
///
/// Physical qubit `q * n + i` is slot `i` of the block encoding cluster qubit
/// `q`. Each encoded round of the [`PrepSchedule`] expands into the `n`
/// physical rounds of the repetition-code CZ schedule, with the face block as
/// block A.
#[derive(Clone, Debug)]
pub struct PreparationCircuit {
    n: usize,
    num_cluster_qubits: usize,
    classes: Vec<PositionClass>,
    gates: Vec<(u32, u32)>,
}

/// Frame after measurement together with one readout per cluster qubit.
#[derive(Clone, Debug)]
pub struct PreparationOutput {
    pub frame: PauliFrame,
    pub readouts: Vec<RepBlockReadout>,
}

/// Per-class posterior lookup tables derived from calibrated flip rates.
#[derive(Clone, Debug)]
pub struct SoftInfo {
    tables: Vec<PosteriorTable>,
}

impl SoftInfo {
    pub fn new(n: usize, rates: &FlipRates) -> Result<Self> {
        let tables = (0..PositionClass::COUNT)
            .map(|c| PosteriorTable::new(n, rates.clamped(PositionClass(c))))
            .collect::<Result<_>>()?;
        Ok(Self { tables })
    }

    #[inline]
    fn posterior(&self, class: PositionClass, dissent: usize) -> f64 {
        self.tables[class.0].get(dissent)
    }
}

impl PreparationCircuit {
    pub fn new(geometry: &LatticeGeometry, schedule: &PrepSchedule, n: usize) -> Result<Self> {
        let rep = encoded_cz_schedule(n)?;
        let num_cluster_qubits = geometry.num_cluster_qubits();
        if num_cluster_qubits * n > u32::MAX as usize {
            return Err(Error::InvalidArgument("circuit too large".into()));
        }
        for round in &schedule.rounds {
            for &(f, e) in round {
                if f >= num_cluster_qubits || e >= num_cluster_qubits || f == e {
                    return Err(Error::InvalidArgument(format!("schedule pair ({f}, {e}) invalid")));
                }
            }
        }
        let mut gates = Vec::with_capacity(schedule.num_gates() * n * n);
        for round in &schedule.rounds {
            for sub in &rep.rounds {
                for &(face, edge) in round {
                    for &(i, j) in sub {
                        gates.push(((face * n + i) as u32, (edge * n + j) as u32));
                    }
                }
            }
        }
        let classes = (0..num_cluster_qubits).map(|q| geometry.position_class(q)).collect();
        Ok(Self { n, num_cluster_qubits, classes, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_cluster_qubits(&self) -> usize {
        self.num_cluster_qubits
    }

    pub fn num_physical_qubits(&self) -> usize {
        self.num_cluster_qubits * self.n
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn position_class(&self, cluster_qubit: usize) -> PositionClass {
        self.classes[cluster_qubit]
    }

    pub fn new_frame(&self) -> PauliFrame {
        PauliFrame::new(self.num_physical_qubits()).expect("circuit has qubits")
    }

    fn check_frame(&self, frame: &PauliFrame) -> Result<()> {
        if frame.len() != self.num_physical_qubits() {
            return Err(Error::InvalidArgument(format!(
                "frame of {} qubits for circuit of {}",
                frame.len(),
                self.num_physical_qubits()
            )));
        }
        Ok(())
    }

    /// Noisy `|+>` preparation of every physical qubit.
    pub fn prepare<R: Rng + ?Sized>(&self, frame: &mut PauliFrame, noise: &NoiseModel, rng: &mut R) -> Result<()> {
        self.check_frame(frame)?;
        if noise.p == 0.0 || noise.fused_init_measure {
            return Ok(());
        }
        // X fixes |+>, so only the Z part of a preparation error is real.
        // Tracking the X part would push a stabilizer through the CZs and
        // count harmless outcome flips during calibration.
        for q in 0..frame.len() {
            if noise.sample_prep_noise(rng).has_z() {
                frame.apply_pauli_unchecked(q, Pauli::Z);
            }
        }
        Ok(())
    }

    /// All physical CZ gates in schedule order, each followed by gate noise.
    pub fn entangle<R: Rng + ?Sized>(&self, frame: &mut PauliFrame, noise: &NoiseModel, rng: &mut R) -> Result<()> {
        self.check_frame(frame)?;
        if noise.p == 0.0 {
            for &(a, b) in &self.gates {
                frame.apply_cz_unchecked(a as usize, b as usize);
            }
            return Ok(());
        }
        for &(a, b) in &self.gates {
            let (a, b) = (a as usize, b as usize);
            frame.apply_cz_unchecked(a, b);
            let (ea, eb) = noise.sample_cz_noise(rng);
            frame.apply_pauli_unchecked(a, ea);
            frame.apply_pauli_unchecked(b, eb);
        }
        Ok(())
    }

    /// Noisy X measurement of every physical qubit, majority-voted per block.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        frame: &mut PauliFrame,
        noise: &NoiseModel,
        soft: Option<&SoftInfo>,
        rng: &mut R,
        readouts: &mut Vec<RepBlockReadout>,
    ) -> Result<()> {
        self.check_frame(frame)?;
        let n = self.n;
        readouts.clear();
        readouts.reserve(self.num_cluster_qubits);
        let noisy = noise.meas_error_rate() > 0.0;
        for q in 0..self.num_cluster_qubits {
            let mut bits = FlipBits::new(n);
            for i in 0..n {
                let phys = q * n + i;
                if noisy {
                    let e = noise.sample_meas_noise(rng);
                    frame.apply_pauli_unchecked(phys, e);
                }
                bits.set(i, frame.measure_x_flip(phys)?);
            }
            let mut readout = vote(bits, true)?;
            if let Some(soft) = soft {
                readout.posterior_flip_prob = Some(soft.posterior(self.classes[q], readout.dissent()));
            }
            readouts.push(readout);
        }
        Ok(())
    }

    /// Prepare, entangle and measure in one go.
    pub fn run<R: Rng + ?Sized>(
        &self,
        frame: &mut PauliFrame,
        noise: &NoiseModel,
        soft: Option<&SoftInfo>,
        rng: &mut R,
        readouts: &mut Vec<RepBlockReadout>,
    ) -> Result<()> {
        frame.reset();
        self.prepare(frame, noise, rng)?;
        self.entangle(frame, noise, rng)?;
        self.measure(frame, noise, soft, rng, readouts)
    }
}

/// Runs the full noisy preparation and returns the final frame and readouts.
pub fn run_preparation<R: Rng + ?Sized>(
    circuit: &PreparationCircuit,
    noise: &NoiseModel,
    soft: Option<&SoftInfo>,
    rng: &mut R,
) -> Result<PreparationOutput> {
    noise.validate()?;
    let mut frame = circuit.new_frame();
    let mut readouts = Vec::new();
    circuit.run(&mut frame, noise, soft, rng, &mut readouts)?;
    Ok(PreparationOutput { frame, readouts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::extract_syndrome;
    use crate::noise::trial_rng;
    use crate::pauli::Pauli;

    fn circuit(d: usize, n: usize) -> (LatticeGeometry, PreparationCircuit) {
        let g = LatticeGeometry::new(d).unwrap();
        let s = PrepSchedule::new(&g);
        let c = PreparationCircuit::new(&g, &s, n).unwrap();
        (g, c)
    }

    #[test]
    fn gate_count() {
        let (g, c) = circuit(2, 3);
        assert_eq!(c.num_gates(), 2 * g.num_cluster_qubits() * 9);
        assert_eq!(c.num_physical_qubits(), 144);
    }

    #[test]
    fn noiseless_run_is_flip_free() {
        for d in 2..=4 {
            for n in 1..=3 {
                let (g, c) = circuit(d, n);
                let mut rng = trial_rng(1, 0);
                let out = run_preparation(&c, &NoiseModel::noiseless(), None, &mut rng).unwrap();
                assert!(out.frame.is_identity());
                assert!(out.readouts.iter().all(|r| !r.majority_flip && r.dissent() == 0));
                let s = extract_syndrome(&g, &out.readouts).unwrap();
                assert!(s.odd_cells.is_empty());
            }
        }
    }

    #[test]
    fn injected_z_flips_only_its_block() {
        let (g, c) = circuit(3, 1);
        let noise = NoiseModel::noiseless();
        let mut rng = trial_rng(1, 0);
        let mut frame = c.new_frame();
        c.prepare(&mut frame, &noise, &mut rng).unwrap();
        c.entangle(&mut frame, &noise, &mut rng).unwrap();
        let face = 7;
        frame.apply_pauli(face, Pauli::Z).unwrap();
        let mut readouts = Vec::new();
        c.measure(&mut frame, &noise, None, &mut rng, &mut readouts).unwrap();
        for (q, r) in readouts.iter().enumerate() {
            assert_eq!(r.majority_flip, q == face);
        }
        assert!(g.is_face(face));
    }

    #[test]
    fn early_x_on_edge_is_harmless() {
        // X on |+> before any CZ acts trivially: the cluster stabilizer of the
        // edge turns it into Z on all four face neighbours, which cancels in
        // every cell parity.
        let (g, c) = circuit(3, 1);
        let noise = NoiseModel::noiseless();
        let mut rng = trial_rng(1, 0);
        let edge = g.edge_index(1, [1, 2, 0]);
        let mut frame = c.new_frame();
        frame.apply_pauli(edge, Pauli::X).unwrap();
        c.entangle(&mut frame, &noise, &mut rng).unwrap();
        let mut readouts = Vec::new();
        c.measure(&mut frame, &noise, None, &mut rng, &mut readouts).unwrap();
        let flipped: Vec<usize> = (0..readouts.len()).filter(|&q| readouts[q].majority_flip).collect();
        let mut nbrs = g.neighbors(edge).to_vec();
        nbrs.sort();
        assert_eq!(flipped, nbrs);
        assert!(extract_syndrome(&g, &readouts).unwrap().odd_cells.is_empty());
    }

    #[test]
    fn mid_schedule_x_on_edge_hits_remaining_neighbours() {
        let (g, c) = circuit(3, 1);
        let schedule = PrepSchedule::new(&g);
        let noise = NoiseModel::noiseless();
        let edge = g.edge_index(0, [2, 0, 1]);
        // Inject X after the first two rounds by running them by hand.
        let mut frame = c.new_frame();
        for round in &schedule.rounds[..2] {
            for &(f, e) in round {
                frame.apply_cz(f, e).unwrap();
            }
        }
        frame.apply_pauli(edge, Pauli::X).unwrap();
        let mut later = Vec::new();
        for round in &schedule.rounds[2..] {
            for &(f, e) in round {
                frame.apply_cz(f, e).unwrap();
                if e == edge {
                    later.push(f);
                }
            }
        }
        let mut rng = trial_rng(1, 0);
        let mut readouts = Vec::new();
        c.measure(&mut frame, &noise, None, &mut rng, &mut readouts).unwrap();
        let mut flipped: Vec<usize> = (0..readouts.len()).filter(|&q| readouts[q].majority_flip).collect();
        later.sort();
        flipped.sort();
        assert_eq!(flipped, later);
        assert_eq!(later.len(), 2);
        assert!(flipped.iter().all(|f| g.neighbors(edge).contains(f)));
    }

    #[test]
    fn soft_info_attached() {
        let (_, c) = circuit(2, 3);
        let rates = FlipRates::uniform(0.1);
        let soft = SoftInfo::new(3, &rates).unwrap();
        let mut rng = trial_rng(1, 0);
        let out = run_preparation(&c, &NoiseModel::noiseless(), Some(&soft), &mut rng).unwrap();
        let expected = 0.001 / (0.001 + 0.729);
        for r in &out.readouts {
            assert!((r.posterior_flip_prob.unwrap() - expected).abs() < 1e-15);
        }
    }
}
