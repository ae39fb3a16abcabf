//! Tracks Pauli errors through CZ gates and X measurements.

use cluster_qec::pauli::{Pauli, PauliFrame};

fn main() -> cluster_qec::Result<()> {
    let mut frame = PauliFrame::new(3)?;
    frame.apply_pauli(0, Pauli::X)?;
    frame.apply_cz(0, 1)?;
    frame.apply_cz(0, 2)?;
    println!("after X on q0 and CZ(0,1), CZ(0,2):");
    for q in 0..3 {
        println!("  q{q}: {:?}", frame.pauli(q)?);
    }
    // The X on q0 spread Z onto both partners, so their X outcomes flip.
    for q in 0..3 {
        println!("  X-measurement of q{q} flipped: {}", frame.measure_x_flip(q)?);
    }
    Ok(())
}
