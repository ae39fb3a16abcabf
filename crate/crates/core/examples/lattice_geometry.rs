//! Counts and neighbourhoods of the periodic cluster lattice.
//!
//! `cargo run --example lattice_geometry -- 3`

use cluster_qec::lattice::{LatticeGeometry, PrepSchedule};

fn main() -> cluster_qec::Result<()> {
    let d = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let g = LatticeGeometry::new(d)?;
    let schedule = PrepSchedule::new(&g);
    println!("d = {d}");
    println!("faces {}, edges {}, cells {}", g.num_faces(), g.num_edges(), g.num_cells());
    println!("CZ rounds {}, gates {}", schedule.rounds.len(), schedule.num_gates());
    let cell = 0;
    println!("cell {cell} at {:?} has faces {:?}", g.cell_coord(cell), g.cell_faces(cell));
    let face = g.cell_faces(cell)[0];
    println!(
        "face {face} ({:?}) borders cells {:?}, neighbours {:?}",
        g.describe(face),
        g.face_cells(face),
        g.neighbors(face)
    );
    Ok(())
}
