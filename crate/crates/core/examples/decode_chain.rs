//! Injects a straight chain of face flips, decodes it and checks whether
//! the residual wraps the torus.

use cluster_qec::decoder::Decoder;
use cluster_qec::lattice::{logical_failure, FaceSet, LatticeGeometry, Syndrome};

fn main() -> cluster_qec::Result<()> {
    let d = 5;
    let g = LatticeGeometry::new(d)?;
    let mut decoder = Decoder::new(&g);
    for len in 1..d {
        // Faces normal to x along the x axis form a chain between two cells.
        let faces = (0..len).map(|i| g.face_index(0, [i, 0, 0]));
        let error = FaceSet::from_faces(g.num_faces(), faces);
        let syndrome = Syndrome::from_faces(&g, &error, 0.05);
        let record = decoder.decode_record(&g, &syndrome)?;
        let correction = FaceSet::from_faces(g.num_faces(), record.correction.iter().copied());
        let homology = logical_failure(&g, &error, &correction)?;
        println!(
            "chain length {len}: defects {:?}, matched weight {:.2}, logical failure {}",
            syndrome.odd_cells,
            record.matching.total_weight(),
            homology.is_failure()
        );
    }
    Ok(())
}
