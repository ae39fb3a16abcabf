//! Periodic primal-cell lattice of the topological cluster state.
//!
//! Positions use doubled coordinates on a `2d x 2d x 2d` torus. Primal cells
//! sit at all-odd coordinates, face qubits at coordinates with exactly two odd
//! components, edge qubits at exactly one odd component. Each cluster qubit
//! interacts with the four qubits one step away along the two axes in which
//! it is not oriented.
//!
//! Indexing: face `(axis, site)` is `axis * d^3 + site` and lies on the lower
//! side (along `axis`) of the cell at `site`; edge `(axis, site)` is
//! `3 d^3 + axis * d^3 + site` and leaves the vertex at `site` along `axis`.

mod circuit;
mod schedule;
mod syndrome;

pub use circuit::{run_preparation, PreparationCircuit, PreparationOutput, SoftInfo};
pub use schedule::{PrepSchedule, ScheduleOptions};
pub use syndrome::{extract_syndrome, face_syndrome, logical_failure, FaceSet, Homology, Syndrome};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitKind {
    Face,
    Edge,
}

/// Position class of a cluster qubit, stable under lattice translations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionClass(pub usize);

impl PositionClass {
    pub const COUNT: usize = 6;

    pub fn new(kind: QubitKind, axis: usize) -> Self {
        let base = match kind {
            QubitKind::Face => 0,
            QubitKind::Edge => 3,
        };
        PositionClass(base + axis)
    }

    pub fn kind(self) -> QubitKind {
        if self.0 < 3 {
            QubitKind::Face
        } else {
            QubitKind::Edge
        }
    }

    pub fn axis(self) -> usize {
        self.0 % 3
    }

    pub fn label(self) -> String {
        let axis = ["x", "y", "z"][self.axis()];
        match self.kind() {
            QubitKind::Face => format!("face_{axis}"),
            QubitKind::Edge => format!("edge_{axis}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterQubit {
    pub index: usize,
    pub kind: QubitKind,
    /// Face normal or edge direction.
    pub axis: usize,
    pub coord: [usize; 3],
    pub neighbors: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeGeometry {
    d: usize,
    /// Per cluster qubit: `[+a, -a, +b, -b]` with `a = axis + 1`, `b = axis + 2` (mod 3).
    neighbors: Vec<[u32; 4]>,
    /// Per cell: lower and upper face along x, y, z.
    cell_faces: Vec<[u32; 6]>,
    /// Per face: the cell above and the cell below along its normal.
    face_cells: Vec<[u32; 2]>,
}

impl LatticeGeometry {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("distance {d} too small: need d >= 2 on a periodic lattice")));
        }
        if 6 * d * d * d > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("distance {d} too large")));
        }
        let mut g = Self { d, neighbors: Vec::new(), cell_faces: Vec::new(), face_cells: Vec::new() };
        let num_qubits = g.num_cluster_qubits();
        g.neighbors = (0..num_qubits)
            .map(|q| {
                let (_, axis, coord) = g.describe(q);
                let a = (axis + 1) % 3;
                let b = (axis + 2) % 3;
                [
                    g.qubit_at(g.shift(coord, a, 1)),
                    g.qubit_at(g.shift(coord, a, -1)),
                    g.qubit_at(g.shift(coord, b, 1)),
                    g.qubit_at(g.shift(coord, b, -1)),
                ]
                .map(|n| n.expect("neighbor of a cluster qubit is a cluster qubit") as u32)
            })
            .collect();
        g.cell_faces = (0..g.num_cells())
            .map(|c| {
                let site = g.site_of(c);
                let mut faces = [0u32; 6];
                for axis in 0..3 {
                    let mut up = site;
                    up[axis] = (up[axis] + 1) % d;
                    faces[2 * axis] = g.face_index(axis, site) as u32;
                    faces[2 * axis + 1] = g.face_index(axis, up) as u32;
                }
                faces
            })
            .collect();
        g.face_cells = (0..g.num_faces())
            .map(|f| {
                let axis = f / g.volume();
                let site = g.site_of(f % g.volume());
                let mut below = site;
                below[axis] = (below[axis] + d - 1) % d;
                [g.site_index(site) as u32, g.site_index(below) as u32]
            })
            .collect();
        Ok(g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn volume(&self) -> usize {
        self.d * self.d * self.d
    }

    pub fn num_cells(&self) -> usize {
        self.volume()
    }

    pub fn num_faces(&self) -> usize {
        3 * self.volume()
    }

    pub fn num_edges(&self) -> usize {
        3 * self.volume()
    }

    pub fn num_cluster_qubits(&self) -> usize {
        6 * self.volume()
    }

    pub fn site_index(&self, site: [usize; 3]) -> usize {
        site[0] + self.d * (site[1] + self.d * site[2])
    }

    pub fn site_of(&self, index: usize) -> [usize; 3] {
        let d = self.d;
        [index % d, (index / d) % d, index / (d * d)]
    }

    pub fn face_index(&self, normal: usize, site: [usize; 3]) -> usize {
        normal * self.volume() + self.site_index(site)
    }

    pub fn edge_index(&self, direction: usize, site: [usize; 3]) -> usize {
        self.num_faces() + direction * self.volume() + self.site_index(site)
    }

    pub fn is_face(&self, q: usize) -> bool {
        q < self.num_faces()
    }

    /// Kind, orientation axis and doubled coordinate of a cluster qubit.
    pub fn describe(&self, q: usize) -> (QubitKind, usize, [usize; 3]) {
        let v = self.volume();
        if q < 3 * v {
            let axis = q / v;
            let site = self.site_of(q % v);
            let mut coord = site.map(|s| 2 * s + 1);
            coord[axis] -= 1;
            (QubitKind::Face, axis, coord)
        } else {
            let e = q - 3 * v;
            let axis = e / v;
            let site = self.site_of(e % v);
            let mut coord = site.map(|s| 2 * s);
            coord[axis] += 1;
            (QubitKind::Edge, axis, coord)
        }
    }

    pub fn position_class(&self, q: usize) -> PositionClass {
        let (kind, axis, _) = self.describe(q);
        PositionClass::new(kind, axis)
    }

    /// Cluster qubit at a doubled coordinate, if one lives there.
    pub fn qubit_at(&self, coord: [usize; 3]) -> Option<usize> {
        let odd: Vec<usize> = (0..3).filter(|&a| coord[a] % 2 == 1).collect();
        let site = coord.map(|c| (c / 2) % self.d);
        match odd.len() {
            2 => {
                let normal = (0..3).find(|&a| coord[a].is_multiple_of(2))?;
                Some(self.face_index(normal, site))
            }
            1 => Some(self.edge_index(odd[0], site)),
            _ => None,
        }
    }

    /// Cell at a doubled coordinate (all components odd).
    pub fn cell_at(&self, coord: [usize; 3]) -> Option<usize> {
        coord.iter().all(|c| c % 2 == 1).then(|| self.site_index(coord.map(|c| (c / 2) % self.d)))
    }

    pub fn cell_coord(&self, cell: usize) -> [usize; 3] {
        self.site_of(cell).map(|s| 2 * s + 1)
    }

    fn shift(&self, coord: [usize; 3], axis: usize, step: isize) -> [usize; 3] {
        let l = 2 * self.d;
        let mut c = coord;
        c[axis] = ((c[axis] + l) as isize + step) as usize % l;
        c
    }

    #[inline]
    pub fn neighbors(&self, q: usize) -> [usize; 4] {
        self.neighbors[q].map(|n| n as usize)
    }

    #[inline]
    pub fn cell_faces(&self, cell: usize) -> [usize; 6] {
        self.cell_faces[cell].map(|f| f as usize)
    }

    /// The two cells a face separates.
    #[inline]
    pub fn face_cells(&self, face: usize) -> [usize; 2] {
        self.face_cells[face].map(|c| c as usize)
    }

    /// Faces of normal `axis` in the layer between cell layers `d-1` and `0`.
    /// A closed face chain winds around `axis` an odd number of times iff it
    /// crosses this cut an odd number of times.
    pub fn cross_section(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let d = self.d;
        (0..d * d).map(move |i| {
            let mut site = [0; 3];
            site[(axis + 1) % 3] = i % d;
            site[(axis + 2) % 3] = i / d;
            self.face_index(axis, site)
        })
    }

    pub fn qubit(&self, q: usize) -> ClusterQubit {
        let (kind, axis, coord) = self.describe(q);
        ClusterQubit { index: q, kind, axis, coord, neighbors: self.neighbors(q) }
    }

    /// Qubit and cell tables as JSON, for inspection with external tools.
    pub fn dump_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Cell {
            index: usize,
            coord: [usize; 3],
            faces: [usize; 6],
        }
        let qubits: Vec<ClusterQubit> = (0..self.num_cluster_qubits()).map(|q| self.qubit(q)).collect();
        let cells: Vec<Cell> = (0..self.num_cells())
            .map(|c| Cell { index: c, coord: self.cell_coord(c), faces: self.cell_faces(c) })
            .collect();
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "d": self.d,
            "num_cluster_qubits": self.num_cluster_qubits(),
            "num_cells": self.num_cells(),
            "qubits": qubits,
            "cells": cells,
        })
    }
}
