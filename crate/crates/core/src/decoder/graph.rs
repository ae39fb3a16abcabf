use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{FaceSet, LatticeGeometry, Syndrome};

/// Smallest face flip probability entering the weights.
pub const WEIGHT_EPSILON: f64 = 1e-9;

/// Fixed-point scale of path weights. Integer weights make the matching exact
/// and platform independent.
pub const WEIGHT_SCALE: f64 = (1u64 << 20) as f64;

/// Log-likelihood weight `ln((1 - p) / p)` of a face with posterior flip
/// probability `p`, clamped to `[WEIGHT_EPSILON, 1/2]`.
pub fn face_weight(p: f64) -> f64 {
    let p = if p.is_nan() { 0.5 } else { p.clamp(WEIGHT_EPSILON, 0.5) };
    ((1.0 - p) / p).ln()
}

pub(crate) fn quantize(w: f64) -> u64 {
    (w * WEIGHT_SCALE).round() as u64
}

/// Complete graph on the defects with shortest-path weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodingGraph {
    /// Defect cells, sorted.
    pub nodes: Vec<usize>,
    /// Dense symmetric weight matrix in fixed point.
    weights: Vec<u64>,
    /// Per node `i`: predecessor face of every cell on the shortest-path
    /// tree grown from it, valid along paths to nodes `j > i`.
    #[serde(skip)]
    pred_faces: Vec<u32>,
    #[serde(skip)]
    num_cells: usize,
}

impl DecodingGraph {
    /// Graph with given weights and no lattice paths.
    pub fn from_weights(num_nodes: usize, weight: impl Fn(usize, usize) -> u64) -> Self {
        let mut weights = vec![0; num_nodes * num_nodes];
        for i in 0..num_nodes {
            for j in i + 1..num_nodes {
                let w = weight(i, j);
                weights[i * num_nodes + j] = w;
                weights[j * num_nodes + i] = w;
            }
        }
        Self { nodes: (0..num_nodes).collect(), weights, pred_faces: Vec::new(), num_cells: 0 }
    }

    /// Whether the weights are shortest-path distances on a lattice.
    pub fn is_metric(&self) -> bool {
        !self.pred_faces.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Fixed-point weight between nodes `i` and `j`.
    #[inline]
    pub fn weight_fixed(&self, i: usize, j: usize) -> u64 {
        self.weights[i * self.nodes.len() + j]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weight_fixed(i, j) as f64 / WEIGHT_SCALE
    }

    /// Faces on the shortest path between nodes `i` and `j`, or `None` for a
    /// graph built without a lattice.
    pub fn path(&self, geometry: &LatticeGeometry, i: usize, j: usize) -> Option<Vec<usize>> {
        if self.pred_faces.is_empty() || i == j || geometry.num_cells() != self.num_cells {
            return None;
        }
        let (i, j) = (i.min(j), i.max(j));
        let (source, target) = (self.nodes[i], self.nodes[j]);
        let pred = &self.pred_faces[i * self.num_cells..(i + 1) * self.num_cells];
        let mut path = Vec::new();
        let mut c = target;
        while c != source {
            let f = pred[c] as usize;
            path.push(f);
            let [a, b] = geometry.face_cells(f);
            c = if a == c { b } else { a };
        }
        Some(path)
    }

    /// XOR of the face paths of the given node pairs.
    pub fn correction(&self, geometry: &LatticeGeometry, pairs: &[(usize, usize)]) -> Result<FaceSet> {
        let mut set = FaceSet::empty(geometry.num_faces());
        for &(i, j) in pairs {
            let path = self
                .path(geometry, i, j)
                .ok_or_else(|| Error::InvalidArgument("graph carries no lattice paths".into()))?;
            for f in path {
                set.toggle(f);
            }
        }
        Ok(set)
    }
}

/// Reusable shortest-path machinery over the cell lattice.
#[derive(Clone, Debug)]
pub struct PathFinder {
    /// Per cell: (face, neighbouring cell) for its six faces.
    adjacency: Vec<[(u32, u32); 6]>,
    dist: Vec<u64>,
    pred_face: Vec<u32>,
    visited_epoch: Vec<u32>,
    epoch: u32,
    target_slot: Vec<u32>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
}

const NO_SLOT: u32 = u32::MAX;

impl PathFinder {
    pub fn new(geometry: &LatticeGeometry) -> Self {
        let cells = geometry.num_cells();
        let adjacency = (0..cells)
            .map(|c| {
                geometry.cell_faces(c).map(|f| {
                    let [a, b] = geometry.face_cells(f);
                    (f as u32, if a == c { b } else { a } as u32)
                })
            })
            .collect();
        Self {
            adjacency,
            dist: vec![0; cells],
            pred_face: vec![0; cells],
            visited_epoch: vec![0; cells],
            epoch: 0,
            target_slot: vec![NO_SLOT; cells],
            heap: BinaryHeap::new(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.adjacency.len()
    }

    /// All-pairs shortest paths among the syndrome's defects, one Dijkstra
    /// run per defect. The heap orders by `(distance, cell)`, so equal-length
    /// paths resolve the same way on every run.
    pub fn build(&mut self, syndrome: &Syndrome) -> Result<DecodingGraph> {
        let face_weights: Vec<u64> = syndrome.face_soft_info.iter().map(|&p| quantize(face_weight(p))).collect();
        self.build_with_weights(&syndrome.odd_cells, &face_weights)
    }

    /// As [`PathFinder::build`] with explicit fixed-point face weights.
    pub fn build_with_weights(&mut self, defects: &[usize], face_weights: &[u64]) -> Result<DecodingGraph> {
        if defects.len() % 2 == 1 {
            return Err(Error::OddDefectCount(defects.len()));
        }
        if face_weights.len() != self.adjacency.len() * 3 {
            return Err(Error::InvalidArgument(format!(
                "{} face weights for {} faces",
                face_weights.len(),
                self.adjacency.len() * 3
            )));
        }
        let mut nodes = defects.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() != defects.len() || nodes.last().is_some_and(|&c| c >= self.num_cells()) {
            return Err(Error::InvalidArgument("defects must be distinct cells".into()));
        }
        let k = nodes.len();
        let mut weights = vec![0u64; k * k];
        let cells = self.num_cells();
        let mut pred_faces = vec![0u32; k * cells];
        for (slot, &c) in nodes.iter().enumerate() {
            self.target_slot[c] = slot as u32;
        }
        for i in 0..k.saturating_sub(1) {
            self.run(nodes[i], &nodes[i + 1..], face_weights);
            for j in i + 1..k {
                let w = self.dist[nodes[j]];
                weights[i * k + j] = w;
                weights[j * k + i] = w;
            }
            pred_faces[i * cells..(i + 1) * cells].copy_from_slice(&self.pred_face);
        }
        for &c in &nodes {
            self.target_slot[c] = NO_SLOT;
        }
        Ok(DecodingGraph { nodes, weights, pred_faces, num_cells: cells })
    }

    /// Dijkstra from `source`, stopping once every target is settled.
    fn run(&mut self, source: usize, targets: &[usize], face_weights: &[u64]) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.visited_epoch.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        // visited_epoch == epoch: distance known (tentative); settled when
        // popped with matching distance.
        let mut remaining = targets.len();
        self.heap.clear();
        self.dist[source] = 0;
        self.visited_epoch[source] = epoch;
        self.heap.push(Reverse((0, source as u32)));
        let first_target = targets.first().copied().unwrap_or(usize::MAX);
        while let Some(Reverse((du, u))) = self.heap.pop() {
            let u = u as usize;
            if du > self.dist[u] {
                continue;
            }
            if u != source && self.target_slot[u] != NO_SLOT && u >= first_target {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for &(f, v) in &self.adjacency[u] {
                let v = v as usize;
                let nd = du + face_weights[f as usize];
                if self.visited_epoch[v] != epoch || nd < self.dist[v] {
                    self.visited_epoch[v] = epoch;
                    self.dist[v] = nd;
                    self.pred_face[v] = f;
                    self.heap.push(Reverse((nd, v as u32)));
                }
            }
        }
    }
}

/// Defect graph of `syndrome` on `geometry`.
pub fn build_decoding_graph(geometry: &LatticeGeometry, syndrome: &Syndrome) -> Result<DecodingGraph> {
    if syndrome.face_soft_info.len() != geometry.num_faces() {
        return Err(Error::InvalidArgument(format!(
            "soft information for {} faces on a lattice of {}",
            syndrome.face_soft_info.len(),
            geometry.num_faces()
        )));
    }
    PathFinder::new(geometry).build(syndrome)
}
