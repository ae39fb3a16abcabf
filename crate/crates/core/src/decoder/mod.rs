//! Soft-information minimum-weight perfect matching decoder for primal-cell
//! syndromes.

mod blossom;
mod graph;

pub use blossom::max_weight_matching;
pub use graph::{build_decoding_graph, face_weight, DecodingGraph, PathFinder, WEIGHT_EPSILON, WEIGHT_SCALE};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{FaceSet, LatticeGeometry, Syndrome};

/// Perfect pairing of the nodes of a [`DecodingGraph`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matching {
    /// Node index pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the pair weights, fixed point.
    pub total_weight_fixed: u64,
}

impl Matching {
    pub fn total_weight(&self) -> f64 {
        self.total_weight_fixed as f64 / WEIGHT_SCALE
    }
}

/// Exact minimum-weight perfect matching.
///
/// On shortest-path graphs, nodes at distance zero are paired first in index
/// order; by the triangle inequality some optimal matching contains each such
/// pair. The rest goes to the blossom algorithm as a maximum-cardinality matching on
/// complemented weights.
pub fn min_weight_perfect_matching(graph: &DecodingGraph) -> Result<Matching> {
    let k = graph.num_nodes();
    if k % 2 == 1 {
        return Err(Error::OddDefectCount(k));
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut paired = vec![false; k];
    for i in 0..k {
        if paired[i] || !graph.is_metric() {
            continue;
        }
        if let Some(j) = (i + 1..k).find(|&j| !paired[j] && graph.weight_fixed(i, j) == 0) {
            paired[i] = true;
            paired[j] = true;
            pairs.push((i, j));
        }
    }
    let rest: Vec<usize> = (0..k).filter(|&i| !paired[i]).collect();
    if !rest.is_empty() {
        let max_w = rest.iter().flat_map(|&i| rest.iter().map(move |&j| graph.weight_fixed(i, j))).max().unwrap_or(0);
        let cap = i64::try_from(max_w)
            .ok()
            .filter(|&w| w < i64::MAX / 8)
            .ok_or_else(|| Error::InvalidArgument(format!("matching weight {max_w} too large")))?
            + 1;
        let mut edges = Vec::with_capacity(rest.len() * (rest.len() - 1) / 2);
        for (a, &i) in rest.iter().enumerate() {
            for (b, &j) in rest.iter().enumerate().skip(a + 1) {
                edges.push((a, b, cap - graph.weight_fixed(i, j) as i64));
            }
        }
        let mate = max_weight_matching(rest.len(), &edges, true);
        for (a, m) in mate.iter().enumerate() {
            match m {
                Some(b) if a < *b => pairs.push((rest[a], rest[*b])),
                Some(_) => {}
                None => return Err(Error::InvalidArgument("matching left a node unpaired".into())),
            }
        }
    }
    pairs.sort_unstable();
    let total_weight_fixed = pairs.iter().map(|&(i, j)| graph.weight_fixed(i, j)).sum();
    Ok(Matching { pairs, total_weight_fixed })
}

/// Graph, matching and correction of one decode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeRecord {
    pub graph: DecodingGraph,
    pub matching: Matching,
    /// Faces flipped by the correction.
    pub correction: Vec<usize>,
}

/// Decoder with buffers sized for one lattice, reusable across trials.
#[derive(Clone, Debug)]
pub struct Decoder {
    finder: PathFinder,
    num_faces: usize,
}

impl Decoder {
    pub fn new(geometry: &LatticeGeometry) -> Self {
        Self { finder: PathFinder::new(geometry), num_faces: geometry.num_faces() }
    }

    /// Correction face set whose syndrome equals `syndrome`.
    pub fn decode(&mut self, geometry: &LatticeGeometry, syndrome: &Syndrome) -> Result<FaceSet> {
        Ok(FaceSet::from_faces(self.num_faces, self.decode_record(geometry, syndrome)?.correction))
    }

    pub fn decode_record(&mut self, geometry: &LatticeGeometry, syndrome: &Syndrome) -> Result<DecodeRecord> {
        if geometry.num_faces() != self.num_faces || syndrome.face_soft_info.len() != self.num_faces {
            return Err(Error::InvalidArgument("syndrome and decoder built for different lattices".into()));
        }
        let graph = self.finder.build(syndrome)?;
        let matching = min_weight_perfect_matching(&graph)?;
        let correction = graph.correction(geometry, &matching.pairs)?.iter().collect();
        Ok(DecodeRecord { graph, matching, correction })
    }
}

/// One-shot decode; see [`Decoder`] for repeated use.
pub fn decode(geometry: &LatticeGeometry, syndrome: &Syndrome) -> Result<FaceSet> {
    Decoder::new(geometry).decode(geometry, syndrome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{face_syndrome, logical_failure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_min(k: usize, w: &dyn Fn(usize, usize) -> u64) -> u64 {
        fn rec(free: &mut Vec<usize>, w: &dyn Fn(usize, usize) -> u64) -> u64 {
            if free.is_empty() {
                return 0;
            }
            let a = free.remove(0);
            let mut best = u64::MAX;
            for idx in 0..free.len() {
                let b = free.remove(idx);
                best = best.min(w(a, b) + rec(free, w));
                free.insert(idx, b);
            }
            free.insert(0, a);
            best
        }
        rec(&mut (0..k).collect(), w)
    }

    #[test]
    fn two_nodes() {
        let g = DecodingGraph::from_weights(2, |_, _| 7);
        let m = min_weight_perfect_matching(&g).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total_weight_fixed, 7);
    }

    #[test]
    fn four_node_example() {
        let w = |i: usize, j: usize| if (i, j) == (0, 1) || (i, j) == (2, 3) { 1 } else { 10 };
        let m = min_weight_perfect_matching(&DecodingGraph::from_weights(4, w)).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(m.total_weight_fixed, 2);
    }

    #[test]
    fn odd_node_count_rejected() {
        let g = DecodingGraph::from_weights(3, |_, _| 1);
        assert!(matches!(min_weight_perfect_matching(&g), Err(Error::OddDefectCount(3))));
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let k = 2 * rng.gen_range(1..=5);
            let table: Vec<u64> = (0..k * k).map(|_| rng.gen_range(0..50)).collect();
            let w = |i: usize, j: usize| table[i.min(j) * k + i.max(j)];
            let m = min_weight_perfect_matching(&DecodingGraph::from_weights(k, w)).unwrap();
            assert_eq!(m.total_weight_fixed, brute_force_min(k, &w));
        }
    }

    #[test]
    fn adjacent_defects_cost_one_face() {
        let g = LatticeGeometry::new(4).unwrap();
        let q: f64 = 0.05;
        let f = g.face_index(0, [1, 1, 1]);
        let s = Syndrome::from_faces(&g, &FaceSet::from_faces(g.num_faces(), [f]), q);
        let graph = build_decoding_graph(&g, &s).unwrap();
        assert!((graph.weight(0, 1) - ((1.0 - q) / q).ln()).abs() < 1e-5);
    }

    #[test]
    fn wraparound_is_one_step() {
        for d in 3..=6 {
            let g = LatticeGeometry::new(d).unwrap();
            let a = g.site_index([0, 1, 1]);
            let b = g.site_index([d - 1, 1, 1]);
            let s = Syndrome { odd_cells: vec![a, b], face_soft_info: vec![0.1; g.num_faces()] };
            let graph = build_decoding_graph(&g, &s).unwrap();
            let w0 = face_weight(0.1);
            assert!((graph.weight(0, 1) - w0).abs() < 1e-5);
            assert_eq!(graph.path(&g, 0, 1).unwrap(), vec![g.face_index(0, [0, 1, 1])]);
        }
    }

    #[test]
    fn located_path_is_free() {
        let g = LatticeGeometry::new(4).unwrap();
        let mut soft = vec![0.01; g.num_faces()];
        let f1 = g.face_index(2, [1, 1, 1]);
        let f2 = g.face_index(2, [1, 1, 2]);
        soft[f1] = 0.5;
        soft[f2] = 0.5;
        let s = Syndrome { odd_cells: vec![g.site_index([1, 1, 0]), g.site_index([1, 1, 2])], face_soft_info: soft };
        let graph = build_decoding_graph(&g, &s).unwrap();
        assert_eq!(graph.weight_fixed(0, 1), 0);
    }

    #[test]
    fn uniform_weights_give_lattice_distance() {
        // Cross-check against breadth-first search on the periodic cell grid.
        let g = LatticeGeometry::new(5).unwrap();
        let w0 = face_weight(0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = rng.gen_range(0..g.num_cells());
            let b = loop {
                let b = rng.gen_range(0..g.num_cells());
                if b != a {
                    break b;
                }
            };
            let s = Syndrome { odd_cells: vec![a, b], face_soft_info: vec![0.02; g.num_faces()] };
            let graph = build_decoding_graph(&g, &s).unwrap();
            let mut hops = vec![usize::MAX; g.num_cells()];
            let mut queue = std::collections::VecDeque::from([a]);
            hops[a] = 0;
            while let Some(c) = queue.pop_front() {
                for f in g.cell_faces(c) {
                    for n in g.face_cells(f) {
                        if hops[n] == usize::MAX {
                            hops[n] = hops[c] + 1;
                            queue.push_back(n);
                        }
                    }
                }
            }
            let fixed_step = graph::quantize(w0);
            assert_eq!(graph.weight_fixed(0, 1), hops[b] as u64 * fixed_step);
            assert_eq!(graph.path(&g, 0, 1).unwrap().len(), hops[b]);
        }
    }

    #[test]
    fn empty_syndrome_decodes_to_nothing() {
        let g = LatticeGeometry::new(3).unwrap();
        let s = Syndrome::from_faces(&g, &FaceSet::empty(g.num_faces()), 0.01);
        assert!(decode(&g, &s).unwrap().is_empty());
    }

    #[test]
    fn single_flip_is_corrected() {
        // At d = 2 the two defects of a flip are joined by two faces of equal
        // weight, so the correction is a coin toss there.
        for d in 3..=5 {
            let g = LatticeGeometry::new(d).unwrap();
            for f in 0..g.num_faces() {
                let err = FaceSet::from_faces(g.num_faces(), [f]);
                let s = Syndrome::from_faces(&g, &err, 0.01);
                let c = decode(&g, &s).unwrap();
                assert_eq!(face_syndrome(&g, c.as_mask()), s.odd_cells);
                assert!(!logical_failure(&g, &err, &c).unwrap().is_failure());
            }
        }
    }

    #[test]
    fn chains_shorter_than_half_are_corrected() {
        for d in 3..=8 {
            let g = LatticeGeometry::new(d).unwrap();
            for axis in 0..3 {
                let chain = |len: usize| {
                    let faces = (0..len).map(|t| {
                        let mut site = [1, 1, 1];
                        site[axis] = t;
                        g.face_index(axis, site)
                    });
                    FaceSet::from_faces(g.num_faces(), faces)
                };
                let decode_chain = |len: usize| {
                    let err = chain(len);
                    let s = Syndrome::from_faces(&g, &err, 0.01);
                    let c = decode(&g, &s).unwrap();
                    assert_eq!(face_syndrome(&g, c.as_mask()), s.odd_cells);
                    logical_failure(&g, &err, &c).unwrap().is_failure()
                };
                // Below half the torus the direct path is strictly shorter.
                for len in 1..=(d - 1) / 2 {
                    assert!(!decode_chain(len), "d={d} axis={axis} len={len}");
                }
                // Past half, the complement wins and the chain becomes a loop.
                if d % 2 == 1 {
                    assert!(decode_chain(d.div_ceil(2)), "d={d} axis={axis}");
                }
            }
        }
    }

    #[test]
    fn argmin_invariant_under_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = 2 * rng.gen_range(1..=5);
            let table: Vec<u64> = (0..k * k).map(|_| rng.gen_range(1..1000)).collect();
            let w = |i: usize, j: usize| table[i.min(j) * k + i.max(j)];
            let base = min_weight_perfect_matching(&DecodingGraph::from_weights(k, w)).unwrap();
            for scale in [2, 7, 1000] {
                let m = min_weight_perfect_matching(&DecodingGraph::from_weights(k, |i, j| scale * w(i, j))).unwrap();
                assert_eq!(m.total_weight_fixed, scale * base.total_weight_fixed);
                let unscaled: u64 = m.pairs.iter().map(|&(i, j)| w(i, j)).sum();
                assert_eq!(unscaled, base.total_weight_fixed);
            }
        }
    }
}
