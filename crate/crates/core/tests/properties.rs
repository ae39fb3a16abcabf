use proptest::prelude::*;

use cluster_qec::decoder::Decoder;
use cluster_qec::lattice::{face_syndrome, logical_failure, FaceSet, LatticeGeometry, PrepSchedule, Syndrome};
use cluster_qec::pauli::{Pauli, PauliFrame};
use cluster_qec::rep_code::{encoded_cz_schedule, majority_vote, posterior_flip_prob};

/// Posterior that the majority is wrong, by summing over all 2^n physical
/// error patterns consistent with a codeword.
fn enumerated_posterior(outcomes: &[bool], q: f64) -> f64 {
    let n = outcomes.len();
    let majority = majority_vote(outcomes, true).unwrap().majority_flip;
    let (mut wrong, mut total) = (0.0, 0.0);
    for e in 0u32..1 << n {
        let word: Vec<bool> = (0..n).map(|i| outcomes[i] ^ (e >> i & 1 == 1)).collect();
        if word.iter().any(|&b| b != word[0]) {
            continue;
        }
        let k = e.count_ones() as i32;
        let w = q.powi(k) * (1.0 - q).powi(n as i32 - k);
        total += w;
        if word[0] != majority {
            wrong += w;
        }
    }
    wrong / total
}

fn random_faces(g: &LatticeGeometry, bits: &[bool]) -> FaceSet {
    FaceSet::from_mask(bits.iter().copied().cycle().take(g.num_faces()).collect())
}

/// Sum of trivial loops: the four faces around each chosen edge bound a
/// plaquette of the dual complex, so they leave no syndrome.
fn boundary(g: &LatticeGeometry, edges: &[usize]) -> FaceSet {
    let mut b = FaceSet::empty(g.num_faces());
    for &e in edges {
        for f in g.neighbors(g.num_faces() + e % g.num_edges()) {
            b.toggle(f);
        }
    }
    assert!(face_syndrome(g, b.as_mask()).is_empty());
    b
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn z_errors_and_czs_leave_x_record_alone(
        ops in prop::collection::vec((0usize..5, 0usize..5, any::<bool>()), 1..60),
    ) {
        let mut with_z = PauliFrame::new(5).unwrap();
        let mut without = PauliFrame::new(5).unwrap();
        with_z.apply_pauli(0, Pauli::X).unwrap();
        without.apply_pauli(0, Pauli::X).unwrap();
        for (a, b, z) in ops {
            if a != b {
                with_z.apply_cz(a, b).unwrap();
                without.apply_cz(a, b).unwrap();
            }
            if z {
                with_z.apply_pauli(a, Pauli::Z).unwrap();
            }
        }
        for q in 0..5 {
            prop_assert_eq!(with_z.x(q).unwrap(), without.x(q).unwrap());
        }
    }

    #[test]
    fn cz_is_an_involution(ps in prop::collection::vec(pauli(), 4), a in 0usize..4, b in 0usize..4) {
        prop_assume!(a != b);
        let mut f = PauliFrame::new(4).unwrap();
        for (q, &p) in ps.iter().enumerate() {
            f.apply_pauli(q, p).unwrap();
        }
        let before = f.clone();
        f.apply_cz(a, b).unwrap();
        f.apply_cz(a, b).unwrap();
        prop_assert_eq!(f, before);
    }

    #[test]
    fn syndrome_is_linear_and_even(d in 2usize..5, a in prop::collection::vec(any::<bool>(), 1..64), b in prop::collection::vec(any::<bool>(), 1..64)) {
        let g = LatticeGeometry::new(d).unwrap();
        let (fa, fb) = (random_faces(&g, &a), random_faces(&g, &b));
        let sa = face_syndrome(&g, fa.as_mask());
        let sb = face_syndrome(&g, fb.as_mask());
        let sab = face_syndrome(&g, fa.xor(&fb).as_mask());
        prop_assert_eq!(sab.len() % 2, 0);
        let mut expected: Vec<usize> = sa.iter().filter(|c| !sb.contains(c)).chain(sb.iter().filter(|c| !sa.contains(c))).copied().collect();
        expected.sort_unstable();
        prop_assert_eq!(sab, expected);
    }

    #[test]
    fn verdict_ignores_trivial_loops(
        d in 3usize..6,
        bits in prop::collection::vec(prop::bool::weighted(0.05), 32..200),
        edges in prop::collection::vec(any::<usize>(), 1..20),
    ) {
        let g = LatticeGeometry::new(d).unwrap();
        let error = random_faces(&g, &bits);
        let correction = Decoder::new(&g).decode(&g, &Syndrome::from_faces(&g, &error, 0.05)).unwrap();
        let base = logical_failure(&g, &error, &correction).unwrap();
        let shifted = logical_failure(&g, &error.xor(&boundary(&g, &edges)), &correction).unwrap();
        prop_assert_eq!(base, shifted);
    }

    #[test]
    fn posterior_matches_enumeration(n in 1usize..=5, pattern in any::<u8>(), q in 1e-4f64..0.49) {
        let outcomes: Vec<bool> = (0..n).map(|i| pattern >> i & 1 == 1).collect();
        let got = posterior_flip_prob(&outcomes, q).unwrap();
        let want = enumerated_posterior(&outcomes, q);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{} vs {}", got, want);
    }
}

#[test]
fn rep_schedule_is_complete_and_parallel() {
    for n in 1..=8 {
        let s = encoded_cz_schedule(n).unwrap();
        assert_eq!(s.rounds.len(), n);
        let mut seen = vec![false; n * n];
        for round in &s.rounds {
            let mut a_used = vec![false; n];
            let mut b_used = vec![false; n];
            for &(i, j) in round {
                assert!(!a_used[i] && !b_used[j], "qubit reused within a round (n = {n})");
                a_used[i] = true;
                b_used[j] = true;
                assert!(!seen[i * n + j]);
                seen[i * n + j] = true;
            }
            // No idle qubits: every qubit acts in every round.
            assert!(a_used.iter().chain(&b_used).all(|&u| u));
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn lattice_schedule_is_a_proper_colouring() {
    for d in 2..=5 {
        let g = LatticeGeometry::new(d).unwrap();
        let s = PrepSchedule::new(&g);
        assert_eq!(s.rounds.len(), 4);
        let mut pairs = std::collections::HashSet::new();
        for round in &s.rounds {
            let mut used = vec![false; g.num_cluster_qubits()];
            for &(f, e) in round {
                assert!(g.is_face(f) && !g.is_face(e));
                assert!(!used[f] && !used[e]);
                used[f] = true;
                used[e] = true;
                assert!(pairs.insert((f, e)));
            }
            assert!(used.iter().all(|&u| u), "idle qubit in a round at d = {d}");
        }
        // Every face meets each of its four edge neighbours once.
        for f in (0..g.num_cluster_qubits()).filter(|&q| g.is_face(q)) {
            for e in g.neighbors(f) {
                assert!(pairs.contains(&(f, e)));
            }
        }
        assert_eq!(pairs.len(), 4 * g.num_faces());
    }
}
