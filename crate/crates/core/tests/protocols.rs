mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrepgame::extensive::build_extensive;
use qrepgame::iqbaltoor::{it_expected, it_expected_batch, ItGame, ItStrategy};
use qrepgame::qstate::PureState;
use qrepgame::repeated10::{
    play_batch, play_mixed, play_mixed_sequential, play_sequential, rep_bimatrix, two_term_state, MixedRepStrategy,
    RepGame,
};
use qrepgame::stagegames::{classical_twice_repeated, make_bos, make_pd, RepStrategy};

fn seeded_state(n: usize, seed: u64) -> PureState {
    PureState::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn batch_matches_sequential_and_oracle(seed in any::<u64>(), s1 in 0usize..32, s2 in 0usize..32) {
        let stage = make_pd(5.0, 3.0, 1.0, 0.0).unwrap();
        let state = seeded_state(10, seed);
        let game = RepGame::new(state.clone(), stage.clone()).unwrap();
        let (a, b) = (RepStrategy::from_index(s1).unwrap(), RepStrategy::from_index(s2).unwrap());
        let batch = play_batch(&game, &a, &b);
        prop_assert!(batch.max_abs_diff(&play_sequential(&game, &a, &b).payoffs) <= 1e-9);
        let naive = common::naive_rep_payoffs(state.amplitudes(), &stage, s1, s2);
        let got = [batch.get(1, 1), batch.get(1, 2), batch.get(2, 1), batch.get(2, 2)];
        for (x, y) in got.iter().zip(naive) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn iqbal_toor_batch_matches_sequential(seed in any::<u64>(), r in 0usize..4, c in 0usize..4) {
        let game = ItGame::new(seeded_state(4, seed), make_pd(5.0, 3.0, 1.0, 0.0).unwrap()).unwrap();
        let (a, b) = (ItStrategy::pure_from_index(r), ItStrategy::pure_from_index(c));
        let (k1, k3) = a.pure_choices().unwrap();
        let (k2, k4) = b.pure_choices().unwrap();
        let batch = it_expected_batch(&game, [k1, k2, k3, k4]).unwrap();
        prop_assert!(batch.max_abs_diff(&it_expected(&game, &a, &b)) <= 1e-9);
    }

    // Payoffs are multilinear in the four flip probabilities.
    #[test]
    fn iqbal_toor_multilinear(seed in any::<u64>(), p in prop::array::uniform4(0.0f64..=1.0)) {
        let game = ItGame::new(seeded_state(4, seed), make_pd(5.0, 3.0, 1.0, 0.0).unwrap()).unwrap();
        let mixed = it_expected(&game, &ItStrategy::new(p[0], p[2]).unwrap(), &ItStrategy::new(p[1], p[3]).unwrap());
        let mut expected = [[0.0; 2]; 2];
        for corner in 0..16usize {
            let bits = [corner >> 3 & 1, corner >> 2 & 1, corner >> 1 & 1, corner & 1];
            let weight: f64 = bits.iter().zip(p).map(|(&b, q)| if b == 1 { q } else { 1.0 - q }).product();
            let e = it_expected_batch(&game, bits.map(|b| b as u8)).unwrap();
            for (player, row) in expected.iter_mut().enumerate() {
                for (stage, v) in row.iter_mut().enumerate() {
                    *v += weight * e.get(player + 1, stage + 1);
                }
            }
        }
        for (player, row) in expected.iter().enumerate() {
            for (stage, v) in row.iter().enumerate() {
                prop_assert!((mixed.get(player + 1, stage + 1) - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn relabeling_symmetry(seed in any::<u64>(), s1 in 0usize..32, s2 in 0usize..32) {
        // flipping every qubit of the state and complementing both strategies
        // leaves the final state unchanged
        let state = seeded_state(10, seed);
        let flipped = state.apply_mask(1023);
        let stage = make_pd(5.0, 3.0, 1.0, 0.0).unwrap();
        let g = RepGame::new(state, stage.clone()).unwrap();
        let h = RepGame::new(flipped, stage).unwrap();
        let (a, b) = (RepStrategy::from_index(s1).unwrap(), RepStrategy::from_index(s2).unwrap());
        let lhs = play_batch(&g, &a, &b);
        let rhs = play_batch(&h, &complement(a), &complement(b));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }
}

fn complement(s: RepStrategy) -> RepStrategy {
    RepStrategy::from_index(s.index() ^ 31).unwrap()
}

#[test]
fn mixed_batch_matches_mixed_sequential() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let game = RepGame::new(PureState::random(10, &mut rng).unwrap(), make_bos(3.0, 2.0, 1.0).unwrap()).unwrap();
        let mut mixed = || {
            let support: Vec<(f64, RepStrategy)> =
                (0..3).map(|_| (rng.gen_range(0.1..1.0), RepStrategy::from_index(rng.gen_range(0..32)).unwrap())).collect();
            let total: f64 = support.iter().map(|(w, _)| w).sum();
            MixedRepStrategy::new(support.into_iter().map(|(w, s)| (w / total, s)).collect()).unwrap()
        };
        let (m1, m2) = (mixed(), mixed());
        assert!(play_mixed(&game, &m1, &m2).max_abs_diff(&play_mixed_sequential(&game, &m1, &m2)) <= 1e-9);
    }
}

#[test]
fn basis_states_embed_classical_play() {
    // |0>^10 reproduces the classical game for every stage game tried
    for stage in [make_pd(5.0, 3.0, 1.0, 0.0).unwrap(), make_pd(6.0, 4.0, 2.0, 1.0).unwrap(), make_bos(3.0, 2.0, 1.0).unwrap()] {
        let q = rep_bimatrix(&RepGame::new(PureState::basis(10, 0).unwrap(), stage.clone()).unwrap());
        assert_eq!(q.cells(), classical_twice_repeated(&stage).cells());
    }
}

#[test]
fn ghz_tree_has_two_live_branches() {
    let game = RepGame::new(two_term_state(0.3).unwrap(), make_pd(5.0, 3.0, 1.0, 0.0).unwrap()).unwrap();
    let tree = build_extensive(&game).unwrap();
    for chance in tree.chance_nodes() {
        let live: Vec<f64> = chance.children.iter().filter_map(|e| e.probability).filter(|p| *p > 0.0).collect();
        assert_eq!(live.len(), 2);
        assert!((live.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let json = tree.to_json_string().unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(value["nodes"].as_array().unwrap().len() > 4);
}
