mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrepgame::equilibria::{cooperation_bound, mutual_identity_unique, pure_nash, spe_pair_product, DEFAULT_TOL};
use qrepgame::mw::two_term_pair;
use qrepgame::qstate::PureState;
use qrepgame::repeated10::{pair_product_state, rep_bimatrix, RepGame};
use qrepgame::stagegames::{make_bos, make_pd, Bimatrix, StageGame};

fn random_pair_product(rng: &mut ChaCha8Rng) -> PureState {
    let pairs: Vec<PureState> = (0..5)
        .map(|_| {
            if rng.gen_bool(0.4) {
                PureState::basis(2, rng.gen_range(0..4)).unwrap()
            } else {
                PureState::random(2, rng).unwrap()
            }
        })
        .collect();
    pair_product_state(&pairs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    // Integer payoffs with a shared range make ties common; tol 0 is exact.
    #[test]
    fn pure_nash_matches_definition(cells in vec((-4i32..=4, -4i32..=4), 25)) {
        let cells: Vec<(f64, f64)> = cells.into_iter().map(|(a, b)| (a as f64, b as f64)).collect();
        let bm = Bimatrix::new(5, 5, cells.clone()).unwrap();
        let oracle: common::Cells = cells.chunks(5).map(|r| r.to_vec()).collect();
        prop_assert_eq!(pure_nash(&bm, 0.0).unwrap().profiles(), common::brute_force_nash(&oracle, 0.0));
    }

    #[test]
    fn pure_nash_distinct_values(cells in vec((-1e3f64..1e3, -1e3f64..1e3), 25)) {
        let bm = Bimatrix::new(5, 5, cells.clone()).unwrap();
        let oracle: common::Cells = cells.chunks(5).map(|r| r.to_vec()).collect();
        let report = pure_nash(&bm, 0.0).unwrap();
        prop_assert_eq!(report.profiles(), common::brute_force_nash(&oracle, 0.0));
        prop_assert!(report.equilibria.iter().all(|e| e.strict));
    }
}

#[test]
fn spe_is_subset_of_nash() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let stages = [
        make_pd(5.0, 3.0, 1.0, 0.0).unwrap(),
        make_pd(5.0, 4.0, 1.0, 0.0).unwrap(),
        make_bos(3.0, 2.0, 1.0).unwrap(),
    ];
    for i in 0..12 {
        let stage = stages[i % 3].clone();
        let game = RepGame::new(random_pair_product(&mut rng), stage).unwrap();
        let spe = spe_pair_product(&game, DEFAULT_TOL).unwrap();
        let ne = pure_nash(&rep_bimatrix(&game), DEFAULT_TOL).unwrap();
        assert!(!spe.is_empty());
        for e in &spe.equilibria {
            assert!(ne.contains(e.row, e.col), "SPE {:?} is not a NE", (e.row, e.col));
            let cell = rep_bimatrix(&game).get(e.row, e.col);
            assert!((cell.0 - e.payoff.0).abs() <= 1e-9 && (cell.1 - e.payoff.1).abs() <= 1e-9);
        }
    }
}

#[test]
fn spe_matches_exhaustive_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..8 {
        let stage = if i % 2 == 0 { make_pd(5.0, 3.0, 1.0, 0.0).unwrap() } else { make_bos(3.0, 2.0, 1.0).unwrap() };
        let state = random_pair_product(&mut rng);
        let spe = spe_pair_product(&RepGame::new(state.clone(), stage.clone()).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(spe.profiles(), common::brute_force_spe(state.amplitudes(), &stage, DEFAULT_TOL));
    }
}

#[test]
fn ground_state_spe_is_classical_backward_induction() {
    let ground = PureState::basis(10, 0).unwrap();
    let stages: Vec<StageGame> = vec![
        make_pd(5.0, 3.0, 1.0, 0.0).unwrap(),
        make_pd(6.0, 4.0, 2.0, 1.0).unwrap(),
        make_bos(3.0, 2.0, 1.0).unwrap(),
    ];
    for stage in stages {
        let spe = spe_pair_product(&RepGame::new(ground.clone(), stage.clone()).unwrap(), DEFAULT_TOL).unwrap();
        let oracle = common::classical_backward_induction(&stage, DEFAULT_TOL);
        let got: Vec<(usize, usize, (f64, f64))> = spe.equilibria.iter().map(|e| (e.row, e.col, e.payoff)).collect();
        assert_eq!(got, oracle);
    }
}

#[test]
fn bos_backward_induction_has_sixteen_continuations() {
    // Each of the four subgames has two pure equilibria.
    let ground = PureState::basis(10, 0).unwrap();
    let spe = spe_pair_product(&RepGame::new(ground, make_bos(3.0, 2.0, 1.0).unwrap()).unwrap(), DEFAULT_TOL).unwrap();
    assert!(spe.len() >= 16);
}

#[test]
fn threshold_matches_inequalities() {
    // mutual σ0 is a strict unique equilibrium iff x R + (1-x) P beats both
    // deviations, written out by hand for the symmetric PD
    for (t, r, p, s) in [(5.0, 3.0, 1.0, 0.0), (5.0, 4.0, 1.0, 0.0), (6.0, 4.0, 2.0, 1.0), (10.0, 6.0, 5.0, 0.0)] {
        let stage = make_pd(t, r, p, s).unwrap();
        let bound = cooperation_bound(&stage).unwrap();
        for k in 1..100 {
            let x = k as f64 / 100.0;
            if (x - bound).abs() < 1e-9 {
                continue;
            }
            let (unique, q) = mutual_identity_unique(&stage, x).unwrap();
            assert_eq!(unique, x < bound, "PD({t},{r},{p},{s}) at x = {x}");
            assert!((q - (x * r + (1.0 - x) * p)).abs() < 1e-12);
        }
    }
}

#[test]
fn below_threshold_spe_pays_twice_q() {
    let stage = make_pd(5.0, 3.0, 1.0, 0.0).unwrap();
    for x in [0.05, 0.1, 0.2, 0.3] {
        let state = pair_product_state(&vec![two_term_pair(x).unwrap(); 5]).unwrap();
        let spe = spe_pair_product(&RepGame::new(state, stage.clone()).unwrap(), DEFAULT_TOL).unwrap();
        let q = x * 3.0 + (1.0 - x) * 1.0;
        assert_eq!(spe.profiles(), vec![(0, 0)]);
        assert!((spe.equilibria[0].payoff.0 - 2.0 * q).abs() < 1e-12);
        assert!(q > 1.0);
    }
}
