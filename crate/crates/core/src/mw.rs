//! One-shot Marinatto–Weber game on a two-qubit state.

use crate::error::{Error, Result};
use crate::qstate::{DiagonalObservable, FlipLayer, PureState};
use crate::stagegames::{Bimatrix, Payoff, StageGame};

/// `Σ_y O_y[player] |y><y|` on two qubits.
pub fn stage_observable(stage: &StageGame, player: usize) -> DiagonalObservable {
    DiagonalObservable::from_fn(2, |y| {
        let (u1, u2) = stage.outcome_by_index(y);
        if player == 1 {
            u1
        } else {
            u2
        }
    })
    .expect("two qubits")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MwGame {
    initial: PureState,
    stage: StageGame,
}

impl MwGame {
    pub fn new(initial: PureState, stage: StageGame) -> Result<Self> {
        if initial.num_qubits() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "MW game needs a 2-qubit state, got {} qubits",
                initial.num_qubits()
            )));
        }
        Ok(Self { initial, stage })
    }

    pub fn initial(&self) -> &PureState {
        &self.initial
    }

    pub fn stage(&self) -> &StageGame {
        &self.stage
    }

    /// Expected payoffs when player 1 applies `σ_k1` to qubit 1 and player 2
    /// applies `σ_k2` to qubit 2.
    pub fn payoff(&self, k1: u8, k2: u8) -> Payoff {
        let layer = FlipLayer::from_pairs([(1, k1), (2, k2)]).expect("valid bits");
        let fin = self.initial.apply_flips(&layer).expect("qubits 1 and 2 exist");
        let e1 = stage_observable(&self.stage, 1).expectation_pure(&fin).expect("2 qubits");
        let e2 = stage_observable(&self.stage, 2).expectation_pure(&fin).expect("2 qubits");
        (e1, e2)
    }

    pub fn bimatrix(&self) -> Bimatrix {
        Bimatrix::from_fn(2, 2, |r, c| self.payoff(r as u8, c as u8))
            .with_labels(vec!["0".into(), "1".into()], vec!["0".into(), "1".into()])
    }
}

pub fn mw_bimatrix(game: &MwGame) -> Bimatrix {
    game.bimatrix()
}

/// `√x |00> + √(1-x) |11>`.
pub fn two_term_pair(x: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("|λ0|² = {x} outside [0, 1]")));
    }
    use num_complex::Complex64;
    let zero = Complex64::new(0.0, 0.0);
    PureState::new(
        2,
        vec![Complex64::new(x.sqrt(), 0.0), zero, zero, Complex64::new((1.0 - x).sqrt(), 0.0)],
    )
}
