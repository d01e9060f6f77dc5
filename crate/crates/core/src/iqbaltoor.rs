//! The four-qubit repeated-game scheme of Iqbal and Toor.
//!
//! Player 1 owns qubits 1 (stage 1) and 3 (stage 2), player 2 owns qubits 2
//! and 4. Stage payoffs are read from qubits 1–2 and 3–4 respectively. A
//! strategy is a pair of independent per-qubit flip probabilities, so each
//! player has only four pure strategies.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibria::{pure_nash, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::qstate::{expectation, DiagonalObservable, Ensemble, FlipLayer, PureState};
use crate::stagegames::{Bimatrix, StageGame, StagePayoffs};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ItStrategy {
    pub stage1_flip_prob: f64,
    pub stage2_flip_prob: f64,
}

impl ItStrategy {
    pub fn new(stage1_flip_prob: f64, stage2_flip_prob: f64) -> Result<Self> {
        for p in [stage1_flip_prob, stage2_flip_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbabilities(format!("flip probability {p} outside [0, 1]")));
            }
        }
        Ok(Self {
            stage1_flip_prob,
            stage2_flip_prob,
        })
    }

    /// `σ_k1` on the stage-1 qubit and `σ_k2` on the stage-2 qubit.
    pub fn pure(k1: u8, k2: u8) -> Self {
        Self {
            stage1_flip_prob: f64::from(k1.min(1)),
            stage2_flip_prob: f64::from(k2.min(1)),
        }
    }

    /// Pure strategy by bimatrix index `2·k_stage1 + k_stage2`.
    pub fn pure_from_index(index: usize) -> Self {
        Self::pure((index >> 1) as u8 & 1, index as u8 & 1)
    }

    pub fn pure_choices(&self) -> Option<(u8, u8)> {
        let bit = |p: f64| {
            if p == 0.0 {
                Some(0)
            } else if p == 1.0 {
                Some(1)
            } else {
                None
            }
        };
        Some((bit(self.stage1_flip_prob)?, bit(self.stage2_flip_prob)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItGame {
    initial: PureState,
    stage: StageGame,
    observables: [[DiagonalObservable; 2]; 2],
}

impl ItGame {
    pub fn new(initial: PureState, stage: StageGame) -> Result<Self> {
        if initial.num_qubits() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "Iqbal-Toor game needs a 4-qubit state, got {} qubits",
                initial.num_qubits()
            )));
        }
        let obs = |player: usize, stage_no: usize| {
            // stage 1 reads qubits 1-2 (bits 3,2), stage 2 reads qubits 3-4 (bits 1,0)
            let shift = if stage_no == 1 { 2 } else { 0 };
            DiagonalObservable::from_fn(4, |x| {
                let (u1, u2) = stage.outcome_by_index((x >> shift) & 0b11);
                if player == 1 {
                    u1
                } else {
                    u2
                }
            })
            .expect("four qubits")
        };
        let observables = [[obs(1, 1), obs(1, 2)], [obs(2, 1), obs(2, 2)]];
        Ok(Self {
            initial,
            stage,
            observables,
        })
    }

    pub fn initial(&self) -> &PureState {
        &self.initial
    }

    pub fn stage(&self) -> &StageGame {
        &self.stage
    }

    /// `X_{player.stage}`.
    pub fn observable(&self, player: usize, stage: usize) -> &DiagonalObservable {
        &self.observables[player - 1][stage - 1]
    }

    fn evaluate(&self, ensemble: &Ensemble) -> StagePayoffs {
        let mut out = StagePayoffs::default();
        for player in 1..=2 {
            for stage in 1..=2 {
                out.e[player - 1][stage - 1] =
                    expectation(ensemble, self.observable(player, stage)).expect("four qubits");
            }
        }
        out
    }

    /// Final ensemble built stage by stage: mix the stage-1 flips, then mix
    /// the stage-2 flips over every stage-1 member. Zero-weight members are
    /// dropped.
    pub fn final_ensemble(&self, s1: &ItStrategy, s2: &ItStrategy) -> Ensemble {
        let weights = |p: f64| [(0u8, 1.0 - p), (1u8, p)];
        let mut after_stage1 = Vec::with_capacity(4);
        for (k1, p1) in weights(s1.stage1_flip_prob) {
            for (k2, q2) in weights(s2.stage1_flip_prob) {
                let w = p1 * q2;
                if w > 0.0 {
                    let layer = FlipLayer::from_pairs([(1, k1), (2, k2)]).expect("bits");
                    after_stage1.push((w, self.initial.apply_flips(&layer).expect("4 qubits")));
                }
            }
        }
        let mut members = Vec::with_capacity(16);
        for (w, state) in &after_stage1 {
            for (k3, p3) in weights(s1.stage2_flip_prob) {
                for (k4, q4) in weights(s2.stage2_flip_prob) {
                    let w2 = w * p3 * q4;
                    if w2 > 0.0 {
                        let layer = FlipLayer::from_pairs([(3, k3), (4, k4)]).expect("bits");
                        members.push((w2, state.apply_flips(&layer).expect("4 qubits")));
                    }
                }
            }
        }
        Ensemble::new(members).expect("product of distributions")
    }
}

/// `E_{i.j} = tr(X_{i.j} ρ_fin)` with `ρ_fin` produced stage by stage.
pub fn it_expected(game: &ItGame, s1: &ItStrategy, s2: &ItStrategy) -> StagePayoffs {
    game.evaluate(&game.final_ensemble(s1, s2))
}

/// The same payoffs for a pure profile, from a single four-qubit flip layer
/// applied all at once. `choices = (κ1, κ2, κ3, κ4)` indexed by qubit.
pub fn it_expected_batch(game: &ItGame, choices: [u8; 4]) -> Result<StagePayoffs> {
    let layer = FlipLayer::from_pairs((1..=4).zip(choices))?;
    let fin = game.initial.apply_flips(&layer)?;
    Ok(game.evaluate(&Ensemble::pure(fin)))
}

pub fn it_strategy_labels() -> Vec<String> {
    ["00", "01", "10", "11"].iter().map(|s| s.to_string()).collect()
}

/// 4×4 table of total payoffs; strategy index is `2·k_stage1 + k_stage2`.
pub fn it_pure_bimatrix(game: &ItGame) -> Bimatrix {
    Bimatrix::from_fn(4, 4, |r, c| {
        let e = it_expected(game, &ItStrategy::pure_from_index(r), &ItStrategy::pure_from_index(c));
        (e.total(1), e.total(2))
    })
    .with_labels(it_strategy_labels(), it_strategy_labels())
}

/// Stage-2 payoff table, read off with stage-1 choices fixed at `σ0`.
pub fn it_stage2_bimatrix(game: &ItGame) -> Bimatrix {
    Bimatrix::from_fn(2, 2, |r, c| {
        let e = it_expected(game, &ItStrategy::pure(0, r as u8), &ItStrategy::pure(0, c as u8));
        (e.get(1, 2), e.get(2, 2))
    })
    .with_labels(vec!["0".into(), "1".into()], vec!["0".into(), "1".into()])
}

/// State `λ0000|0000> + λ1100|1100> + λ0011|0011> + λ1111|1111>` with
/// `|λ0000|² + |λ1100|² = 1/3` and `|λ0011|² + |λ1111|² = 2/3`.
///
/// `upper` splits the first weight between `0000` and `1100`, `lower` the
/// second between `0011` and `1111`; `phases` follow the same term order.
pub fn balanced_family_state(upper: f64, lower: f64, phases: [f64; 4]) -> Result<PureState> {
    for (name, v) in [("upper", upper), ("lower", lower)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} split {v} outside [0, 1]")));
        }
    }
    let third = 1.0 / 3.0;
    let weights = [third * upper, third * (1.0 - upper), 2.0 * third * lower, 2.0 * third * (1.0 - lower)];
    let mut amps = vec![Complex64::new(0.0, 0.0); 16];
    for ((index, w), phase) in [0b0000, 0b1100, 0b0011, 0b1111].into_iter().zip(weights).zip(phases) {
        amps[index] = Complex64::from_polar(w.sqrt(), phase);
    }
    PureState::normalized(4, amps)
}

/// Stage-1 payoffs in PD naming, as seen by one player: `R'` when both pick
/// `σ0`, `S'` when only the opponent flips, `T'` when only this player flips
/// and `P'` when both flip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PdPattern {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub p: f64,
}

impl PdPattern {
    pub fn is_pd(&self) -> bool {
        self.t > self.r && self.r > self.p && self.p > self.s && 2.0 * self.r > self.t + self.s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stage1Pattern {
    pub player1: PdPattern,
    pub player2: PdPattern,
    /// Both players' patterns satisfy the PD inequalities.
    pub pd_consistent: bool,
}

pub fn it_stage1_pattern(game: &ItGame) -> Stage1Pattern {
    // X_{i.1} is the identity on qubits 3-4, so the stage-2 choices are irrelevant.
    let e = |k1: u8, k2: u8| it_expected(game, &ItStrategy::pure(k1, 0), &ItStrategy::pure(k2, 0));
    let (e00, e01, e10, e11) = (e(0, 0), e(0, 1), e(1, 0), e(1, 1));
    let player1 = PdPattern {
        r: e00.get(1, 1),
        s: e01.get(1, 1),
        t: e10.get(1, 1),
        p: e11.get(1, 1),
    };
    let player2 = PdPattern {
        r: e00.get(2, 1),
        s: e10.get(2, 1),
        t: e01.get(2, 1),
        p: e11.get(2, 1),
    };
    Stage1Pattern {
        player1,
        player2,
        pd_consistent: player1.is_pd() && player2.is_pd(),
    }
}

/// Outcome of checking that stage-1 cooperation never survives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoCooperationVerdict {
    pub pattern: Stage1Pattern,
    /// `gaps_player1[k3][c]`: payoff of `(σ1, σ_k3)` minus `(σ0, σ_k3)` for
    /// player 1 against opponent pure strategy `c`.
    pub gaps_player1: [[f64; 4]; 2],
    /// Same for player 2 with the roles exchanged.
    pub gaps_player2: [[f64; 4]; 2],
    /// `T' - R'` and `P' - S'` of player 1.
    pub expected_gaps_player1: [f64; 2],
    pub expected_gaps_player2: [f64; 2],
    /// Every gap is positive and matches the closed form within `tol`.
    pub gaps_match: bool,
    /// Pure Nash equilibria of the 4×4 table as `(row, col)`.
    pub pure_ne: Vec<(usize, usize)>,
    /// Whether some pure equilibrium has a player choosing `σ0` at stage 1.
    pub cooperative_ne_found: bool,
    pub tol: f64,
}

impl NoCooperationVerdict {
    pub fn holds(&self) -> bool {
        self.gaps_match && !self.cooperative_ne_found
    }
}

/// Verifies by enumeration that flipping the stage-1 qubit strictly
/// dominates not flipping it, with gaps `T'-R'` against an opponent who
/// plays `σ0` at stage 1 and `P'-S'` otherwise, and that no pure
/// equilibrium has stage-1 `σ0`.
pub fn it_no_cooperation_check(game: &ItGame, tol: f64) -> Result<NoCooperationVerdict> {
    let pattern = it_stage1_pattern(game);
    if !pattern.pd_consistent {
        return Err(Error::PatternNotPd);
    }
    let bm = it_pure_bimatrix(game);
    let expected1 = [pattern.player1.t - pattern.player1.r, pattern.player1.p - pattern.player1.s];
    let expected2 = [pattern.player2.t - pattern.player2.r, pattern.player2.p - pattern.player2.s];

    let mut gaps_player1 = [[0.0; 4]; 2];
    let mut gaps_player2 = [[0.0; 4]; 2];
    let mut gaps_match = true;
    for k in 0..2 {
        let (coop, defect) = (k, 2 + k);
        for opp in 0..4 {
            let opp_stage1 = opp >> 1;
            let g1 = bm.payoff(1, defect, opp) - bm.payoff(1, coop, opp);
            let g2 = bm.payoff(2, opp, defect) - bm.payoff(2, opp, coop);
            gaps_player1[k][opp] = g1;
            gaps_player2[k][opp] = g2;
            gaps_match &= g1 > 0.0 && (g1 - expected1[opp_stage1]).abs() <= tol;
            gaps_match &= g2 > 0.0 && (g2 - expected2[opp_stage1]).abs() <= tol;
        }
    }

    let pure_ne: Vec<(usize, usize)> = pure_nash(&bm, DEFAULT_TOL)?
        .equilibria
        .iter()
        .map(|eq| (eq.row, eq.col))
        .collect();
    let cooperative_ne_found = pure_ne.iter().any(|(r, c)| r >> 1 == 0 || c >> 1 == 0);

    Ok(NoCooperationVerdict {
        pattern,
        gaps_player1,
        gaps_player2,
        expected_gaps_player1: expected1,
        expected_gaps_player2: expected2,
        gaps_match,
        pure_ne,
        cooperative_ne_found,
        tol,
    })
}
