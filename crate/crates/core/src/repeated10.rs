//! Ten-qubit protocol for a twice-repeated 2×2 game.
//!
//! Odd qubits belong to player 1 and even qubits to player 2. Qubits 1–2
//! carry the stage-1 moves; after stage-1 outcome `ι = (ι1 ι2)_2` the
//! stage-2 moves live on qubits `2ι+3` (player 1) and `2ι+4` (player 2).
//! A pure strategy is therefore a [`RepStrategy`] of five flip choices.
//!
//! Payoffs come from diagonal observables: `X1` reads qubits 1–2 and
//! `X2.ι` reads the contingency pair of `ι`, restricted to the branch where
//! qubits 1–2 equal `ι`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{expectation, DiagonalObservable, Ensemble, FlipLayer, PureState, PRUNE_TOL};
use crate::stagegames::{rep_strategy_labels, Bimatrix, RepStrategy, StageGame, StagePayoffs};

pub const NUM_QUBITS: usize = 10;
const STAGE1_SHIFT: usize = 8;

/// Qubits `(2ι+3, 2ι+4)` that hold the stage-2 moves after outcome `ι`.
pub fn contingency_pair(outcome: usize) -> (usize, usize) {
    (2 * outcome + 3, 2 * outcome + 4)
}

/// Bit shift of the contingency pair of `ι` inside a basis index.
fn contingency_shift(outcome: usize) -> usize {
    NUM_QUBITS - contingency_pair(outcome).1
}

/// Flip layer of a player's strategy: player 1 on qubits 1,3,5,7,9 and
/// player 2 on qubits 2,4,6,8,10, in the order stage 1, after 00, 01, 10, 11.
pub fn strategy_qubit_map(player: usize, strategy: &RepStrategy) -> Result<FlipLayer> {
    if player != 1 && player != 2 {
        return Err(Error::InvalidArgument(format!("player must be 1 or 2, got {player}")));
    }
    let choices = std::iter::once(strategy.stage1).chain(strategy.after);
    FlipLayer::from_pairs((0..5).map(|k| player + 2 * k).zip(choices))
}

fn pick(payoff: (f64, f64), player: usize) -> f64 {
    if player == 1 {
        payoff.0
    } else {
        payoff.1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepGame {
    initial: PureState,
    stage: StageGame,
    /// `[player-1][0]` is `X1`, `[player-1][1]` is `Σ_ι X2.ι`.
    observables: [[DiagonalObservable; 2]; 2],
}

impl RepGame {
    pub fn new(initial: PureState, stage: StageGame) -> Result<Self> {
        if initial.num_qubits() != NUM_QUBITS {
            return Err(Error::DimensionMismatch(format!(
                "repeated game needs a 10-qubit state, got {} qubits",
                initial.num_qubits()
            )));
        }
        let observables = [1, 2].map(|player| {
            [
                stage1_observable(&stage, player),
                stage2_observable(&stage, player, None),
            ]
        });
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

    /// `stage = 1` gives `X1`, `stage = 2` gives `Σ_ι X2.ι`.
    pub fn observable(&self, player: usize, stage: usize) -> &DiagonalObservable {
        &self.observables[player - 1][stage - 1]
    }

    pub fn evaluate(&self, ensemble: &Ensemble) -> StagePayoffs {
        let mut out = StagePayoffs::default();
        for player in 1..=2 {
            for stage in 1..=2 {
                out.e[player - 1][stage - 1] =
                    expectation(ensemble, self.observable(player, stage)).expect("10 qubits");
            }
        }
        out
    }

    fn evaluate_pure(&self, state: &PureState) -> StagePayoffs {
        let mut out = StagePayoffs::default();
        for player in 1..=2 {
            for stage in 1..=2 {
                out.e[player - 1][stage - 1] =
                    self.observable(player, stage).expectation_pure(state).expect("10 qubits");
            }
        }
        out
    }
}

/// `X1 = Σ O_{x1x2}[player] |x1x2><x1x2| ⊗ 1`.
pub fn stage1_observable(stage: &StageGame, player: usize) -> DiagonalObservable {
    DiagonalObservable::from_fn(NUM_QUBITS, |x| pick(stage.outcome_by_index(x >> STAGE1_SHIFT), player))
        .expect("10 qubits")
}

/// `X2.ι` for one outcome, or the sum over all four when `outcome` is `None`.
pub fn stage2_observable(stage: &StageGame, player: usize, outcome: Option<usize>) -> DiagonalObservable {
    DiagonalObservable::from_fn(NUM_QUBITS, |x| {
        let iota = x >> STAGE1_SHIFT;
        if outcome.is_some_and(|o| o != iota) {
            return 0.0;
        }
        let pair = (x >> contingency_shift(iota)) & 0b11;
        pick(stage.outcome_by_index(pair), player)
    })
    .expect("10 qubits")
}

/// Final state of a pure profile with all ten flips applied at once.
pub fn final_state(game: &RepGame, s1: &RepStrategy, s2: &RepStrategy) -> PureState {
    let layer = strategy_qubit_map(1, s1)
        .expect("player 1")
        .merged(&strategy_qubit_map(2, s2).expect("player 2"));
    game.initial.apply_flips(&layer).expect("10-qubit layer")
}

/// Expected payoffs `E_{i.1}`, `E_{i.2}` of a pure profile, batch form.
pub fn play_batch(game: &RepGame, s1: &RepStrategy, s2: &RepStrategy) -> StagePayoffs {
    game.evaluate_pure(&final_state(game, s1, s2))
}

/// One measurement branch of the sequential procedure. All four branches
/// are always present; those at or below the pruning threshold are marked
/// unreachable and carry no state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub outcome: (u8, u8),
    pub probability: f64,
    pub reachable: bool,
    /// Stage-2 flip choices of players 1 and 2 in this branch.
    pub stage2_choices: (u8, u8),
    /// Qubits acted on in this branch.
    pub qubits: (usize, usize),
    /// Post-measurement state after the stage-2 flips.
    #[serde(skip)]
    pub final_state: Option<PureState>,
    /// Probability-weighted share of the expected payoffs.
    pub contributions: StagePayoffs,
}

impl Branch {
    pub fn outcome_index(&self) -> usize {
        (self.outcome.0 as usize) << 1 | self.outcome.1 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayTranscript {
    pub stage1_choices: (u8, u8),
    pub branches: Vec<Branch>,
    pub payoffs: StagePayoffs,
}

impl PlayTranscript {
    /// Reachable outcomes with their probabilities.
    pub fn outcome_distribution(&self) -> Vec<((u8, u8), f64)> {
        self.branches
            .iter()
            .filter(|b| b.reachable)
            .map(|b| (b.outcome, b.probability))
            .collect()
    }

    /// The ensemble `{p(ι), σσ|ψ_ι>}` over reachable branches.
    pub fn ensemble(&self) -> Ensemble {
        let members = self
            .branches
            .iter()
            .filter_map(|b| b.final_state.clone().map(|s| (b.probability, s)))
            .collect::<Vec<_>>();
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        Ensemble::new(members.into_iter().map(|(p, s)| (p / total, s)).collect())
            .expect("measurement probabilities sum to one")
    }
}

/// Sequential procedure: stage-1 flips on qubits 1–2, projective measurement
/// of qubits 1–2, then for each observed outcome `ι` the stage-2 flips on the
/// contingency pair of `ι`.
pub fn play_sequential(game: &RepGame, s1: &RepStrategy, s2: &RepStrategy) -> PlayTranscript {
    let stage1 = FlipLayer::from_pairs([(1, s1.stage1), (2, s2.stage1)]).expect("bits");
    let psi = game.initial.apply_flips(&stage1).expect("10 qubits");
    let measured = psi.measure_pair(1, 2).expect("qubits 1 and 2");

    let mut branches = Vec::with_capacity(4);
    for iota in 0..4usize {
        let outcome = ((iota >> 1) as u8, (iota & 1) as u8);
        let qubits = contingency_pair(iota);
        let stage2_choices = (s1.after_outcome(iota), s2.after_outcome(iota));
        let hit = measured.iter().find(|m| m.index() == iota);
        let (probability, final_state, contributions) = match hit {
            Some(m) => {
                let layer = FlipLayer::from_pairs([(qubits.0, stage2_choices.0), (qubits.1, stage2_choices.1)])
                    .expect("bits");
                let fin = m.post_state.apply_flips(&layer).expect("10 qubits");
                let mut contrib = game.evaluate_pure(&fin);
                for row in &mut contrib.e {
                    for v in row {
                        *v *= m.probability;
                    }
                }
                (m.probability, Some(fin), contrib)
            }
            None => (0.0, None, StagePayoffs::default()),
        };
        branches.push(Branch {
            outcome,
            probability,
            reachable: final_state.is_some(),
            stage2_choices,
            qubits,
            final_state,
            contributions,
        });
    }

    let mut transcript = PlayTranscript {
        stage1_choices: (s1.stage1, s2.stage1),
        branches,
        payoffs: StagePayoffs::default(),
    };
    transcript.payoffs = game.evaluate(&transcript.ensemble());
    transcript
}

/// A finite mixture of pure repeated-game strategies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedRepStrategy {
    support: Vec<(f64, RepStrategy)>,
}

impl MixedRepStrategy {
    pub fn new(support: Vec<(f64, RepStrategy)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidProbabilities("empty support".into()));
        }
        if support.iter().any(|(p, _)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidProbabilities("weight outside [0, 1]".into()));
        }
        let total: f64 = support.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!("weights sum to {total}")));
        }
        Ok(Self { support })
    }

    pub fn pure(strategy: RepStrategy) -> Self {
        Self {
            support: vec![(1.0, strategy)],
        }
    }

    pub fn support(&self) -> &[(f64, RepStrategy)] {
        &self.support
    }
}

/// Mixed profile payoffs as the convex combination of pure batch payoffs.
pub fn play_mixed(game: &RepGame, m1: &MixedRepStrategy, m2: &MixedRepStrategy) -> StagePayoffs {
    let mut out = StagePayoffs::default();
    for (p, s1) in m1.support() {
        for (q, s2) in m2.support() {
            let e = play_batch(game, s1, s2);
            for player in 0..2 {
                for stage in 0..2 {
                    out.e[player][stage] += p * q * e.e[player][stage];
                }
            }
        }
    }
    out
}

/// Mixed profile payoffs from the single ensemble
/// `{p_t q_t' p(ι), σσ|ψ_ι^{t,t'}>}` produced by the sequential procedure.
pub fn play_mixed_sequential(game: &RepGame, m1: &MixedRepStrategy, m2: &MixedRepStrategy) -> StagePayoffs {
    let mut members = Vec::new();
    for (p, s1) in m1.support() {
        for (q, s2) in m2.support() {
            if p * q == 0.0 {
                continue;
            }
            let t = play_sequential(game, s1, s2);
            for (w, state) in t.ensemble().members() {
                members.push((p * q * w, state.clone()));
            }
        }
    }
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    let members = members.into_iter().map(|(w, s)| (w / total, s)).collect();
    game.evaluate(&Ensemble::new(members).expect("product weights"))
}

/// 32×32 table of total payoffs `(E1.1 + E1.2, E2.1 + E2.2)`.
pub fn rep_bimatrix(game: &RepGame) -> Bimatrix {
    Bimatrix::from_fn(RepStrategy::COUNT, RepStrategy::COUNT, |r, c| {
        let s1 = RepStrategy::from_index(r).expect("r < 32");
        let s2 = RepStrategy::from_index(c).expect("c < 32");
        let e = play_batch(game, &s1, &s2);
        (e.total(1), e.total(2))
    })
    .with_labels(rep_strategy_labels(), rep_strategy_labels())
}

/// Initial-state families with a well-defined extensive form.
#[derive(Clone, Debug, PartialEq)]
pub enum StateFamily {
    /// Product of five two-qubit states on pairs (1,2), (3,4), ..., (9,10).
    PairProduct(Vec<PureState>),
    /// `λ0 |0...0> + λ1 |1...1>` with both amplitudes nonzero.
    TwoTerm { lambda0: Complex64, lambda1: Complex64 },
    General,
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::PairProduct(_) => "pair-product",
            StateFamily::TwoTerm { .. } => "two-term",
            StateFamily::General => "general",
        }
    }
}

pub fn classify_state(state: &PureState) -> StateFamily {
    if let Some(factors) = pair_factors(state) {
        return StateFamily::PairProduct(factors);
    }
    let last = state.dim() - 1;
    let off_support = state
        .amplitudes()
        .iter()
        .enumerate()
        .all(|(x, a)| x == 0 || x == last || a.norm_sqr() <= PRUNE_TOL);
    if state.num_qubits() == NUM_QUBITS && off_support {
        return StateFamily::TwoTerm {
            lambda0: state.amplitude(0),
            lambda1: state.amplitude(last),
        };
    }
    StateFamily::General
}

/// Splits an even-sized register into its consecutive qubit pairs if it is
/// a product across them (fidelity within 1e-9). Global phase goes to the
/// first factor.
pub fn pair_factors(state: &PureState) -> Option<Vec<PureState>> {
    let n = state.num_qubits();
    if !n.is_multiple_of(2) {
        return None;
    }
    let pairs = n / 2;
    let amps = state.amplitudes();
    let peak = (0..amps.len()).max_by(|a, b| amps[*a].norm_sqr().total_cmp(&amps[*b].norm_sqr()))?;

    let mut factors = Vec::with_capacity(pairs);
    for j in 0..pairs {
        let shift = n - 2 * (j + 1);
        let column: Vec<Complex64> = (0..4)
            .map(|v| amps[(peak & !(0b11 << shift)) | (v << shift)])
            .collect();
        factors.push(PureState::normalized(2, column).ok()?);
    }

    let mut product = factors[0].clone();
    for f in &factors[1..] {
        product = product.tensor(f).ok()?;
    }
    let overlap: Complex64 = product
        .amplitudes()
        .iter()
        .zip(amps)
        .map(|(p, a)| p.conj() * a)
        .sum();
    if (1.0 - overlap.norm_sqr()).abs() > 1e-9 {
        return None;
    }
    let phase = overlap / overlap.norm();
    let first = factors[0].amplitudes().iter().map(|a| a * phase).collect();
    factors[0] = PureState::with_tolerance(2, first, 1e-9).ok()?;
    Some(factors)
}

/// `|φ1> ⊗ ... ⊗ |φ5>` from five two-qubit states.
pub fn pair_product_state(pairs: &[PureState]) -> Result<PureState> {
    if pairs.len() != 5 || pairs.iter().any(|p| p.num_qubits() != 2) {
        return Err(Error::InvalidArgument("pair-product state needs five 2-qubit factors".into()));
    }
    pairs[1..].iter().try_fold(pairs[0].clone(), |acc, p| acc.tensor(p))
}

/// `λ0 |0>^⊗10 + λ1 |1>^⊗10` with real amplitudes and `|λ0|² = l0_sq`.
pub fn two_term_state(l0_sq: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&l0_sq) {
        return Err(Error::InvalidArgument(format!("|λ0|² = {l0_sq} outside [0, 1]")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << NUM_QUBITS];
    amps[0] = Complex64::new(l0_sq.sqrt(), 0.0);
    amps[(1 << NUM_QUBITS) - 1] = Complex64::new((1.0 - l0_sq).sqrt(), 0.0);
    PureState::new(NUM_QUBITS, amps)
}

/// `|00> (√0.6 |00> + √0.4 |11>) |0>^⊗6`.
pub fn example_cooperation_state() -> PureState {
    let zero = PureState::from_bits("00").expect("2 qubits");
    let entangled = crate::mw::two_term_pair(0.6).expect("0.6 in range");
    pair_product_state(&[zero.clone(), entangled, zero.clone(), zero.clone(), zero]).expect("five pairs")
}
