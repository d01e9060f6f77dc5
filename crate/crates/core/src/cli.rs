//! Commands behind the `qrepgame` binary. Each returns a serializable report;
//! the binary decides where it goes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{GameSetup, Protocol};
use crate::equilibria::{cooperation_scan, pure_nash, spe_pair_product, strictly_dominated, CooperationAnalysis, EquilibriumReport};
use crate::error::{Error, Result};
use crate::extensive::{build_extensive, ExtensiveTree};
use crate::iqbaltoor::{it_expected, it_expected_batch, it_no_cooperation_check, it_pure_bimatrix, ItGame, ItStrategy, NoCooperationVerdict};
use crate::qstate::PureState;
use crate::repeated10::{play_batch, play_sequential, rep_bimatrix, RepGame};
use crate::stagegames::{classical_twice_repeated, Bimatrix, RepStrategy, StageGame};

/// Batch and sequential payoffs may differ by at most this much.
pub const COMPARE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn initial(setup: &GameSetup) -> Result<PureState> {
    setup
        .initial
        .clone()
        .ok_or_else(|| Error::Config(format!("protocol {} has no initial state", setup.protocol.name())))
}

fn rep_game(setup: &GameSetup) -> Result<RepGame> {
    match setup.protocol {
        Protocol::Mw10 => RepGame::new(initial(setup)?, setup.stage.clone()),
        Protocol::Classical => RepGame::new(PureState::basis(10, 0)?, setup.stage.clone()),
        Protocol::IqbalToor => Err(Error::UnsupportedState(
            "this command needs the mw10 or classical protocol".into(),
        )),
    }
}

/// Full pure-strategy table of total payoffs.
pub fn protocol_bimatrix(setup: &GameSetup) -> Result<Bimatrix> {
    match setup.protocol {
        Protocol::Mw10 => Ok(rep_bimatrix(&rep_game(setup)?)),
        Protocol::Classical => Ok(classical_twice_repeated(&setup.stage)),
        Protocol::IqbalToor => Ok(it_pure_bimatrix(&ItGame::new(initial(setup)?, setup.stage.clone())?)),
    }
}

pub fn cmd_bimatrix(setup: &GameSetup, format: OutputFormat) -> Result<String> {
    let bm = protocol_bimatrix(setup)?;
    match format {
        OutputFormat::Csv => bm.to_csv_string(),
        OutputFormat::Json => bm.to_json_string(),
    }
}

pub fn cmd_nash(setup: &GameSetup, tol: f64) -> Result<EquilibriumReport> {
    pure_nash(&protocol_bimatrix(setup)?, tol)
}

pub fn cmd_spe(setup: &GameSetup, tol: f64) -> Result<EquilibriumReport> {
    spe_pair_product(&rep_game(setup)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domination {
    pub dominated: String,
    pub dominating: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub protocol: Protocol,
    pub player1: Vec<Domination>,
    pub player2: Vec<Domination>,
    /// Stage-1 analysis, iqbal-toor only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_cooperation: Option<NoCooperationVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn cmd_dominance(setup: &GameSetup, tol: f64) -> Result<DominanceReport> {
    let bm = protocol_bimatrix(setup)?;
    let named = |player: usize| {
        let labels = if player == 1 { bm.row_labels() } else { bm.col_labels() };
        strictly_dominated(&bm, player)
            .into_iter()
            .map(|(a, b)| Domination {
                dominated: labels[a].clone(),
                dominating: labels[b].clone(),
            })
            .collect()
    };
    let (no_cooperation, note) = match setup.protocol {
        Protocol::IqbalToor => {
            let game = ItGame::new(initial(setup)?, setup.stage.clone())?;
            match it_no_cooperation_check(&game, tol) {
                Ok(v) => (Some(v), None),
                Err(Error::PatternNotPd) => (None, Some("stage-1 payoffs do not form a prisoners' dilemma".into())),
                Err(e) => return Err(e),
            }
        }
        _ => (None, None),
    };
    Ok(DominanceReport {
        protocol: setup.protocol,
        player1: named(1),
        player2: named(2),
        no_cooperation,
        note,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub protocol: Protocol,
    pub samples: usize,
    pub seed: u64,
    pub profiles_per_sample: usize,
    /// Largest `|E_batch - E_sequential|` over every payoff component.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Batch against sequential evaluation on `samples` seeded random states,
/// over every pure profile.
pub fn cmd_compare_protocols(protocol: Protocol, stage: &StageGame, samples: usize, seed: u64) -> Result<ComparisonReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    let profiles_per_sample = match protocol {
        Protocol::Mw10 => {
            let strategies: Vec<RepStrategy> = RepStrategy::all().collect();
            for _ in 0..samples {
                let game = RepGame::new(PureState::random(10, &mut rng)?, stage.clone())?;
                for s1 in &strategies {
                    for s2 in &strategies {
                        let batch = play_batch(&game, s1, s2);
                        let seq = play_sequential(&game, s1, s2).payoffs;
                        max_deviation = max_deviation.max(batch.max_abs_diff(&seq));
                    }
                }
            }
            strategies.len() * strategies.len()
        }
        Protocol::IqbalToor => {
            for _ in 0..samples {
                let game = ItGame::new(PureState::random(4, &mut rng)?, stage.clone())?;
                for r in 0..4 {
                    for c in 0..4 {
                        let (a, b) = (ItStrategy::pure_from_index(r), ItStrategy::pure_from_index(c));
                        let (k1, k3) = a.pure_choices().expect("pure");
                        let (k2, k4) = b.pure_choices().expect("pure");
                        let seq = it_expected(&game, &a, &b);
                        let batch = it_expected_batch(&game, [k1, k2, k3, k4])?;
                        max_deviation = max_deviation.max(batch.max_abs_diff(&seq));
                    }
                }
            }
            16
        }
        Protocol::Classical => {
            return Err(Error::Config("compare needs the mw10 or iqbal-toor protocol".into()));
        }
    };
    Ok(ComparisonReport {
        protocol,
        samples,
        seed,
        profiles_per_sample,
        max_deviation,
        tolerance: COMPARE_TOL,
        passed: max_deviation <= COMPARE_TOL,
    })
}

pub fn cmd_scan(stage: &StageGame, grid_step: f64) -> Result<CooperationAnalysis> {
    cooperation_scan(stage, grid_step)
}

pub fn cmd_tree(setup: &GameSetup) -> Result<ExtensiveTree> {
    build_extensive(&rep_game(setup)?)
}
