//! Pure equilibria of bimatrix games and backward induction for the
//! ten-qubit protocol on pair-product states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mw::{two_term_pair, MwGame};
use crate::qstate::FlipLayer;
use crate::repeated10::{pair_factors, RepGame};
use crate::stagegames::{Bimatrix, Payoff, RepStrategy, StageGame};

/// Absolute tolerance on payoff comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Nash,
    SubgamePerfect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub row: usize,
    pub col: usize,
    pub row_label: String,
    pub col_label: String,
    pub payoff: Payoff,
    /// Every unilateral deviation loses strictly.
    pub strict: bool,
    /// Another listed equilibrium gives both players at least as much and
    /// one of them strictly more.
    pub payoff_dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub tolerance: f64,
    pub equilibria: Vec<Equilibrium>,
}

impl EquilibriumReport {
    fn new(kind: EquilibriumKind, tolerance: f64, mut equilibria: Vec<Equilibrium>) -> Self {
        equilibria.sort_by_key(|e| (e.row, e.col));
        equilibria.dedup_by_key(|e| (e.row, e.col));
        let payoffs: Vec<Payoff> = equilibria.iter().map(|e| e.payoff).collect();
        for e in &mut equilibria {
            e.payoff_dominated = payoffs.iter().any(|p| {
                p.0 >= e.payoff.0 - tolerance
                    && p.1 >= e.payoff.1 - tolerance
                    && (p.0 > e.payoff.0 + tolerance || p.1 > e.payoff.1 + tolerance)
            });
        }
        Self {
            kind,
            tolerance,
            equilibria,
        }
    }

    pub fn len(&self) -> usize {
        self.equilibria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }

    pub fn profiles(&self) -> Vec<(usize, usize)> {
        self.equilibria.iter().map(|e| (e.row, e.col)).collect()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.equilibria.iter().any(|e| e.row == row && e.col == col)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// All pure profiles where neither player gains more than `tol` by deviating.
pub fn pure_nash(bm: &Bimatrix, tol: f64) -> Result<EquilibriumReport> {
    if bm.rows() == 0 || bm.cols() == 0 {
        return Err(Error::EmptyBimatrix);
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {tol}")));
    }
    let mut found = Vec::new();
    for r in 0..bm.rows() {
        for c in 0..bm.cols() {
            let (u1, u2) = bm.get(r, c);
            let mut is_ne = true;
            let mut strict = true;
            for r2 in (0..bm.rows()).filter(|r2| *r2 != r) {
                let alt = bm.payoff(1, r2, c);
                is_ne &= alt <= u1 + tol;
                strict &= alt < u1;
            }
            for c2 in (0..bm.cols()).filter(|c2| *c2 != c) {
                let alt = bm.payoff(2, r, c2);
                is_ne &= alt <= u2 + tol;
                strict &= alt < u2;
            }
            if is_ne {
                found.push(Equilibrium {
                    row: r,
                    col: c,
                    row_label: bm.row_labels()[r].clone(),
                    col_label: bm.col_labels()[c].clone(),
                    payoff: (u1, u2),
                    strict,
                    payoff_dominated: false,
                });
            }
        }
    }
    Ok(EquilibriumReport::new(EquilibriumKind::Nash, tol, found))
}

/// Pairs `(a, b)` where `player`'s strategy `b` beats `a` against every
/// opponent strategy.
pub fn strictly_dominated(bm: &Bimatrix, player: usize) -> Vec<(usize, usize)> {
    let (own, other) = if player == 1 {
        (bm.rows(), bm.cols())
    } else {
        (bm.cols(), bm.rows())
    };
    let payoff = |mine: usize, theirs: usize| {
        if player == 1 {
            bm.payoff(1, mine, theirs)
        } else {
            bm.payoff(2, theirs, mine)
        }
    };
    let mut out = Vec::new();
    for a in 0..own {
        for b in (0..own).filter(|b| *b != a) {
            if other > 0 && (0..other).all(|o| payoff(b, o) > payoff(a, o)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Subgame-perfect equilibria by backward induction, for initial states that
/// factor over the five qubit pairs.
///
/// Each stage-1 outcome `ι` leads to a one-shot MW game on the contingency
/// pair of `ι`. Every combination of pure equilibria of those four games
/// fixes continuation values, which turn stage 1 into a 2×2 game whose
/// payoffs average `O_ι + V_ι` over the measurement distribution.
pub fn spe_pair_product(game: &RepGame, tol: f64) -> Result<EquilibriumReport> {
    let factors = pair_factors(game.initial()).ok_or_else(|| {
        Error::UnsupportedState("SPE undefined for cross-pair entanglement".into())
    })?;
    let stage = game.stage();

    let mut subgame_ne = Vec::with_capacity(4);
    for outcome in 0..4usize {
        let mw = MwGame::new(factors[outcome + 1].clone(), stage.clone())?;
        let report = pure_nash(&mw.bimatrix(), tol)?;
        if report.is_empty() {
            return Err(Error::NoPureEquilibrium {
                outcome: format!("{outcome:02b}"),
            });
        }
        subgame_ne.push(report.equilibria);
    }

    // p(ι | κ1, κ2) for the first pair
    let mut dist = [[[0.0; 4]; 2]; 2];
    for k1 in 0..2u8 {
        for k2 in 0..2u8 {
            let layer = FlipLayer::from_pairs([(1, k1), (2, k2)])?;
            let flipped = factors[0].apply_flips(&layer)?;
            for (outcome, p) in dist[k1 as usize][k2 as usize].iter_mut().enumerate() {
                *p = flipped.probability(outcome);
            }
        }
    }

    let mut found = Vec::new();
    let counts: Vec<usize> = subgame_ne.iter().map(Vec::len).collect();
    let total: usize = counts.iter().product();
    for mut selection in 0..total {
        let chosen: Vec<&Equilibrium> = (0..4)
            .map(|o| {
                let pick = selection % counts[o];
                selection /= counts[o];
                &subgame_ne[o][pick]
            })
            .collect();

        let induced = Bimatrix::from_fn(2, 2, |k1, k2| {
            (0..4).fold((0.0, 0.0), |acc, o| {
                let p = dist[k1][k2][o];
                let first = stage.outcome_by_index(o);
                let cont = chosen[o].payoff;
                (acc.0 + p * (first.0 + cont.0), acc.1 + p * (first.1 + cont.1))
            })
        });
        let stage1 = pure_nash(&induced, tol)?;
        let continuation_strict = chosen.iter().all(|e| e.strict);
        for eq in &stage1.equilibria {
            let after1 = [0, 1, 2, 3].map(|o| chosen[o].row as u8);
            let after2 = [0, 1, 2, 3].map(|o| chosen[o].col as u8);
            let s1 = RepStrategy::new(eq.row as u8, after1)?;
            let s2 = RepStrategy::new(eq.col as u8, after2)?;
            found.push(Equilibrium {
                row: s1.index(),
                col: s2.index(),
                row_label: s1.to_string(),
                col_label: s2.to_string(),
                payoff: eq.payoff,
                strict: eq.strict && continuation_strict,
                payoff_dominated: false,
            });
        }
    }
    Ok(EquilibriumReport::new(EquilibriumKind::SubgamePerfect, tol, found))
}

/// `min{T-R, P-S} / (T-R+P-S)`: below this `|λ0|²` the MW game on
/// `λ0|00> + λ1|11>` has mutual `σ0` as its unique equilibrium.
pub fn cooperation_bound(stage: &StageGame) -> Result<f64> {
    let pd = stage.pd_payoffs().filter(|p| p.is_pd()).ok_or(Error::NotPrisonersDilemma)?;
    let (a, b) = (pd.t - pd.r, pd.p - pd.s);
    Ok(a.min(b) / (a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSample {
    /// `|λ0|²`.
    pub x: f64,
    /// Mutual `σ0` is the only pure equilibrium and it is strict.
    pub unique_ne: bool,
    /// Per-stage payoff of mutual `σ0`, `xR + (1-x)P`.
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CooperationAnalysis {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub closed_form_bound: f64,
    /// Largest grid point at which mutual `σ0` is the unique equilibrium.
    pub empirical_bound: f64,
    pub grid_step: f64,
    /// `|closed_form_bound - empirical_bound| <= grid_step`.
    pub agrees: bool,
    /// The qualifying grid points form a prefix of the grid.
    pub contiguous: bool,
    /// `Q > P` at every qualifying grid point.
    pub q_exceeds_p: bool,
    pub samples: Vec<ScanSample>,
}

impl CooperationAnalysis {
    pub fn holds(&self) -> bool {
        self.agrees && self.contiguous && self.q_exceeds_p
    }

    /// Columns `x, unique_ne_flag, Q`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "unique_ne_flag", "Q"])?;
        for s in &self.samples {
            w.write_record([s.x.to_string(), u8::from(s.unique_ne).to_string(), s.q.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Whether mutual `σ0` is the unique, strict pure equilibrium of the MW game
/// on `√x|00> + √(1-x)|11>`, together with its payoff to player 1.
pub fn mutual_identity_unique(stage: &StageGame, x: f64) -> Result<(bool, f64)> {
    let bm = MwGame::new(two_term_pair(x)?, stage.clone())?.bimatrix();
    let ne = pure_nash(&bm, 0.0)?;
    let unique = ne.len() == 1 && ne.contains(0, 0) && ne.equilibria[0].strict;
    Ok((unique, bm.payoff(1, 0, 0)))
}

/// Grid scan of `x = |λ0|²` over the open interval `(0, 1)`.
pub fn cooperation_scan(stage: &StageGame, grid_step: f64) -> Result<CooperationAnalysis> {
    let closed_form_bound = cooperation_bound(stage)?;
    if !(grid_step > 0.0 && grid_step < 0.5) {
        return Err(Error::InvalidArgument(format!("grid step {grid_step} outside (0, 0.5)")));
    }
    let pd = stage.pd_payoffs().expect("checked by cooperation_bound");

    let mut samples = Vec::new();
    for k in 1.. {
        let x = k as f64 * grid_step;
        if x >= 1.0 - 1e-12 {
            break;
        }
        let (unique_ne, q) = mutual_identity_unique(stage, x)?;
        samples.push(ScanSample { x, unique_ne, q });
    }

    let empirical_bound = samples.iter().filter(|s| s.unique_ne).map(|s| s.x).fold(0.0, f64::max);
    let prefix = samples.iter().take_while(|s| s.unique_ne).count();
    let contiguous = samples.iter().filter(|s| s.unique_ne).count() == prefix;
    let q_exceeds_p = samples.iter().filter(|s| s.unique_ne).all(|s| s.q > pd.p);

    Ok(CooperationAnalysis {
        t: pd.t,
        r: pd.r,
        p: pd.p,
        s: pd.s,
        closed_form_bound,
        empirical_bound,
        grid_step,
        agrees: (closed_form_bound - empirical_bound).abs() <= grid_step,
        contiguous,
        q_exceeds_p,
        samples,
    })
}
