//! 2×2 stage games, twice-repeated pure strategies and the classical
//! twice-repeated normal form.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Payoff pair `(u1, u2)`.
pub type Payoff = (f64, f64);

/// Expected payoffs `E[player-1][stage-1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StagePayoffs {
    pub e: [[f64; 2]; 2],
}

impl StagePayoffs {
    pub fn get(&self, player: usize, stage: usize) -> f64 {
        self.e[player - 1][stage - 1]
    }

    pub fn total(&self, player: usize) -> f64 {
        self.e[player - 1][0] + self.e[player - 1][1]
    }

    pub fn max_abs_diff(&self, other: &StagePayoffs) -> f64 {
        self.e
            .iter()
            .flatten()
            .zip(other.e.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// PD payoffs in the usual `T, R, P, S` naming.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdPayoffs {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

impl PdPayoffs {
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Self {
        Self { t, r, p, s }
    }

    /// `T > R > P > S` and `2R > T + S`, compared exactly.
    pub fn is_pd(&self) -> bool {
        self.t > self.r && self.r > self.p && self.p > self.s && 2.0 * self.r > self.t + self.s
    }
}

/// A 2×2 game given by its four outcomes `O[ι1][ι2] = (u1, u2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageGame {
    outcomes: [[Payoff; 2]; 2],
    #[serde(default = "default_labels")]
    labels: [[String; 2]; 2],
}

fn default_labels() -> [[String; 2]; 2] {
    [["0".into(), "1".into()], ["0".into(), "1".into()]]
}

impl StageGame {
    pub fn new(outcomes: [[Payoff; 2]; 2]) -> Result<Self> {
        if outcomes.iter().flatten().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("stage payoffs must be finite".into()));
        }
        Ok(Self {
            outcomes,
            labels: default_labels(),
        })
    }

    /// Action names, `labels[player - 1][action]`.
    pub fn with_labels(mut self, labels: [[String; 2]; 2]) -> Self {
        self.labels = labels;
        self
    }

    pub fn labels(&self) -> &[[String; 2]; 2] {
        &self.labels
    }

    pub fn outcomes(&self) -> &[[Payoff; 2]; 2] {
        &self.outcomes
    }

    pub fn outcome(&self, a1: u8, a2: u8) -> Payoff {
        self.outcomes[a1 as usize][a2 as usize]
    }

    /// Outcome addressed by `ι = (ι1 ι2)_2`.
    pub fn outcome_by_index(&self, index: usize) -> Payoff {
        self.outcomes[index >> 1][index & 1]
    }

    /// Payoff of `player` (1 or 2) at the given action pair.
    pub fn payoff(&self, player: usize, a1: u8, a2: u8) -> f64 {
        let (u1, u2) = self.outcome(a1, a2);
        if player == 1 {
            u1
        } else {
            u2
        }
    }

    /// Recovers `T, R, P, S` if the table has the symmetric PD layout
    /// `O00 = (R,R), O01 = (S,T), O10 = (T,S), O11 = (P,P)`.
    pub fn pd_payoffs(&self) -> Option<PdPayoffs> {
        let [[(r1, r2), (s, t)], [(t2, s2), (p1, p2)]] = self.outcomes;
        (r1 == r2 && p1 == p2 && s == s2 && t == t2).then_some(PdPayoffs { t, r: r1, p: p1, s })
    }

    pub fn is_pd(&self) -> bool {
        self.pd_payoffs().is_some_and(|pd| pd.is_pd())
    }

    /// `α > β > γ` in the layout `O00 = (α,β), O01 = O10 = (γ,γ), O11 = (β,α)`.
    pub fn is_bos(&self) -> bool {
        let [[(alpha, beta), (g1, g2)], [(g3, g4), (beta2, alpha2)]] = self.outcomes;
        let gamma = g1;
        [g2, g3, g4].iter().all(|g| *g == gamma)
            && beta == beta2
            && alpha == alpha2
            && alpha > beta
            && beta > gamma
    }

    pub fn min_payoff(&self) -> f64 {
        self.outcomes.iter().flatten().flat_map(|(a, b)| [*a, *b]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_payoff(&self) -> f64 {
        self.outcomes.iter().flatten().flat_map(|(a, b)| [*a, *b]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same game with both players' actions renamed `0 <-> 1`.
    pub fn relabeled(&self) -> StageGame {
        let o = &self.outcomes;
        StageGame {
            outcomes: [[o[1][1], o[1][0]], [o[0][1], o[0][0]]],
            labels: [
                [self.labels[0][1].clone(), self.labels[0][0].clone()],
                [self.labels[1][1].clone(), self.labels[1][0].clone()],
            ],
        }
    }

    /// The one-shot game as a 2×2 bimatrix.
    pub fn bimatrix(&self) -> Bimatrix {
        let cells = (0..4).map(|i| self.outcome_by_index(i)).collect();
        Bimatrix::new(2, 2, cells)
            .expect("2x2 table")
            .with_labels(self.labels[0].to_vec(), self.labels[1].to_vec())
    }
}

/// `O00=(R,R), O01=(S,T), O10=(T,S), O11=(P,P)`; action 0 is C, 1 is D.
pub fn make_pd(t: f64, r: f64, p: f64, s: f64) -> Result<StageGame> {
    Ok(StageGame::new([[(r, r), (s, t)], [(t, s), (p, p)]])?.with_labels([
        ["C".into(), "D".into()],
        ["C".into(), "D".into()],
    ]))
}

/// Battle of the Sexes; action 0 is O, 1 is F.
pub fn make_bos(alpha: f64, beta: f64, gamma: f64) -> Result<StageGame> {
    Ok(
        StageGame::new([[(alpha, beta), (gamma, gamma)], [(gamma, gamma), (beta, alpha)]])?
            .with_labels([["O".into(), "F".into()], ["O".into(), "F".into()]]),
    )
}

/// A pure strategy of the twice-repeated game: the stage-1 action and one
/// stage-2 action per stage-1 outcome `00, 01, 10, 11`.
///
/// Encoded as the 5-bit index `stage1·16 + after00·8 + after01·4 + after10·2 + after11`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RepStrategy {
    pub stage1: u8,
    pub after: [u8; 4],
}

impl RepStrategy {
    pub const COUNT: usize = 32;

    pub fn new(stage1: u8, after: [u8; 4]) -> Result<Self> {
        if let Some(bad) = std::iter::once(stage1).chain(after).find(|b| *b > 1) {
            return Err(Error::InvalidBit(bad));
        }
        Ok(Self { stage1, after })
    }

    /// The same action at every information set.
    pub fn constant(action: u8) -> Self {
        Self {
            stage1: action,
            after: [action; 4],
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= Self::COUNT {
            return Err(Error::InvalidArgument(format!("strategy index {index} >= 32")));
        }
        let bit = |k: usize| ((index >> k) & 1) as u8;
        Ok(Self {
            stage1: bit(4),
            after: [bit(3), bit(2), bit(1), bit(0)],
        })
    }

    pub fn index(&self) -> usize {
        (self.stage1 as usize) << 4
            | (self.after[0] as usize) << 3
            | (self.after[1] as usize) << 2
            | (self.after[2] as usize) << 1
            | self.after[3] as usize
    }

    /// Action taken at stage 2 after stage-1 outcome `ι`.
    pub fn after_outcome(&self, outcome: usize) -> u8 {
        self.after[outcome]
    }

    /// The same plan after renaming both players' actions `0 <-> 1`: every
    /// choice is complemented and contingency `ι` moves to `3 - ι`.
    pub fn relabeled(&self) -> Self {
        let a = self.after;
        Self {
            stage1: 1 - self.stage1,
            after: [1 - a[3], 1 - a[2], 1 - a[1], 1 - a[0]],
        }
    }

    pub fn all() -> impl Iterator<Item = RepStrategy> {
        (0..Self::COUNT).map(|i| Self::from_index(i).expect("index < 32"))
    }
}

impl fmt::Display for RepStrategy {
    /// Five bits, stage 1 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:05b}", self.index())
    }
}

/// Rectangular table of payoff pairs, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bimatrix {
    rows: usize,
    cols: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Payoff>,
}

impl Bimatrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<Payoff>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} bimatrix with {} cells",
                cells.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            row_labels: (0..rows).map(|r| r.to_string()).collect(),
            col_labels: (0..cols).map(|c| c.to_string()).collect(),
            cells,
        })
    }

    /// Builds the table from a cell function.
    pub fn from_fn<F: FnMut(usize, usize) -> Payoff>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(f(r, c));
            }
        }
        Self::new(rows, cols, cells).expect("sized by construction")
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        assert_eq!(row_labels.len(), self.rows);
        assert_eq!(col_labels.len(), self.cols);
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn cells(&self) -> &[Payoff] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Payoff {
        self.cells[row * self.cols + col]
    }

    /// Payoff of `player` (1 or 2).
    pub fn payoff(&self, player: usize, row: usize, col: usize) -> f64 {
        let (u1, u2) = self.get(row, col);
        if player == 1 {
            u1
        } else {
            u2
        }
    }

    /// Largest componentwise absolute difference to a same-shaped bimatrix.
    pub fn max_abs_diff(&self, other: &Bimatrix) -> Result<f64> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
            .fold(0.0, f64::max))
    }

    /// CSV with strategy labels as headers and cells written `u1;u2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header)?;
        for r in 0..self.rows {
            let mut record = vec![self.row_labels[r].clone()];
            record.extend((0..self.cols).map(|c| {
                let (u1, u2) = self.get(r, c);
                format!("{u1};{u2}")
            }));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Labels `00000` .. `11111` in index order.
pub fn rep_strategy_labels() -> Vec<String> {
    RepStrategy::all().map(|s| s.to_string()).collect()
}

/// Payoffs of the classical twice-repeated game: stage-1 outcome plus the
/// stage-2 outcome reached at the contingency the stage-1 outcome selects.
pub fn classical_play(stage: &StageGame, s1: &RepStrategy, s2: &RepStrategy) -> Payoff {
    let first = stage.outcome(s1.stage1, s2.stage1);
    let contingency = (s1.stage1 as usize) << 1 | s2.stage1 as usize;
    let second = stage.outcome(s1.after_outcome(contingency), s2.after_outcome(contingency));
    (first.0 + second.0, first.1 + second.1)
}

/// 32×32 normal form of the classical twice-repeated game.
pub fn classical_twice_repeated(stage: &StageGame) -> Bimatrix {
    Bimatrix::from_fn(RepStrategy::COUNT, RepStrategy::COUNT, |r, c| {
        let s1 = RepStrategy::from_index(r).expect("r < 32");
        let s2 = RepStrategy::from_index(c).expect("c < 32");
        classical_play(stage, &s1, &s2)
    })
    .with_labels(rep_strategy_labels(), rep_strategy_labels())
}

/// Qubits needed to play a 2×2 game `n_stages` times: `Σ_{j=1..n} 2^(2j-1)`.
pub fn qubit_count(n_stages: u32) -> Result<u128> {
    if n_stages < 1 {
        return Err(Error::InvalidArgument("number of stages must be at least 1".into()));
    }
    if n_stages > 63 {
        return Err(Error::InvalidArgument(format!("{n_stages} stages overflow the qubit count")));
    }
    Ok((1..=n_stages).map(|j| 1u128 << (2 * j - 1)).sum())
}
