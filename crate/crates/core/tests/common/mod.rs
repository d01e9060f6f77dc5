//! Independent reference computations, written directly against the bit
//! layout rather than through the library's engines.

#![allow(dead_code)]

use num_complex::Complex64;
use qrepgame::stagegames::StageGame;

pub type Cells = Vec<Vec<(f64, f64)>>;

fn stage_payoff(stage: &StageGame, player: usize, outcome: usize) -> f64 {
    let (u1, u2) = stage.outcome_by_index(outcome);
    if player == 1 {
        u1
    } else {
        u2
    }
}

/// `strategy` as an index `stage1·16 + a00·8 + a01·4 + a10·2 + a11`.
fn decode(strategy: usize) -> (usize, [usize; 4]) {
    (strategy >> 4, [(strategy >> 3) & 1, (strategy >> 2) & 1, (strategy >> 1) & 1, strategy & 1])
}

/// Mask of the qubits flipped by a ten-qubit profile. Qubit `q` is bit
/// `10 - q`; player 1 acts on odd qubits, player 2 on even ones.
pub fn rep_flip_mask(s1: usize, s2: usize) -> usize {
    let bit = |q: usize| 1usize << (10 - q);
    let (k1, a) = decode(s1);
    let (k2, b) = decode(s2);
    let mut mask = 0;
    if k1 == 1 {
        mask |= bit(1);
    }
    if k2 == 1 {
        mask |= bit(2);
    }
    for o in 0..4 {
        if a[o] == 1 {
            mask |= bit(2 * o + 3);
        }
        if b[o] == 1 {
            mask |= bit(2 * o + 4);
        }
    }
    mask
}

/// `[E1.1, E1.2, E2.1, E2.2]` of a pure profile on a ten-qubit state.
pub fn naive_rep_payoffs(amps: &[Complex64], stage: &StageGame, s1: usize, s2: usize) -> [f64; 4] {
    let mask = rep_flip_mask(s1, s2);
    let mut e = [0.0; 4];
    for x in 0..amps.len() {
        // the final amplitude at x is the initial one at x ^ mask
        let p = amps[x ^ mask].norm_sqr();
        let first = x >> 8;
        let second = (x >> (10 - (2 * first + 4))) & 3;
        e[0] += p * stage_payoff(stage, 1, first);
        e[1] += p * stage_payoff(stage, 1, second);
        e[2] += p * stage_payoff(stage, 2, first);
        e[3] += p * stage_payoff(stage, 2, second);
    }
    e
}

pub fn naive_rep_table(amps: &[Complex64], stage: &StageGame) -> Cells {
    (0..32)
        .map(|r| {
            (0..32)
                .map(|c| {
                    let e = naive_rep_payoffs(amps, stage, r, c);
                    (e[0] + e[1], e[2] + e[3])
                })
                .collect()
        })
        .collect()
}

/// Pure equilibria straight from the definition.
pub fn brute_force_nash(cells: &Cells, tol: f64) -> Vec<(usize, usize)> {
    let rows = cells.len();
    let cols = cells[0].len();
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let best_row = (0..rows).map(|i| cells[i][c].0).fold(f64::NEG_INFINITY, f64::max);
            let best_col = (0..cols).map(|j| cells[r][j].1).fold(f64::NEG_INFINITY, f64::max);
            if cells[r][c].0 + tol >= best_row && cells[r][c].1 + tol >= best_col {
                out.push((r, c));
            }
        }
    }
    out
}

/// Stage-2 payoffs in the subgame after outcome `o`, from the marginal of the
/// contingency pair (pair-product states only).
pub fn subgame_cells(amps: &[Complex64], stage: &StageGame, o: usize) -> Cells {
    let shift = 10 - (2 * o + 4);
    let mut marginal = [0.0; 4];
    for (x, a) in amps.iter().enumerate() {
        marginal[(x >> shift) & 3] += a.norm_sqr();
    }
    (0..2)
        .map(|a| {
            (0..2)
                .map(|b| {
                    let flip = (a << 1) | b;
                    (0..4).fold((0.0, 0.0), |acc, y| {
                        let p = marginal[y ^ flip];
                        (acc.0 + p * stage_payoff(stage, 1, y), acc.1 + p * stage_payoff(stage, 2, y))
                    })
                })
                .collect()
        })
        .collect()
}

/// Subgame-perfect profiles of a pair-product game by exhaustive check: every
/// subgame plays a Nash equilibrium and no stage-1 deviation that keeps the
/// continuation pays off.
pub fn brute_force_spe(amps: &[Complex64], stage: &StageGame, tol: f64) -> Vec<(usize, usize)> {
    let table = naive_rep_table(amps, stage);
    let subgames: Vec<Vec<(usize, usize)>> =
        (0..4).map(|o| brute_force_nash(&subgame_cells(amps, stage, o), tol)).collect();
    let mut out = Vec::new();
    for s1 in 0..32 {
        for s2 in 0..32 {
            let (_, a) = decode(s1);
            let (_, b) = decode(s2);
            if !(0..4).all(|o| subgames[o].contains(&(a[o], b[o]))) {
                continue;
            }
            let (u1, u2) = table[s1][s2];
            if table[s1 ^ 16][s2].0 <= u1 + tol && table[s1][s2 ^ 16].1 <= u2 + tol {
                out.push((s1, s2));
            }
        }
    }
    out
}

/// Classical backward induction on the twice-repeated stage game.
pub fn classical_backward_induction(stage: &StageGame, tol: f64) -> Vec<(usize, usize, (f64, f64))> {
    let one_shot: Cells = (0..2)
        .map(|a| (0..2).map(|b| stage.outcome(a as u8, b as u8)).collect())
        .collect();
    let ne = brute_force_nash(&one_shot, tol);
    let mut out = Vec::new();
    for sel in 0..ne.len().pow(4) {
        let mut rest = sel;
        let picks: Vec<(usize, usize)> = (0..4)
            .map(|_| {
                let p = ne[rest % ne.len()];
                rest /= ne.len();
                p
            })
            .collect();
        let induced: Cells = (0..2)
            .map(|a| {
                (0..2)
                    .map(|b| {
                        let now = one_shot[a][b];
                        let (c, d) = picks[2 * a + b];
                        let later = one_shot[c][d];
                        (now.0 + later.0, now.1 + later.1)
                    })
                    .collect()
            })
            .collect();
        for (k1, k2) in brute_force_nash(&induced, tol) {
            let s1 = k1 * 16 + picks.iter().fold(0, |acc, p| acc * 2 + p.0);
            let s2 = k2 * 16 + picks.iter().fold(0, |acc, p| acc * 2 + p.1);
            out.push((s1, s2, induced[k1][k2]));
        }
    }
    out.sort_by_key(|e| (e.0, e.1));
    out.dedup_by_key(|e| (e.0, e.1));
    out
}

/// `(R', S', T', P')` for `player` from the marginal of qubits 1–2 of a
/// four-qubit state.
pub fn stage1_pattern(amps: &[Complex64], stage: &StageGame, player: usize) -> [f64; 4] {
    let mut marginal = [0.0; 4];
    for (x, a) in amps.iter().enumerate() {
        marginal[x >> 2] += a.norm_sqr();
    }
    let value = |k1: usize, k2: usize| -> f64 {
        let flip = (k1 << 1) | k2;
        (0..4).map(|y| marginal[y ^ flip] * stage_payoff(stage, player, y)).sum()
    };
    if player == 1 {
        [value(0, 0), value(0, 1), value(1, 0), value(1, 1)]
    } else {
        [value(0, 0), value(1, 0), value(0, 1), value(1, 1)]
    }
}
