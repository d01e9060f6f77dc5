//! Small dense qubit register.
//!
//! Every operator the games need is a tensor product of identities and bit
//! flips, and every payoff observable is diagonal in the computational basis.
//! Flips are therefore index permutations (`x -> x ^ mask`) and expectations
//! are weighted sums of basis probabilities; no matrices are ever built.
//!
//! Qubit 1 is the most significant bit of a basis index, so the ket
//! `|x1 x2 ... xn>` has index `(x1 x2 ... xn)_2`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 10;
/// Tolerance on the squared norm accepted at construction.
pub const NORM_TOL: f64 = 1e-12;
/// Measurement branches at or below this probability are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Bit mask of `qubit` (1-based) in an `num_qubits` register.
pub fn qubit_mask(num_qubits: usize, qubit: usize) -> Result<usize> {
    if qubit == 0 || qubit > num_qubits {
        return Err(Error::QubitOutOfRange { qubit, num_qubits });
    }
    Ok(1 << (num_qubits - qubit))
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidQubitCount(num_qubits));
    }
    Ok(())
}

/// Sum of squared magnitudes, accumulated in sorted order.
///
/// The sort makes the result depend only on the multiset of amplitudes, so
/// any permutation of them yields a bit-identical norm.
fn sorted_norm_sqr(amps: &[Complex64]) -> f64 {
    let mut probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    probs.sort_by(f64::total_cmp);
    probs.iter().sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Builds a state, rejecting anything whose squared norm is not within
    /// [`NORM_TOL`] of one.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(num_qubits, amplitudes, NORM_TOL)
    }

    /// Like [`PureState::new`] with a caller-chosen normalization tolerance.
    pub fn with_tolerance(num_qubits: usize, amplitudes: Vec<Complex64>, tol: f64) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let expected = 1usize << num_qubits;
        if amplitudes.len() != expected {
            return Err(Error::LengthMismatch {
                num_qubits,
                expected,
                got: amplitudes.len(),
            });
        }
        let norm = sorted_norm_sqr(&amplitudes);
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let norm = sorted_norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::with_tolerance(num_qubits, amplitudes, 1e-9)
    }

    /// The computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::BasisIndexOutOfRange { index, num_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Basis state from a bit string such as `"0011"` (qubit 1 first).
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = parse_bits(bits)?;
        Self::basis(bits.len(), index)
    }

    /// Haar-random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let amps = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(num_qubits, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        sorted_norm_sqr(&self.amplitudes)
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.num_qubits + other.num_qubits;
        check_qubit_count(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState::with_tolerance(n, amps, 1e-9)
    }

    /// Applies `σ_κ` on every qubit listed in `layer`.
    pub fn apply_flips(&self, layer: &FlipLayer) -> Result<PureState> {
        let mask = layer.mask(self.num_qubits)?;
        Ok(self.apply_mask(mask))
    }

    /// Permutes amplitudes so that the new amplitude at `x` is the old one
    /// at `x ^ mask`.
    pub fn apply_mask(&self, mask: usize) -> PureState {
        let amplitudes = (0..self.amplitudes.len())
            .map(|x| self.amplitudes[x ^ mask])
            .collect();
        PureState {
            num_qubits: self.num_qubits,
            amplitudes,
        }
    }

    /// Projective computational-basis measurement of two qubits.
    ///
    /// Returns the outcomes with probability above [`PRUNE_TOL`] in the order
    /// 00, 01, 10, 11, each with its renormalized post-measurement state.
    pub fn measure_pair(&self, qubit_a: usize, qubit_b: usize) -> Result<Vec<PairOutcome>> {
        if qubit_a == qubit_b {
            return Err(Error::SameQubit(qubit_a));
        }
        let mask_a = qubit_mask(self.num_qubits, qubit_a)?;
        let mask_b = qubit_mask(self.num_qubits, qubit_b)?;
        let bits_of = |x: usize| ((x & mask_a != 0) as u8, (x & mask_b != 0) as u8);

        let mut outcomes = Vec::with_capacity(4);
        for (a, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let probability: f64 = self
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(x, _)| bits_of(*x) == (a, b))
                .map(|(_, amp)| amp.norm_sqr())
                .sum();
            if probability <= PRUNE_TOL {
                continue;
            }
            let scale = probability.sqrt();
            let amplitudes = self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(x, amp)| {
                    if bits_of(x) == (a, b) {
                        amp / scale
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            outcomes.push(PairOutcome {
                bits: (a, b),
                probability,
                post_state: PureState {
                    num_qubits: self.num_qubits,
                    amplitudes,
                },
            });
        }
        Ok(outcomes)
    }
}

/// Parses a bit string with qubit 1 as its first character.
pub fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::InvalidQubitCount(bits.len()));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidArgument(format!(
            "basis string {bits:?} contains {c:?}"
        ))),
    })
}

/// Formats `index` as an `width`-character bit string.
pub fn format_bits(index: usize, width: usize) -> String {
    format!("{index:0width$b}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairOutcome {
    pub bits: (u8, u8),
    pub probability: f64,
    pub post_state: PureState,
}

impl PairOutcome {
    /// `(ι1 ι2)_2`.
    pub fn index(&self) -> usize {
        (self.bits.0 as usize) << 1 | self.bits.1 as usize
    }
}

/// A tensor product of `σ0`/`σ1` on selected qubits; unlisted qubits get `σ0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipLayer {
    flips: BTreeMap<usize, u8>,
}

impl FlipLayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, u8)>>(pairs: I) -> Result<Self> {
        let mut layer = Self::new();
        for (qubit, bit) in pairs {
            layer.set(qubit, bit)?;
        }
        Ok(layer)
    }

    pub fn set(&mut self, qubit: usize, bit: u8) -> Result<()> {
        if bit > 1 {
            return Err(Error::InvalidBit(bit));
        }
        if qubit == 0 {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: MAX_QUBITS,
            });
        }
        self.flips.insert(qubit, bit);
        Ok(())
    }

    pub fn get(&self, qubit: usize) -> u8 {
        self.flips.get(&qubit).copied().unwrap_or(0)
    }

    pub fn flips(&self) -> &BTreeMap<usize, u8> {
        &self.flips
    }

    /// Union of two layers; `other` wins on shared qubits.
    pub fn merged(&self, other: &FlipLayer) -> FlipLayer {
        let mut flips = self.flips.clone();
        flips.extend(other.flips.iter().map(|(q, b)| (*q, *b)));
        FlipLayer { flips }
    }

    /// XOR mask of the flipped qubits for a register of `num_qubits`.
    pub fn mask(&self, num_qubits: usize) -> Result<usize> {
        let mut mask = 0;
        for (&qubit, &bit) in &self.flips {
            let m = qubit_mask(num_qubits, qubit)?;
            if bit == 1 {
                mask |= m;
            }
        }
        Ok(mask)
    }
}

/// A finite ensemble `{p_k, |ψ_k>}` standing in for its density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidProbabilities("empty ensemble".into()));
        };
        let n = first.num_qubits();
        let mut total = 0.0;
        for (p, s) in &members {
            if !(0.0..=1.0 + NORM_TOL).contains(p) {
                return Err(Error::InvalidProbabilities(format!(
                    "member probability {p} outside [0, 1]"
                )));
            }
            if s.num_qubits() != n {
                return Err(Error::DimensionMismatch(format!(
                    "ensemble mixes {n}- and {}-qubit states",
                    s.num_qubits()
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "member probabilities sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn pure(state: PureState) -> Self {
        Self {
            members: vec![(1.0, state)],
        }
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn num_qubits(&self) -> usize {
        self.members[0].1.num_qubits()
    }
}

/// An observable diagonal in the computational basis, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObservable {
    num_qubits: usize,
    weights: Vec<f64>,
}

impl DiagonalObservable {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        Ok(Self {
            num_qubits,
            weights: vec![0.0; 1 << num_qubits],
        })
    }

    /// Weight of each basis index given by `f(index)`.
    pub fn from_fn<F: Fn(usize) -> f64>(num_qubits: usize, f: F) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        Ok(Self {
            num_qubits,
            weights: (0..1usize << num_qubits).map(f).collect(),
        })
    }

    /// Sparse construction; absent indices weigh zero.
    pub fn from_sparse<I: IntoIterator<Item = (usize, f64)>>(num_qubits: usize, entries: I) -> Result<Self> {
        let mut obs = Self::zero(num_qubits)?;
        for (index, w) in entries {
            if index >= obs.weights.len() {
                return Err(Error::BasisIndexOutOfRange { index, num_qubits });
            }
            obs.weights[index] = w;
        }
        Ok(obs)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn add(&self, other: &DiagonalObservable) -> Result<DiagonalObservable> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "observables on {} and {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
        })
    }

    /// `<ψ|X|ψ>` for a single pure state.
    pub fn expectation_pure(&self, state: &PureState) -> Result<f64> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit state against {}-qubit observable",
                state.num_qubits(),
                self.num_qubits
            )));
        }
        Ok(state
            .amplitudes()
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a.norm_sqr())
            .sum())
    }
}

/// `tr(X ρ)` where `ρ` is the ensemble's density operator.
pub fn expectation(ensemble: &Ensemble, obs: &DiagonalObservable) -> Result<f64> {
    ensemble
        .members()
        .iter()
        .try_fold(0.0, |acc, (p, s)| Ok(acc + p * obs.expectation_pure(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ghz10(l0_sq: f64) -> PureState {
        let mut amps = vec![c(0.0); 1024];
        amps[0] = c(l0_sq.sqrt());
        amps[1023] = c((1.0 - l0_sq).sqrt());
        PureState::new(10, amps).unwrap()
    }

    #[test]
    fn rejects_unnormalized_and_bad_lengths() {
        assert!(matches!(
            PureState::new(2, vec![c(1.0), c(1.0), c(0.0), c(0.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            PureState::new(2, vec![c(1.0)]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(PureState::new(11, vec![]), Err(Error::InvalidQubitCount(11))));
    }

    #[test]
    fn qubit_one_is_most_significant() {
        assert_eq!(qubit_mask(4, 1).unwrap(), 0b1000);
        assert_eq!(qubit_mask(4, 4).unwrap(), 0b0001);
        assert_eq!(PureState::from_bits("0011").unwrap().probability(3), 1.0);
    }

    #[test]
    fn empty_layer_is_identity() {
        let s = ghz10(0.3);
        assert_eq!(s.apply_flips(&FlipLayer::new()).unwrap(), s);
    }

    #[test]
    fn flips_basis_state() {
        let s = PureState::from_bits("0000").unwrap();
        let layer = FlipLayer::from_pairs([(1, 1), (2, 1)]).unwrap();
        assert_eq!(s.apply_flips(&layer).unwrap(), PureState::from_bits("1100").unwrap());
    }

    #[test]
    fn flips_on_ghz_negate_the_high_branch() {
        let s = ghz10(0.3);
        for (k1, k2) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let layer = FlipLayer::from_pairs([(1, k1), (2, k2)]).unwrap();
            let out = s.apply_flips(&layer).unwrap();
            let low = (k1 as usize) << 9 | (k2 as usize) << 8;
            let high = ((1 - k1) as usize) << 9 | ((1 - k2) as usize) << 8 | 0xff;
            assert_eq!(out.amplitude(low), s.amplitude(0));
            assert_eq!(out.amplitude(high), s.amplitude(1023));
        }
    }

    #[test]
    fn flip_out_of_range() {
        let s = PureState::from_bits("00").unwrap();
        let layer = FlipLayer::from_pairs([(3, 1)]).unwrap();
        assert!(matches!(s.apply_flips(&layer), Err(Error::QubitOutOfRange { qubit: 3, .. })));
        assert!(FlipLayer::from_pairs([(1, 2)]).is_err());
    }

    #[test]
    fn measuring_a_basis_state_is_deterministic() {
        let s = PureState::from_bits("0000011111").unwrap();
        let out = s.measure_pair(1, 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].bits, (0, 0));
        assert_eq!(out[0].probability, 1.0);
        assert_eq!(out[0].post_state, s);
    }

    #[test]
    fn measuring_ghz_splits_into_two_branches() {
        let s = ghz10(0.3);
        let out = s.measure_pair(1, 2).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].bits, (0, 0));
        assert_abs_diff_eq!(out[0].probability, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(out[0].post_state.probability(0), 1.0, epsilon = 1e-12);
        assert_eq!(out[1].bits, (1, 1));
        assert_abs_diff_eq!(out[1].probability, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1].post_state.probability(1023), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn measuring_two_qubit_example_state() {
        let s = PureState::new(2, vec![c(0.6f64.sqrt()), c(0.0), c(0.0), c(0.4f64.sqrt())]).unwrap();
        let out = s.measure_pair(1, 2).unwrap();
        assert_eq!(out.len(), 2);
        assert_abs_diff_eq!(out[0].probability, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1].probability, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(out[0].post_state.probability(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1].post_state.probability(3), 1.0, epsilon = 1e-12);
        assert!(matches!(s.measure_pair(1, 1), Err(Error::SameQubit(1))));
    }

    #[test]
    fn expectation_examples() {
        let zero = Ensemble::pure(PureState::basis(10, 0).unwrap());
        let obs = DiagonalObservable::from_sparse(10, [(0, 3.0)]).unwrap();
        assert_eq!(expectation(&zero, &obs).unwrap(), 3.0);

        let s1 = PureState::from_bits("01").unwrap();
        let s2 = PureState::from_bits("10").unwrap();
        let ens = Ensemble::new(vec![(0.6, s1), (0.4, s2)]).unwrap();
        let obs = DiagonalObservable::from_sparse(2, [(1, 7.0), (2, -2.0)]).unwrap();
        assert_abs_diff_eq!(expectation(&ens, &obs).unwrap(), 0.6 * 7.0 - 0.4 * 2.0, epsilon = 1e-12);

        let obs4 = DiagonalObservable::zero(4).unwrap();
        assert!(matches!(expectation(&ens, &obs4), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ensemble_validation() {
        let s = PureState::basis(2, 0).unwrap();
        assert!(Ensemble::new(vec![(0.5, s.clone())]).is_err());
        assert!(Ensemble::new(vec![(0.5, s.clone()), (0.5, PureState::basis(4, 0).unwrap())]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }

    #[test]
    fn tensor_orders_factors_left_to_right() {
        let a = PureState::from_bits("10").unwrap();
        let b = PureState::from_bits("01").unwrap();
        assert_eq!(a.tensor(&b).unwrap(), PureState::from_bits("1001").unwrap());
    }
}
