//! JSON game configuration.
//!
//! ```json
//! {
//!   "protocol": "mw10",
//!   "payoffs": { "T": 5, "R": 4, "P": 1, "S": 0 },
//!   "initial_state": { "preset": "example_4_5" }
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qstate::{parse_bits, PureState};
use crate::repeated10::example_cooperation_state;
use crate::stagegames::{make_pd, StageGame};

/// Parsed amplitudes must have squared norm within this of 1.
pub const CONFIG_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Mw10,
    IqbalToor,
    Classical,
}

impl Protocol {
    /// Register size, `None` for the classical protocol.
    pub fn num_qubits(self) -> Option<usize> {
        match self {
            Protocol::Mw10 => Some(10),
            Protocol::IqbalToor => Some(4),
            Protocol::Classical => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Mw10 => "mw10",
            Protocol::IqbalToor => "iqbal-toor",
            Protocol::Classical => "classical",
        }
    }
}

/// Either `{T, R, P, S}` or four `[u1, u2]` pairs in outcome order 00, 01, 10, 11.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<[f64; 2]>>,
}

impl PayoffSpec {
    pub fn pd(t: f64, r: f64, p: f64, s: f64) -> Self {
        Self {
            t: Some(t),
            r: Some(r),
            p: Some(p),
            s: Some(s),
            outcomes: None,
        }
    }

    pub fn build(&self) -> Result<StageGame> {
        let named = [self.t, self.r, self.p, self.s];
        match (&self.outcomes, named) {
            (None, [Some(t), Some(r), Some(p), Some(s)]) => {
                make_pd(t, r, p, s).map_err(|e| Error::Config(format!("payoffs: {e}")))
            }
            (Some(o), [None, None, None, None]) => {
                if o.len() != 4 {
                    return Err(Error::Config(format!(
                        "payoffs.outcomes: expected 4 pairs, got {}",
                        o.len()
                    )));
                }
                let pair = |i: usize| (o[i][0], o[i][1]);
                StageGame::new([[pair(0), pair(1)], [pair(2), pair(3)]])
                    .map_err(|e| Error::Config(format!("payoffs.outcomes: {e}")))
            }
            (None, _) => {
                let missing: Vec<&str> = ["T", "R", "P", "S"]
                    .iter()
                    .zip(named)
                    .filter(|(_, v)| v.is_none())
                    .map(|(k, _)| *k)
                    .collect();
                Err(Error::Config(format!("payoffs: missing {}", missing.join(", "))))
            }
            (Some(_), _) => Err(Error::Config(
                "payoffs: give either T/R/P/S or outcomes, not both".into(),
            )),
        }
    }
}

/// One basis term. `prob` is shorthand for a real amplitude `√prob`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeTerm {
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

impl AmplitudeTerm {
    pub fn complex(basis: &str, re: f64, im: f64) -> Self {
        Self {
            basis: basis.into(),
            re: Some(re),
            im: Some(im),
            prob: None,
        }
    }

    pub fn prob(basis: &str, prob: f64) -> Self {
        Self {
            basis: basis.into(),
            re: None,
            im: None,
            prob: Some(prob),
        }
    }

    fn amplitude(&self, field: &str) -> Result<Complex64> {
        match (self.re, self.im, self.prob) {
            (None, None, Some(p)) if (0.0..=1.0).contains(&p) => Ok(Complex64::new(p.sqrt(), 0.0)),
            (None, None, Some(p)) => Err(Error::Config(format!("{field}.prob: {p} outside [0, 1]"))),
            (re, im, None) if re.is_some() || im.is_some() => {
                let a = Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0));
                if a.is_finite() {
                    Ok(a)
                } else {
                    Err(Error::Config(format!("{field}: non-finite amplitude")))
                }
            }
            (_, _, Some(_)) => Err(Error::Config(format!("{field}: prob cannot be combined with re/im"))),
            _ => Err(Error::Config(format!("{field}: needs re/im or prob"))),
        }
    }
}

/// Build a normalized state from terms on `num_qubits` qubits.
pub fn state_from_terms(terms: &[AmplitudeTerm], num_qubits: usize, field: &str) -> Result<PureState> {
    if terms.is_empty() {
        return Err(Error::Config(format!("{field}: no terms")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
    let mut seen = vec![false; 1 << num_qubits];
    for (i, term) in terms.iter().enumerate() {
        let here = format!("{field}[{i}]");
        if term.basis.len() != num_qubits {
            return Err(Error::Config(format!(
                "{here}.basis: \"{}\" has {} bits, expected {num_qubits}",
                term.basis,
                term.basis.len()
            )));
        }
        let index = parse_bits(&term.basis).map_err(|e| Error::Config(format!("{here}.basis: {e}")))?;
        if std::mem::replace(&mut seen[index], true) {
            return Err(Error::Config(format!("{here}.basis: \"{}\" listed twice", term.basis)));
        }
        amps[index] = term.amplitude(&here)?;
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > CONFIG_NORM_TOL {
        return Err(Error::Config(format!("{field}: squared norm {norm} is not 1")));
    }
    PureState::normalized(num_qubits, amps).map_err(|e| Error::Config(format!("{field}: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    AllZero,
    /// `λ0|0...0> + λ1|1...1>` with the given `|λ0|²`.
    Ghz(f64),
    /// `|00> (√0.6|00> + √0.4|11>) |0>^⊗6`.
    Example45,
}

impl Preset {
    pub fn build(self, num_qubits: usize) -> Result<PureState> {
        match self {
            Preset::AllZero => PureState::basis(num_qubits, 0),
            Preset::Ghz(x) => {
                let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
                amps[0] = Complex64::new(x.sqrt(), 0.0);
                amps[(1 << num_qubits) - 1] = Complex64::new((1.0 - x).sqrt(), 0.0);
                PureState::new(num_qubits, amps)
            }
            Preset::Example45 if num_qubits == 10 => Ok(example_cooperation_state()),
            Preset::Example45 => Err(Error::Config(
                "initial_state.preset: example_4_5 needs the mw10 protocol".into(),
            )),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::AllZero => f.write_str("all_zero"),
            Preset::Ghz(x) => write!(f, "ghz({x})"),
            Preset::Example45 => f.write_str("example_4_5"),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s {
            "all_zero" => return Ok(Preset::AllZero),
            "example_4_5" => return Ok(Preset::Example45),
            _ => {}
        }
        let arg = s
            .strip_prefix("ghz(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unknown preset \"{s}\" (all_zero, ghz(x), example_4_5)"))?;
        let x: f64 = arg.trim().parse().map_err(|_| format!("ghz: \"{arg}\" is not a number"))?;
        if !(0.0..=1.0).contains(&x) {
            return Err(format!("ghz: |λ0|² = {x} outside [0, 1]"));
        }
        Ok(Preset::Ghz(x))
    }
}

impl Serialize for Preset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Preset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exactly one of the three fields must be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<AmplitudeTerm>>,
    /// One entry per qubit pair, each a list of two-qubit terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_product: Option<Vec<Vec<AmplitudeTerm>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

impl InitialStateSpec {
    pub fn preset(p: Preset) -> Self {
        Self {
            preset: Some(p),
            ..Self::default()
        }
    }

    pub fn build(&self, num_qubits: usize) -> Result<PureState> {
        match (&self.terms, &self.pair_product, self.preset) {
            (Some(terms), None, None) => state_from_terms(terms, num_qubits, "initial_state.terms"),
            (None, Some(pairs), None) => {
                if pairs.len() * 2 != num_qubits {
                    return Err(Error::Config(format!(
                        "initial_state.pair_product: expected {} pairs, got {}",
                        num_qubits / 2,
                        pairs.len()
                    )));
                }
                let factors = pairs
                    .iter()
                    .enumerate()
                    .map(|(i, t)| state_from_terms(t, 2, &format!("initial_state.pair_product[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let mut state = factors[0].clone();
                for f in &factors[1..] {
                    state = state.tensor(f)?;
                }
                Ok(state)
            }
            (None, None, Some(p)) => p.build(num_qubits),
            (None, None, None) => Err(Error::Config(
                "initial_state: needs one of terms, pair_product, preset".into(),
            )),
            _ => Err(Error::Config(
                "initial_state: terms, pair_product and preset are mutually exclusive".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub protocol: Protocol,
    pub payoffs: PayoffSpec,
    /// Defaults to the all-zero state when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSpec>,
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSetup {
    pub protocol: Protocol,
    pub stage: StageGame,
    /// `None` for the classical protocol.
    pub initial: Option<PureState>,
}

impl GameConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<GameSetup> {
        let stage = self.payoffs.build()?;
        let initial = match self.protocol.num_qubits() {
            None => None,
            Some(n) => Some(match &self.initial_state {
                Some(spec) => spec.build(n)?,
                None => PureState::basis(n, 0)?,
            }),
        };
        Ok(GameSetup {
            protocol: self.protocol,
            stage,
            initial,
        })
    }
}
