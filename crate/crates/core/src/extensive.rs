//! Game tree of the ten-qubit protocol, read off the sequential procedure.
//!
//! Layout: player 1 chooses the stage-1 flip, player 2 chooses without seeing
//! it, a chance node draws the measured outcome of qubits 1–2, and then the
//! players choose on the contingency pair of that outcome. Second-stage
//! decision nodes are grouped into information sets by measured outcome
//! only, since the players never observe each other's stage-1 operators.
//!
//! Branches the measurement cannot produce stay in the tree and are flagged
//! unreachable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mw::MwGame;
use crate::qstate::{FlipLayer, PureState};
use crate::repeated10::{classify_state, contingency_pair, RepGame, StateFamily};
use crate::stagegames::Payoff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Decision,
    Chance,
    Terminal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub label: String,
    /// Set on edges leaving chance nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info_set: Option<String>,
    /// `κ1κ2`, then `|ι1ι2`, then `|κ3κ4` as the path grows.
    pub history: String,
    pub reachable: bool,
    pub children: Vec<Edge>,
    /// Total payoffs `(E1.1 + E1.2, E2.1 + E2.2)` conditioned on the history.
    /// Absent on terminals whose measurement branch cannot occur and whose
    /// conditional state is therefore undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Payoff>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensiveTree {
    pub family: String,
    pub nodes: Vec<Node>,
}

impl ExtensiveTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn terminals(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Terminal)
    }

    pub fn chance_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Chance)
    }

    /// Node ids grouped by information set, sorted by set name.
    pub fn information_sets(&self) -> Vec<(String, Vec<usize>)> {
        let mut sets: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
        for n in &self.nodes {
            if let Some(set) = &n.info_set {
                sets.entry(set.clone()).or_default().push(n.id);
            }
        }
        sets.into_iter().collect()
    }

    pub fn find(&self, history: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.history == history)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Conditional continuation payoffs after a measured outcome.
enum Continuation {
    /// `O_ι + MW payoff of the contingency pair`, same for every stage-1 history.
    PairProduct(Vec<PureState>),
    /// Evaluated on the actual post-measurement state.
    Conditional,
}

struct Builder<'a> {
    game: &'a RepGame,
    nodes: Vec<Node>,
    continuation: Continuation,
}

impl Builder<'_> {
    fn push(&mut self, node: Node) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { id, ..node });
        id
    }

    fn decision(&mut self, owner: usize, info_set: String, history: String, reachable: bool) -> usize {
        self.push(Node {
            id: 0,
            kind: NodeKind::Decision,
            owner: Some(owner),
            info_set: Some(info_set),
            history,
            reachable,
            children: Vec::new(),
            payoff: None,
        })
    }

    fn link(&mut self, parent: usize, label: String, probability: Option<f64>, child: usize) {
        self.nodes[parent].children.push(Edge {
            label,
            probability,
            child,
        });
    }

    fn terminal_payoff(&self, outcome: usize, post: Option<&PureState>, k3: u8, k4: u8) -> Option<Payoff> {
        match &self.continuation {
            Continuation::PairProduct(factors) => {
                let stage = self.game.stage();
                let first = stage.outcome_by_index(outcome);
                let mw = MwGame::new(factors[outcome + 1].clone(), stage.clone()).expect("2-qubit factor");
                let (c1, c2) = mw.payoff(k3, k4);
                Some((first.0 + c1, first.1 + c2))
            }
            Continuation::Conditional => {
                let post = post?;
                let (q3, q4) = contingency_pair(outcome);
                let layer = FlipLayer::from_pairs([(q3, k3), (q4, k4)]).expect("bits");
                let fin = post.apply_flips(&layer).expect("10 qubits");
                let total = |player| {
                    self.game.observable(player, 1).expectation_pure(&fin).expect("10 qubits")
                        + self.game.observable(player, 2).expectation_pure(&fin).expect("10 qubits")
                };
                Some((total(1), total(2)))
            }
        }
    }
}

/// Builds the game tree for pair-product or two-term initial states.
pub fn build_extensive(game: &RepGame) -> Result<ExtensiveTree> {
    let family = classify_state(game.initial());
    let continuation = match &family {
        StateFamily::PairProduct(factors) => Continuation::PairProduct(factors.clone()),
        StateFamily::TwoTerm { .. } => Continuation::Conditional,
        StateFamily::General => {
            return Err(Error::UnsupportedState(
                "extensive form is defined only for pair-product or two-term initial states".into(),
            ))
        }
    };
    let mut b = Builder {
        game,
        nodes: Vec::with_capacity(119),
        continuation,
    };

    let root = b.decision(1, "1.1".into(), String::new(), true);
    for k1 in 0..2u8 {
        let p2 = b.decision(2, "2.1".into(), format!("{k1}"), true);
        b.link(root, k1.to_string(), None, p2);
        for k2 in 0..2u8 {
            let h1 = format!("{k1}{k2}");
            let chance = b.push(Node {
                id: 0,
                kind: NodeKind::Chance,
                owner: None,
                info_set: None,
                history: h1.clone(),
                reachable: true,
                children: Vec::new(),
                payoff: None,
            });
            b.link(p2, k2.to_string(), None, chance);

            let layer = FlipLayer::from_pairs([(1, k1), (2, k2)])?;
            let measured = game.initial().apply_flips(&layer)?.measure_pair(1, 2)?;
            for outcome in 0..4usize {
                let hit = measured.iter().find(|m| m.index() == outcome);
                let probability = hit.map_or(0.0, |m| m.probability);
                let reachable = hit.is_some();
                let post = hit.map(|m| &m.post_state);
                let bits = format!("{:02b}", outcome);
                let h2 = format!("{h1}|{bits}");

                let n3 = b.decision(1, format!("1.{bits}"), h2.clone(), reachable);
                b.link(chance, bits.clone(), Some(probability), n3);
                for k3 in 0..2u8 {
                    let n4 = b.decision(2, format!("2.{bits}"), format!("{h2}|{k3}"), reachable);
                    b.link(n3, k3.to_string(), None, n4);
                    for k4 in 0..2u8 {
                        let payoff = b.terminal_payoff(outcome, post, k3, k4);
                        let leaf = b.push(Node {
                            id: 0,
                            kind: NodeKind::Terminal,
                            owner: None,
                            info_set: None,
                            history: format!("{h2}|{k3}{k4}"),
                            reachable,
                            children: Vec::new(),
                            payoff,
                        });
                        b.link(n4, k4.to_string(), None, leaf);
                    }
                }
            }
        }
    }

    Ok(ExtensiveTree {
        family: family.name().into(),
        nodes: b.nodes,
    })
}
