//! Locally checkable labelings and their checkers.
//!
//! Orientation-like outputs are node labels referring to ports: port `p` of
//! node `v` is the `p`-th neighbor of `v` in ascending id order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("label of node {node} is malformed: {reason}")]
    Format { node: NodeId, reason: String },
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLabel {
    Flag(bool),
    Color(u32),
    /// Matched port, if any.
    Port(Option<u32>),
    /// Outgoing ports.
    Ports(Vec<u32>),
    /// One color per port.
    PortColors(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    #[serde(default)]
    pub input: u32,
    pub output: OutputLabel,
}

impl Label {
    pub fn new(output: OutputLabel) -> Self {
        Label { input: 0, output }
    }
}

pub type Labeling = BTreeMap<NodeId, Label>;

/// A problem given by finite alphabets and a radius-`r` predicate
/// evaluated at every node.
pub trait LclProblem: Sync {
    fn name(&self) -> &str;

    fn radius(&self) -> usize;

    /// Size of the input alphabet `{0, .., k-1}`.
    fn input_alphabet(&self) -> u32;

    /// Whether `label` belongs to the output alphabet for a node of the given
    /// degree in a graph of maximum degree `max_degree`.
    fn output_in_alphabet(&self, label: &OutputLabel, degree: usize, max_degree: usize) -> Result<(), String>;

    /// The local predicate at the node with index `v`. Only labels within
    /// `radius()` hops are read.
    fn check_node(&self, g: &Graph, v: usize, labels: &[&Label]) -> Result<(), String>;

    fn quality(&self, _g: &Graph, _labels: &[&Label]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinProblem {
    Mis,
    MaximalMatching,
    /// `(Δ+1)`-coloring.
    Coloring,
    /// `(2Δ-1)`-edge coloring, each node listing the colors of its ports.
    EdgeColoring,
    /// Every node of degree at least 2 has an outgoing edge.
    SinklessOrientation,
    DominatingSet,
}

impl BuiltinProblem {
    pub const ALL: [BuiltinProblem; 6] = [
        BuiltinProblem::Mis,
        BuiltinProblem::MaximalMatching,
        BuiltinProblem::Coloring,
        BuiltinProblem::EdgeColoring,
        BuiltinProblem::SinklessOrientation,
        BuiltinProblem::DominatingSet,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BuiltinProblem::Mis => "mis",
            BuiltinProblem::MaximalMatching => "maximal_matching",
            BuiltinProblem::Coloring => "coloring",
            BuiltinProblem::EdgeColoring => "edge_coloring",
            BuiltinProblem::SinklessOrientation => "sinkless_orientation",
            BuiltinProblem::DominatingSet => "dominating_set",
        }
    }
}

impl fmt::Display for BuiltinProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BuiltinProblem {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BuiltinProblem::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| VerifyError::Parameter(format!("unknown problem `{s}`")))
    }
}

fn flag(label: &Label) -> bool {
    matches!(label.output, OutputLabel::Flag(true))
}

fn ports(label: &Label) -> &[u32] {
    match &label.output {
        OutputLabel::Ports(p) | OutputLabel::PortColors(p) => p,
        _ => &[],
    }
}

fn port_of(g: &Graph, v: usize, w: usize) -> u32 {
    g.neighbors(v).binary_search(&w).expect("adjacent") as u32
}

impl LclProblem for BuiltinProblem {
    fn name(&self) -> &str {
        self.key()
    }

    fn radius(&self) -> usize {
        1
    }

    fn input_alphabet(&self) -> u32 {
        1
    }

    fn output_in_alphabet(&self, label: &OutputLabel, degree: usize, max_degree: usize) -> Result<(), String> {
        let deg = degree as u32;
        match (self, label) {
            (BuiltinProblem::Mis | BuiltinProblem::DominatingSet, OutputLabel::Flag(_)) => Ok(()),
            (BuiltinProblem::Coloring, OutputLabel::Color(c)) => {
                if (1..=max_degree as u32 + 1).contains(c) {
                    Ok(())
                } else {
                    Err(format!("color {c} outside 1..={}", max_degree + 1))
                }
            }
            (BuiltinProblem::MaximalMatching, OutputLabel::Port(p)) => match p {
                Some(p) if *p >= deg => Err(format!("port {p} but degree {deg}")),
                _ => Ok(()),
            },
            (BuiltinProblem::SinklessOrientation, OutputLabel::Ports(ps)) => {
                let distinct: BTreeSet<&u32> = ps.iter().collect();
                if ps.iter().any(|&p| p >= deg) {
                    Err(format!("port out of range for degree {deg}"))
                } else if distinct.len() != ps.len() {
                    Err("repeated port".into())
                } else {
                    Ok(())
                }
            }
            (BuiltinProblem::EdgeColoring, OutputLabel::PortColors(cs)) => {
                let palette = (2 * max_degree).saturating_sub(1) as u32;
                if cs.len() != degree {
                    Err(format!("{} port colors for degree {deg}", cs.len()))
                } else if cs.iter().any(|c| !(1..=palette).contains(c)) {
                    Err(format!("edge color outside 1..={palette}"))
                } else {
                    Ok(())
                }
            }
            _ => Err(format!("label kind does not fit problem {}", self.key())),
        }
    }

    fn check_node(&self, g: &Graph, v: usize, labels: &[&Label]) -> Result<(), String> {
        let nbrs = g.neighbors(v);
        match self {
            BuiltinProblem::Mis => {
                let inside = nbrs.iter().filter(|&&w| flag(labels[w])).count();
                match (flag(labels[v]), inside) {
                    (true, 0) | (false, 1..) => Ok(()),
                    (true, _) => Err("adjacent to another member".into()),
                    (false, 0) => Err("not in the set and no neighbor is (not maximal)".into()),
                }
            }
            BuiltinProblem::DominatingSet => {
                if flag(labels[v]) || nbrs.iter().any(|&w| flag(labels[w])) {
                    Ok(())
                } else {
                    Err("not dominated".into())
                }
            }
            BuiltinProblem::Coloring => {
                let own = &labels[v].output;
                match nbrs.iter().find(|&&w| &labels[w].output == own) {
                    Some(&w) => Err(format!("same color as neighbor {}", g.id(w))),
                    None => Ok(()),
                }
            }
            BuiltinProblem::MaximalMatching => {
                let partner = |x: usize| match labels[x].output {
                    OutputLabel::Port(Some(p)) => g.neighbors(x).get(p as usize).copied(),
                    _ => None,
                };
                match partner(v) {
                    Some(w) if partner(w) == Some(v) => Ok(()),
                    Some(w) => Err(format!("partner {} does not reciprocate", g.id(w))),
                    None => match nbrs.iter().find(|&&w| partner(w).is_none()) {
                        Some(&w) => Err(format!("unmatched next to unmatched {} (not maximal)", g.id(w))),
                        None => Ok(()),
                    },
                }
            }
            BuiltinProblem::EdgeColoring => {
                let own = ports(labels[v]);
                let distinct: BTreeSet<&u32> = own.iter().collect();
                if distinct.len() != own.len() {
                    return Err("two incident edges share a color".into());
                }
                for (p, &w) in nbrs.iter().enumerate() {
                    let theirs = ports(labels[w]).get(port_of(g, w, v) as usize);
                    if theirs != own.get(p) {
                        return Err(format!("endpoints disagree on the color of edge to {}", g.id(w)));
                    }
                }
                Ok(())
            }
            BuiltinProblem::SinklessOrientation => {
                let out = ports(labels[v]);
                for (p, &w) in nbrs.iter().enumerate() {
                    let mine = out.contains(&(p as u32));
                    let theirs = ports(labels[w]).contains(&port_of(g, w, v));
                    if mine == theirs {
                        let how = if mine { "by both endpoints" } else { "by neither endpoint" };
                        return Err(format!("edge to {} claimed {how}", g.id(w)));
                    }
                }
                if nbrs.len() >= 2 && out.is_empty() {
                    return Err("sink of degree at least 2".into());
                }
                Ok(())
            }
        }
    }

    fn quality(&self, g: &Graph, labels: &[&Label]) -> Option<f64> {
        match self {
            BuiltinProblem::Mis | BuiltinProblem::DominatingSet => Some(labels.iter().filter(|l| flag(l)).count() as f64),
            BuiltinProblem::Coloring => {
                let used: BTreeSet<&OutputLabel> = labels.iter().map(|l| &l.output).collect();
                Some(used.len() as f64)
            }
            BuiltinProblem::EdgeColoring => {
                let used: BTreeSet<u32> = labels.iter().flat_map(|l| ports(l).iter().copied()).collect();
                Some(used.len() as f64)
            }
            BuiltinProblem::MaximalMatching => {
                let matched = (0..g.n()).filter(|&v| matches!(labels[v].output, OutputLabel::Port(Some(_)))).count();
                Some((matched / 2) as f64)
            }
            BuiltinProblem::SinklessOrientation => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub accepted: bool,
    pub violations: Vec<(NodeId, String)>,
    pub quality: Option<f64>,
}

impl CheckReport {
    pub fn from_violations(violations: Vec<(NodeId, String)>, quality: Option<f64>) -> Self {
        CheckReport { accepted: violations.is_empty(), violations, quality }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Evaluates the predicate of `problem` at every node of `g`.
pub fn check_labeling(g: &Graph, problem: &dyn LclProblem, labels: &Labeling) -> Result<CheckReport, VerifyError> {
    check_labeling_with_bound(g, problem, labels, g.max_degree())
}

/// Like [`check_labeling`], with alphabets sized by a degree bound instead of
/// `Δ(g)`; typically the maximum degree of the support.
pub fn check_labeling_with_bound(
    g: &Graph,
    problem: &dyn LclProblem,
    labels: &Labeling,
    delta: usize,
) -> Result<CheckReport, VerifyError> {
    if delta < g.max_degree() {
        return Err(VerifyError::Parameter(format!("degree bound {delta} below the maximum degree {}", g.max_degree())));
    }
    let mut ordered = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let node = g.id(i);
        let label = labels.get(&node).ok_or(VerifyError::Format { node, reason: "missing label".into() })?;
        if label.input >= problem.input_alphabet() {
            return Err(VerifyError::Format { node, reason: format!("input {} outside alphabet", label.input) });
        }
        problem
            .output_in_alphabet(&label.output, g.degree(i), delta)
            .map_err(|reason| VerifyError::Format { node, reason })?;
        ordered.push(label);
    }
    if let Some(&extra) = labels.keys().find(|&&v| !g.contains(v)) {
        return Err(VerifyError::Format { node: extra, reason: "label for a node outside the graph".into() });
    }
    let violations = (0..g.n())
        .filter_map(|i| problem.check_node(g, i, &ordered).err().map(|r| (g.id(i), r)))
        .collect();
    Ok(CheckReport::from_violations(violations, problem.quality(g, &ordered)))
}

/// `optimum / size` for a maximization problem; infinite when `size` is 0.
pub fn approx_ratio(size: usize, optimum: usize) -> Result<f64, VerifyError> {
    if optimum == 0 {
        return Err(VerifyError::Parameter("optimum must be at least 1".into()));
    }
    Ok(if size == 0 { f64::INFINITY } else { optimum as f64 / size as f64 })
}

pub fn set_labels(g: &Graph, set: &BTreeSet<NodeId>) -> Labeling {
    g.ids().iter().map(|&v| (v, Label::new(OutputLabel::Flag(set.contains(&v))))).collect()
}

pub fn coloring_labels(colors: &BTreeMap<NodeId, u32>) -> Labeling {
    colors.iter().map(|(&v, &c)| (v, Label::new(OutputLabel::Color(c)))).collect()
}

/// Converts out-neighbor lists into port labels. Nodes without an entry
/// get no outgoing edge.
pub fn orientation_labels(g: &Graph, out: &BTreeMap<NodeId, Vec<NodeId>>) -> Result<Labeling, VerifyError> {
    let mut labels = Labeling::new();
    for &v in g.ids() {
        let nbrs = g.neighbor_ids(v)?;
        let mut ports = Vec::new();
        for w in out.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            let p = nbrs
                .binary_search(w)
                .map_err(|_| VerifyError::Format { node: v, reason: format!("{w} is not a neighbor") })?;
            ports.push(p as u32);
        }
        ports.sort_unstable();
        labels.insert(v, Label::new(OutputLabel::Ports(ports)));
    }
    Ok(labels)
}

/// Converts a partner map into matching port labels.
pub fn matching_labels(g: &Graph, partner: &BTreeMap<NodeId, NodeId>) -> Result<Labeling, VerifyError> {
    let mut labels = Labeling::new();
    for &v in g.ids() {
        let port = match partner.get(&v) {
            Some(w) => Some(g.neighbor_ids(v)?.binary_search(w).map_err(|_| VerifyError::Format {
                node: v,
                reason: format!("{w} is not a neighbor"),
            })? as u32),
            None => None,
        };
        labels.insert(v, Label::new(OutputLabel::Port(port)));
    }
    Ok(labels)
}
