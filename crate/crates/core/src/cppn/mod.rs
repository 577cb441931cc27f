//! Compositional pattern producing networks with NEAT-style variation.
//!
//! There is no speciation: selection comes from the MAP-Elites archive.
//! Innovation numbers are derived from the (source, target) node pair and
//! hidden node ids from the innovation of the link they split, so two
//! genomes that make the same structural change agree on its markings
//! without a shared tracker.

mod activation;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use activation::ActivationKind;
use crate::rng::{mix_seed, splitmix64};

pub type NodeId = u64;

const HIDDEN_ID_FLAG: u64 = 1 << 63;

#[derive(Debug, Error, PartialEq)]
pub enum CppnError {
    #[error("expected {expected} values, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("invalid genome: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: NodeId,
    pub role: NodeRole,
    pub activation: ActivationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGene {
    pub innovation: u64,
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// Innovation number shared by every link joining `source` to `target`.
pub fn link_innovation(source: NodeId, target: NodeId) -> u64 {
    mix_seed(&[source, target])
}

/// Id of the hidden node created by splitting the link with `innovation`.
pub fn spliced_node_id(innovation: u64) -> NodeId {
    splitmix64(innovation ^ 0x5EED_0FC0_FFEE) | HIDDEN_ID_FLAG
}

/// Probabilities of the structural and parametric mutations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CppnMutationRates {
    pub splice_node: f64,
    pub add_link: f64,
    pub replace_activation: f64,
    pub perturb_link: f64,
    pub perturb_sigma: f64,
    pub weight_limit: f64,
}

impl Default for CppnMutationRates {
    fn default() -> Self {
        Self {
            splice_node: 0.2,
            add_link: 0.4,
            replace_activation: 0.3,
            perturb_link: 0.05,
            perturb_sigma: 0.5,
            weight_limit: 5.0,
        }
    }
}

/// Which mutations fired during one `mutate` call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CppnMutationReport {
    pub splice_attempted: bool,
    pub spliced: bool,
    pub add_link_attempted: bool,
    pub link_added: bool,
    pub activation_replaced: bool,
    pub links_perturbed: usize,
}

#[derive(Debug, Clone)]
enum Source {
    Input(usize),
    Sum(Vec<(usize, f64)>, ActivationKind),
}

/// A genome flattened into evaluation order.
#[derive(Debug, Clone)]
pub struct CompiledCppn {
    inputs: usize,
    nodes: usize,
    steps: Vec<(usize, Source)>,
    outputs: Vec<usize>,
}

impl CompiledCppn {
    pub fn query(&self, inputs: &[f64]) -> Result<Vec<f64>, CppnError> {
        if inputs.len() != self.inputs {
            return Err(CppnError::ArityMismatch {
                expected: self.inputs,
                actual: inputs.len(),
            });
        }
        let mut value = vec![0.0f64; self.nodes];
        for (i, source) in &self.steps {
            value[*i] = match source {
                Source::Input(k) => inputs[*k],
                Source::Sum(incoming, activation) => {
                    let sum: f64 = incoming.iter().map(|&(s, w)| value[s] * w).sum();
                    activation.apply(sum)
                }
            };
        }
        Ok(self.outputs.iter().map(|&o| value[o].clamp(-1.0, 1.0)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CppnGenome {
    inputs: usize,
    outputs: usize,
    nodes: Vec<NodeGene>,
    links: Vec<LinkGene>,
}

impl CppnGenome {
    /// Build and validate a genome. Input ids must be `0..inputs` and output
    /// ids `inputs..inputs + outputs`.
    pub fn new(inputs: usize, outputs: usize, nodes: Vec<NodeGene>, links: Vec<LinkGene>) -> Result<Self, CppnError> {
        let g = Self {
            inputs,
            outputs,
            nodes,
            links,
        };
        g.validate()?;
        Ok(g)
    }

    /// Inputs fully connected to outputs with uniform [−1, 1] weights, no
    /// hidden nodes, random output activations.
    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let mut nodes: Vec<NodeGene> = (0..inputs as u64)
            .map(|id| NodeGene {
                id,
                role: NodeRole::Input,
                activation: ActivationKind::Identity,
            })
            .collect();
        for o in 0..outputs as u64 {
            nodes.push(NodeGene {
                id: inputs as u64 + o,
                role: NodeRole::Output,
                activation: ActivationKind::random(rng),
            });
        }
        let mut links = Vec::with_capacity(inputs * outputs);
        for i in 0..inputs as u64 {
            for o in 0..outputs as u64 {
                let target = inputs as u64 + o;
                links.push(LinkGene {
                    innovation: link_innovation(i, target),
                    source: i,
                    target,
                    weight: rng.random_range(-1.0..=1.0),
                    enabled: true,
                });
            }
        }
        Self {
            inputs,
            outputs,
            nodes,
            links,
        }
    }

    pub fn input_arity(&self) -> usize {
        self.inputs
    }

    pub fn output_arity(&self) -> usize {
        self.outputs
    }

    pub fn nodes(&self) -> &[NodeGene] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkGene] {
        &self.links
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == NodeRole::Hidden).count()
    }

    pub fn output_node_id(&self, index: usize) -> NodeId {
        (self.inputs + index) as NodeId
    }

    /// Check structure: node roles and ids, link endpoints, unique
    /// innovations and node pairs, and acyclicity over all links.
    pub fn validate(&self) -> Result<(), CppnError> {
        let bad = |m: String| Err(CppnError::Invalid(m));
        let mut index = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return bad(format!("duplicate node id {}", n.id));
            }
        }
        for k in 0..self.inputs + self.outputs {
            let role = if k < self.inputs { NodeRole::Input } else { NodeRole::Output };
            match index.get(&(k as u64)) {
                Some(&i) if self.nodes[i].role == role => {}
                _ => return bad(format!("missing {role:?} node {k}")),
            }
        }
        let declared = self.nodes.iter().filter(|n| n.role != NodeRole::Hidden).count();
        if declared != self.inputs + self.outputs {
            return bad("unexpected input or output nodes".into());
        }
        if self.nodes.iter().any(|n| n.role == NodeRole::Hidden && n.id & HIDDEN_ID_FLAG == 0) {
            return bad("hidden node id without hidden flag".into());
        }
        let mut innovations = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        for l in &self.links {
            if !innovations.insert(l.innovation) {
                return bad(format!("duplicate innovation {}", l.innovation));
            }
            if !pairs.insert((l.source, l.target)) {
                return bad(format!("duplicate link {} -> {}", l.source, l.target));
            }
            let (Some(&s), Some(&t)) = (index.get(&l.source), index.get(&l.target)) else {
                return bad(format!("link {} references a missing node", l.innovation));
            };
            if self.nodes[s].role == NodeRole::Output || self.nodes[t].role == NodeRole::Input {
                return bad(format!("link {} runs against the feed-forward direction", l.innovation));
            }
            if !l.weight.is_finite() {
                return bad(format!("link {} has a non-finite weight", l.innovation));
            }
        }
        if self.topological_order(false).is_none() {
            return bad("links form a cycle".into());
        }
        Ok(())
    }

    /// Node indices in dependency order, or `None` on a cycle.
    fn topological_order(&self, enabled_only: bool) -> Option<Vec<usize>> {
        let index: BTreeMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for l in self.links.iter().filter(|l| l.enabled || !enabled_only) {
            let (s, t) = (index[&l.source], index[&l.target]);
            indegree[t] += 1;
            out[s].push(t);
        }
        let mut queue: VecDeque<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &t in &out[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Evaluate the network. Outputs are clamped to [−1, 1].
    pub fn query(&self, inputs: &[f64]) -> Result<Vec<f64>, CppnError> {
        self.compile().query(inputs)
    }

    /// Evaluation plan for repeated queries of the same genome.
    pub fn compile(&self) -> CompiledCppn {
        let index: BTreeMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nodes.len()];
        for l in self.links.iter().filter(|l| l.enabled) {
            incoming[index[&l.target]].push((index[&l.source], l.weight));
        }
        let order = self.topological_order(true).expect("validated genomes are acyclic");
        let steps = order
            .into_iter()
            .map(|i| {
                let node = &self.nodes[i];
                let source = match node.role {
                    NodeRole::Input => Source::Input(node.id as usize),
                    _ => Source::Sum(std::mem::take(&mut incoming[i]), node.activation),
                };
                (i, source)
            })
            .collect();
        CompiledCppn {
            inputs: self.inputs,
            nodes: self.nodes.len(),
            steps,
            outputs: (0..self.outputs).map(|o| index[&self.output_node_id(o)]).collect(),
        }
    }

    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.links.iter().filter(|l| l.source == n).map(|l| l.target));
            }
        }
        false
    }

    pub fn mutate<R: Rng + ?Sized>(&self, rates: &CppnMutationRates, rng: &mut R) -> (Self, CppnMutationReport) {
        let mut g = self.clone();
        let mut report = CppnMutationReport::default();
        if rng.random::<f64>() < rates.splice_node {
            report.splice_attempted = true;
            report.spliced = g.splice_node(rng);
        }
        if rng.random::<f64>() < rates.add_link {
            report.add_link_attempted = true;
            report.link_added = g.add_link(rng);
        }
        if rng.random::<f64>() < rates.replace_activation {
            report.activation_replaced = g.replace_activation(rng);
        }
        let normal = Normal::new(0.0, rates.perturb_sigma).expect("finite sigma");
        for l in &mut g.links {
            if rng.random::<f64>() < rates.perturb_link {
                l.weight = (l.weight + normal.sample(rng)).clamp(-rates.weight_limit, rates.weight_limit);
                report.links_perturbed += 1;
            }
        }
        debug_assert!(g.validate().is_ok());
        (g, report)
    }

    /// Disable a random enabled link and route it through a new hidden node.
    fn splice_node<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let enabled: Vec<usize> = (0..self.links.len()).filter(|&i| self.links[i].enabled).collect();
        if enabled.is_empty() {
            return false;
        }
        let li = enabled[rng.random_range(0..enabled.len())];
        let activation = ActivationKind::random(rng);
        let old = self.links[li].clone();
        let id = spliced_node_id(old.innovation);
        if self.nodes.iter().any(|n| n.id == id) {
            return false;
        }
        self.links[li].enabled = false;
        self.nodes.push(NodeGene {
            id,
            role: NodeRole::Hidden,
            activation,
        });
        self.links.push(LinkGene {
            innovation: link_innovation(old.source, id),
            source: old.source,
            target: id,
            weight: 1.0,
            enabled: true,
        });
        self.links.push(LinkGene {
            innovation: link_innovation(id, old.target),
            source: id,
            target: old.target,
            weight: old.weight,
            enabled: true,
        });
        true
    }

    /// Connect a random unconnected pair without creating a cycle.
    fn add_link<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let existing: BTreeSet<(NodeId, NodeId)> = self.links.iter().map(|l| (l.source, l.target)).collect();
        let innovations: BTreeSet<u64> = self.links.iter().map(|l| l.innovation).collect();
        let mut candidates = Vec::new();
        for s in self.nodes.iter().filter(|n| n.role != NodeRole::Output) {
            for t in self.nodes.iter().filter(|n| n.role != NodeRole::Input) {
                if s.id != t.id
                    && !existing.contains(&(s.id, t.id))
                    && !innovations.contains(&link_innovation(s.id, t.id))
                    && !self.reaches(t.id, s.id)
                {
                    candidates.push((s.id, t.id));
                }
            }
        }
        if candidates.is_empty() {
            return false;
        }
        let (source, target) = candidates[rng.random_range(0..candidates.len())];
        self.links.push(LinkGene {
            innovation: link_innovation(source, target),
            source,
            target,
            weight: rng.random_range(-1.0..=1.0),
            enabled: true,
        });
        true
    }

    fn replace_activation<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let mutable: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].role != NodeRole::Input)
            .collect();
        if mutable.is_empty() {
            return false;
        }
        let i = mutable[rng.random_range(0..mutable.len())];
        self.nodes[i].activation = self.nodes[i].activation.random_other(rng);
        true
    }

    /// Align links by innovation. Structure (nodes, links, enabled flags)
    /// comes from `self`; matching links take their weight, and matching
    /// nodes their activation, from either parent at random.
    pub fn crossover<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> Result<Self, CppnError> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(CppnError::ArityMismatch {
                expected: self.inputs + self.outputs,
                actual: other.inputs + other.outputs,
            });
        }
        let other_nodes: BTreeMap<NodeId, &NodeGene> = other.nodes.iter().map(|n| (n.id, n)).collect();
        let other_links: BTreeMap<u64, &LinkGene> = other.links.iter().map(|l| (l.innovation, l)).collect();
        let mut child = self.clone();
        for n in &mut child.nodes {
            if n.role == NodeRole::Input {
                continue;
            }
            if let Some(m) = other_nodes.get(&n.id) {
                if rng.random::<bool>() {
                    n.activation = m.activation;
                }
            }
        }
        for l in &mut child.links {
            if let Some(m) = other_links.get(&l.innovation) {
                if rng.random::<bool>() {
                    l.weight = m.weight;
                }
            }
        }
        debug_assert!(child.validate().is_ok());
        Ok(child)
    }
}
