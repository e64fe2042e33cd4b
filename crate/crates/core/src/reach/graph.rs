use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Input(usize),
    Const(f64),
    /// `bias + sum(weight * node)`.
    Affine { terms: Vec<(NodeId, f64)>, bias: f64 },
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Sin(NodeId),
    Cos(NodeId),
    /// `exp(-(x - center)^2 / (2 width^2))`.
    Rbf { input: NodeId, center: f64, width: f64 },
    Clamp { input: NodeId, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
}

impl Node {
    pub fn parents(&self) -> Vec<NodeId> {
        match &self.kind {
            NodeKind::Input(_) | NodeKind::Const(_) => vec![],
            NodeKind::Affine { terms, .. } => terms.iter().map(|t| t.0).collect(),
            NodeKind::Add(a, b) | NodeKind::Mul(a, b) => vec![*a, *b],
            NodeKind::Sin(a) | NodeKind::Cos(a) => vec![*a],
            NodeKind::Rbf { input, .. } | NodeKind::Clamp { input, .. } => vec![*input],
        }
    }
}

/// Directed acyclic graph of scalar nodes stored in topological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompGraph {
    nodes: Vec<Node>,
    n_inputs: usize,
    outputs: Vec<NodeId>,
}

impl CompGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn input_dim(&self) -> usize {
        self.n_inputs
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// Evaluates every node at input `z`.
    pub fn eval_all(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n_inputs, "graph input dimension");
        let mut v = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let value = match &node.kind {
                NodeKind::Input(i) => z[*i],
                NodeKind::Const(c) => *c,
                NodeKind::Affine { terms, bias } => {
                    terms.iter().fold(*bias, |acc, (id, w)| acc + w * v[*id])
                }
                NodeKind::Add(a, b) => v[*a] + v[*b],
                NodeKind::Mul(a, b) => v[*a] * v[*b],
                NodeKind::Sin(a) => f64::sin(v[*a]),
                NodeKind::Cos(a) => f64::cos(v[*a]),
                NodeKind::Rbf { input, center, width } => {
                    let d = (v[*input] - center) / width;
                    (-0.5 * d * d).exp()
                }
                NodeKind::Clamp { input, lo, hi } => v[*input].clamp(*lo, *hi),
            };
            v.push(value);
        }
        v
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        let all = self.eval_all(z);
        self.outputs.iter().map(|&o| all[o]).collect()
    }
}

/// Append-only graph construction; a node may only reference earlier nodes,
/// so the insertion order is a topological order.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    n_inputs: usize,
}

impl GraphBuilder {
    pub fn new(n_inputs: usize) -> Self {
        let mut b = Self {
            nodes: Vec::new(),
            n_inputs,
        };
        for i in 0..n_inputs {
            b.push(NodeKind::Input(i));
        }
        b
    }

    /// Node id of input `i`.
    pub fn input(&self, i: usize) -> NodeId {
        assert!(i < self.n_inputs);
        i
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { kind });
        id
    }

    pub fn constant(&mut self, c: f64) -> NodeId {
        self.push(NodeKind::Const(c))
    }

    pub fn affine(&mut self, terms: &[(NodeId, f64)], bias: f64) -> NodeId {
        let terms = terms.iter().copied().filter(|t| t.1 != 0.0).collect();
        self.push(NodeKind::Affine { terms, bias })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(NodeKind::Add(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(NodeKind::Mul(a, b))
    }

    pub fn sin(&mut self, a: NodeId) -> NodeId {
        self.push(NodeKind::Sin(a))
    }

    pub fn cos(&mut self, a: NodeId) -> NodeId {
        self.push(NodeKind::Cos(a))
    }

    pub fn rbf(&mut self, input: NodeId, center: f64, width: f64) -> NodeId {
        self.push(NodeKind::Rbf { input, center, width })
    }

    pub fn clamp(&mut self, input: NodeId, lo: f64, hi: f64) -> NodeId {
        self.push(NodeKind::Clamp { input, lo, hi })
    }

    /// Inlines `graph` with its inputs bound to `inputs`; returns its outputs.
    pub fn embed(&mut self, graph: &CompGraph, inputs: &[NodeId]) -> Vec<NodeId> {
        assert_eq!(inputs.len(), graph.input_dim());
        let mut map = Vec::with_capacity(graph.node_count());
        for node in graph.nodes() {
            let id = match &node.kind {
                NodeKind::Input(i) => inputs[*i],
                NodeKind::Const(c) => self.constant(*c),
                NodeKind::Affine { terms, bias } => {
                    let t: Vec<_> = terms.iter().map(|(n, w)| (map[*n], *w)).collect();
                    self.push(NodeKind::Affine { terms: t, bias: *bias })
                }
                NodeKind::Add(a, b) => self.add(map[*a], map[*b]),
                NodeKind::Mul(a, b) => self.mul(map[*a], map[*b]),
                NodeKind::Sin(a) => self.sin(map[*a]),
                NodeKind::Cos(a) => self.cos(map[*a]),
                NodeKind::Rbf { input, center, width } => self.rbf(map[*input], *center, *width),
                NodeKind::Clamp { input, lo, hi } => self.clamp(map[*input], *lo, *hi),
            };
            map.push(id);
        }
        graph.outputs().iter().map(|&o| map[o]).collect()
    }

    /// Finalizes the graph, checking parameters and reachability from the inputs.
    pub fn finish(self, outputs: Vec<NodeId>) -> Result<CompGraph> {
        if outputs.is_empty() {
            return Err(Error::InvalidArgument("graph needs at least one output".into()));
        }
        let mut live = vec![false; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            for p in node.parents() {
                if p >= id {
                    return Err(Error::InvalidArgument(format!("node {id} references later node {p}")));
                }
            }
            match &node.kind {
                NodeKind::Input(_) => live[id] = true,
                NodeKind::Const(c) if !c.is_finite() => return Err(Error::NonFinite("graph constant")),
                NodeKind::Affine { terms, bias } => {
                    if !bias.is_finite() || terms.iter().any(|t| !t.1.is_finite()) {
                        return Err(Error::NonFinite("affine node"));
                    }
                }
                NodeKind::Rbf { width, .. } if !(*width > 0.0) => {
                    return Err(Error::InvalidArgument("rbf width must be positive".into()))
                }
                NodeKind::Clamp { lo, hi, .. } if !(lo <= hi) => {
                    return Err(Error::InvalidArgument("clamp bounds out of order".into()))
                }
                _ => {}
            }
        }
        if let Some(&o) = outputs.iter().find(|&&o| o >= self.nodes.len()) {
            return Err(Error::InvalidArgument(format!("output {o} does not exist")));
        }
        Ok(CompGraph {
            nodes: self.nodes,
            n_inputs: self.n_inputs,
            outputs,
        })
    }
}
