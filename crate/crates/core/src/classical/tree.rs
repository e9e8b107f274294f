//! Explicit extensive-form trees: the trivial protocol and random trees
//! used by the impossibility property checks.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{analysis, ClassicalError, GameForm, GameNode, Party, ProtocolTree};

const TRIVIAL_LIMIT: usize = 10;

#[derive(Debug, Clone)]
pub(crate) enum ExplicitNode {
    Leaf { output: usize },
    Internal { mover: Party, edges: Vec<(f64, u32)> },
}

/// An arena-backed game tree. Children are created before their parents, so
/// node ids increase from leaves toward the root.
#[derive(Debug, Clone)]
pub struct ExplicitTree {
    nodes: Vec<ExplicitNode>,
    n_bits: usize,
    root: u32,
    symmetric_outputs: bool,
}

/// Incrementally builds an [`ExplicitTree`] bottom-up.
pub struct TreeBuilder {
    nodes: Vec<ExplicitNode>,
    n_bits: usize,
}

impl TreeBuilder {
    pub fn new(n_bits: usize) -> Self {
        Self {
            nodes: Vec::new(),
            n_bits,
        }
    }

    pub fn leaf(&mut self, output: usize) -> Result<u32, ClassicalError> {
        if output >= (1usize << self.n_bits) {
            return Err(ClassicalError::InvalidTree(format!(
                "leaf output {output} out of range for {} bits",
                self.n_bits
            )));
        }
        self.nodes.push(ExplicitNode::Leaf { output });
        Ok(self.nodes.len() as u32 - 1)
    }

    pub fn internal(
        &mut self,
        mover: Party,
        edges: Vec<(f64, u32)>,
    ) -> Result<u32, ClassicalError> {
        if edges.is_empty() {
            return Err(ClassicalError::InvalidTree(
                "internal node with no edges".to_string(),
            ));
        }
        let total: f64 = edges.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-9 || edges.iter().any(|&(p, _)| p < 0.0) {
            return Err(ClassicalError::InvalidTree(format!(
                "honest move distribution sums to {total}"
            )));
        }
        if edges.iter().any(|&(_, t)| t as usize >= self.nodes.len()) {
            return Err(ClassicalError::InvalidTree(
                "edge to a node that does not exist yet".to_string(),
            ));
        }
        self.nodes.push(ExplicitNode::Internal { mover, edges });
        Ok(self.nodes.len() as u32 - 1)
    }

    /// Finishes the tree. `symmetric_outputs` asserts that the honest
    /// structure is invariant under relabeling output strings, enabling the
    /// all-zeros shortcut in target enumeration.
    pub fn build(self, root: u32, symmetric_outputs: bool) -> Result<ExplicitTree, ClassicalError> {
        if root as usize >= self.nodes.len() {
            return Err(ClassicalError::InvalidTree("root does not exist".to_string()));
        }
        Ok(ExplicitTree {
            nodes: self.nodes,
            n_bits: self.n_bits,
            root,
            symmetric_outputs,
        })
    }
}

impl GameForm for ExplicitTree {
    type State = u32;

    fn root(&self) -> u32 {
        self.root
    }

    fn expand(&self, s: u32) -> GameNode<u32> {
        match &self.nodes[s as usize] {
            ExplicitNode::Leaf { output } => GameNode::Leaf { output: *output },
            ExplicitNode::Internal { mover, edges } => GameNode::Internal {
                mover: *mover,
                moves: edges.clone(),
            },
        }
    }

    fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn states_bottom_up(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32).collect()
    }

    fn output_symmetric(&self) -> bool {
        self.symmetric_outputs
    }

    fn greedy_init(&self, cheater: Party) -> BTreeMap<u32, usize> {
        // Steer toward the most forcible string, ties broken toward the
        // lexicographically first target and the first edge.
        let best_target = (0..(1usize << self.n_bits))
            .map(|c| (c, analysis::string_prob(self, cheater, c)))
            .fold((0usize, f64::NEG_INFINITY), |acc, (c, v)| {
                if v > acc.1 + 1e-15 {
                    (c, v)
                } else {
                    acc
                }
            })
            .0;
        let mut init = BTreeMap::new();
        for s in self.states_bottom_up() {
            if let ExplicitNode::Internal { mover, edges } = &self.nodes[s as usize] {
                if *mover != cheater {
                    continue;
                }
                let choice = edges
                    .iter()
                    .enumerate()
                    .map(|(k, &(_, t))| (k, analysis::string_prob_at(self, cheater, best_target, t)))
                    .fold((0usize, f64::NEG_INFINITY), |acc, (k, v)| {
                        if v > acc.1 + 1e-15 {
                            (k, v)
                        } else {
                            acc
                        }
                    })
                    .0;
                init.insert(s, choice);
            }
        }
        init
    }

    fn state_label(&self, s: u32) -> String {
        format!("node{s}")
    }

    fn choice_label(&self, s: u32, choice: usize) -> String {
        match &self.nodes[s as usize] {
            ExplicitNode::Internal { .. } => format!("edge{choice}"),
            ExplicitNode::Leaf { .. } => "leaf".to_string(),
        }
    }
}

/// The trivial protocol: Alice announces the first `n/2` bits in one
/// message, then Bob announces the rest.
pub fn build_trivial(n: usize) -> Result<ProtocolTree, ClassicalError> {
    if n == 0 || n % 2 != 0 {
        return Err(ClassicalError::OddLength(n));
    }
    if n > TRIVIAL_LIMIT {
        return Err(ClassicalError::TooLarge {
            n,
            limit: TRIVIAL_LIMIT,
            what: "the trivial protocol tree",
        });
    }
    let half = n / 2;
    let messages = 1usize << half;
    let uniform = 1.0 / messages as f64;
    let mut builder = TreeBuilder::new(n);
    let mut bob_nodes = Vec::with_capacity(messages);
    for alice_half in 0..messages {
        let mut edges = Vec::with_capacity(messages);
        for bob_half in 0..messages {
            let leaf = builder.leaf((alice_half << half) | bob_half)?;
            edges.push((uniform, leaf));
        }
        bob_nodes.push((uniform, builder.internal(Party::Bob, edges)?));
    }
    let root = builder.internal(Party::Alice, bob_nodes)?;
    Ok(ProtocolTree::Explicit(builder.build(root, true)?))
}

/// A random tree whose honest output distribution is exactly uniform: all
/// leaves sit at the same reach probability `2^-k` and every string labels
/// the same number of leaves.
pub fn random_uniform_output_tree(
    n_bits: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ProtocolTree, ClassicalError> {
    assert!(n_bits >= 1 && n_bits <= 4, "generator meant for small n");
    let extra = rng.gen_range(0..=2u32);
    let k = n_bits as u32 + extra;
    let copies = 1usize << extra;
    let mut labels: Vec<usize> = (0..(1usize << n_bits))
        .flat_map(|c| std::iter::repeat(c).take(copies))
        .collect();
    // Fisher-Yates with the seeded generator.
    for i in (1..labels.len()).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }
    let mut builder = TreeBuilder::new(n_bits);
    let mut next_label = labels.into_iter();
    let root = grow_uniform(&mut builder, &mut next_label, k, rng)?;
    Ok(ProtocolTree::Explicit(builder.build(root, false)?))
}

fn grow_uniform(
    builder: &mut TreeBuilder,
    labels: &mut impl Iterator<Item = usize>,
    k: u32,
    rng: &mut ChaCha8Rng,
) -> Result<u32, ClassicalError> {
    if k == 0 {
        return builder.leaf(labels.next().expect("label supply matches leaf count"));
    }
    let arity_bits = if k >= 2 && rng.gen::<bool>() { 2 } else { 1 };
    let arity = 1usize << arity_bits;
    let mut edges = Vec::with_capacity(arity);
    for _ in 0..arity {
        let child = grow_uniform(builder, labels, k - arity_bits, rng)?;
        edges.push((1.0 / arity as f64, child));
    }
    let mover = if rng.gen::<bool>() {
        Party::Alice
    } else {
        Party::Bob
    };
    builder.internal(mover, edges)
}

/// A random tree with arbitrary arities (up to 4), movers, honest
/// distributions, and leaf labels. Used for properties that hold for every
/// conceivable protocol.
pub fn random_labeled_tree(
    n_bits: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ProtocolTree, ClassicalError> {
    assert!(n_bits >= 1 && n_bits <= 4, "generator meant for small n");
    let mut builder = TreeBuilder::new(n_bits);
    let depth = rng.gen_range(1..=3u32);
    let root = grow_labeled(&mut builder, n_bits, depth, rng)?;
    Ok(ProtocolTree::Explicit(builder.build(root, false)?))
}

fn grow_labeled(
    builder: &mut TreeBuilder,
    n_bits: usize,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Result<u32, ClassicalError> {
    if depth == 0 {
        return builder.leaf(rng.gen_range(0..(1usize << n_bits)));
    }
    let arity = rng.gen_range(2..=4usize);
    let uniform = rng.gen::<bool>();
    let mut weights: Vec<f64> = (0..arity)
        .map(|_| if uniform { 1.0 } else { 0.1 + rng.gen::<f64>() })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut edges = Vec::with_capacity(arity);
    for w in weights {
        let early_leaf = depth > 1 && rng.gen::<f64>() < 0.3;
        let child = if early_leaf {
            builder.leaf(rng.gen_range(0..(1usize << n_bits)))?
        } else {
            grow_labeled(builder, n_bits, depth - 1, rng)?
        };
        edges.push((w, child));
    }
    let mover = if rng.gen::<bool>() {
        Party::Alice
    } else {
        Party::Bob
    };
    builder.internal(mover, edges)
}
