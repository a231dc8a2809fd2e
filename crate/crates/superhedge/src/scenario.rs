//! Finite scenario trees with a finite family of transition kernels per node.
//!
//! Nodes are stored in an arena indexed by id; a parent always has a smaller
//! id than its children, and children are listed in ascending id order. The
//! kernels of a node are probability vectors over that ordered child list.

use crate::cone::{ConeError, SolvencyCone};
use crate::Q;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub parent: Option<usize>,
    pub cone: SolvencyCone,
    pub kernels: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    pub time: usize,
    pub children: Vec<usize>,
    pub cone: SolvencyCone,
    pub kernels: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    horizon: usize,
    d: usize,
    nodes: Vec<Node>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("horizon must be at least 1")]
    HorizonZero,
    #[error("tree has no nodes")]
    Empty,
    #[error("node ids must be 0..n in order; found {0} at position {1}")]
    IdsNotContiguous(usize, usize),
    #[error("node 0 must be the root and only node 0 may lack a parent (node {0})")]
    BadRoot(usize),
    #[error("node {node} names parent {parent}, which must be an earlier node")]
    BadParent { node: usize, parent: usize },
    #[error("node {node} has {got} assets, expected {expected}")]
    AssetCount { node: usize, expected: usize, got: usize },
    #[error("node {node} is a leaf at time {time} before the horizon")]
    EarlyLeaf { node: usize, time: usize },
    #[error("node {node} lies beyond the horizon")]
    BeyondHorizon { node: usize },
    #[error("node {node} has children but no kernel")]
    MissingKernel { node: usize },
    #[error("terminal node {node} must not carry kernels")]
    TerminalKernel { node: usize },
    #[error("kernel {kernel} of node {node} has {got} entries for {expected} children")]
    KernelLength { node: usize, kernel: usize, expected: usize, got: usize },
    #[error("kernel {kernel} of node {node} has a negative entry")]
    KernelNegative { node: usize, kernel: usize },
    #[error("kernel {kernel} of node {node} does not sum to 1")]
    KernelNotNormalized { node: usize, kernel: usize },
}

/// Nodes that some kernel selection charges with positive probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    pub reachable: Vec<bool>,
}

impl SupportMask {
    pub fn is_reachable(&self, id: usize) -> bool {
        self.reachable[id]
    }
}

impl ScenarioTree {
    pub fn new(horizon: usize, specs: Vec<NodeSpec>) -> Result<ScenarioTree, TreeError> {
        if horizon == 0 {
            return Err(TreeError::HorizonZero);
        }
        if specs.is_empty() {
            return Err(TreeError::Empty);
        }
        let d = specs[0].cone.d();
        let mut nodes: Vec<Node> = Vec::with_capacity(specs.len());
        for (pos, s) in specs.into_iter().enumerate() {
            if s.id != pos {
                return Err(TreeError::IdsNotContiguous(s.id, pos));
            }
            if s.cone.d() != d {
                return Err(TreeError::AssetCount { node: pos, expected: d, got: s.cone.d() });
            }
            let time = match (pos, s.parent) {
                (0, None) => 0,
                (0, Some(_)) | (_, None) => return Err(TreeError::BadRoot(pos)),
                (_, Some(p)) if p >= pos => return Err(TreeError::BadParent { node: pos, parent: p }),
                (_, Some(p)) => nodes[p].time + 1,
            };
            if time > horizon {
                return Err(TreeError::BeyondHorizon { node: pos });
            }
            if let Some(p) = s.parent {
                nodes[p].children.push(pos);
            }
            nodes.push(Node { id: pos, parent: s.parent, time, children: Vec::new(), cone: s.cone, kernels: s.kernels });
        }
        for n in &nodes {
            if n.time == horizon {
                if !n.kernels.is_empty() {
                    return Err(TreeError::TerminalKernel { node: n.id });
                }
                continue;
            }
            if n.children.is_empty() {
                return Err(TreeError::EarlyLeaf { node: n.id, time: n.time });
            }
            if n.kernels.is_empty() {
                return Err(TreeError::MissingKernel { node: n.id });
            }
            for (k, ker) in n.kernels.iter().enumerate() {
                if ker.len() != n.children.len() {
                    return Err(TreeError::KernelLength { node: n.id, kernel: k, expected: n.children.len(), got: ker.len() });
                }
                if ker.iter().any(Signed::is_negative) {
                    return Err(TreeError::KernelNegative { node: n.id, kernel: k });
                }
                if !ker.iter().fold(Q::zero(), |a, b| a + b).is_one() {
                    return Err(TreeError::KernelNotNormalized { node: n.id, kernel: k });
                }
            }
        }
        Ok(ScenarioTree { horizon, d, nodes })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cone(&self, id: usize) -> &SolvencyCone {
        &self.nodes[id].cone
    }

    pub fn is_terminal(&self, id: usize) -> bool {
        self.nodes[id].time == self.horizon
    }

    pub fn terminal_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.is_terminal(i)).collect()
    }

    pub fn nodes_at(&self, t: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].time == t).collect()
    }

    /// Ids from the root down to `id`, inclusive.
    pub fn path(&self, id: usize) -> Vec<usize> {
        let mut p = vec![id];
        let mut cur = id;
        while let Some(par) = self.nodes[cur].parent {
            p.push(par);
            cur = par;
        }
        p.reverse();
        p
    }

    /// Children charged by at least one kernel.
    pub fn supported_children(&self, id: usize) -> Vec<usize> {
        let n = &self.nodes[id];
        n.children
            .iter()
            .enumerate()
            .filter(|(j, _)| n.kernels.iter().any(|k| k[*j].is_positive()))
            .map(|(_, &c)| c)
            .collect()
    }

    pub fn polar_mask(&self) -> SupportMask {
        polar_mask(self)
    }

    /// A copy with one more kernel at `node`.
    pub fn with_kernel(&self, node: usize, kernel: Vec<Q>) -> Result<ScenarioTree, TreeError> {
        let specs = self
            .nodes
            .iter()
            .map(|n| {
                let mut kernels = n.kernels.clone();
                if n.id == node {
                    kernels.push(kernel.clone());
                }
                NodeSpec { id: n.id, parent: n.parent, cone: n.cone.clone(), kernels }
            })
            .collect();
        ScenarioTree::new(self.horizon, specs)
    }
}

pub fn polar_mask(tree: &ScenarioTree) -> SupportMask {
    let mut reachable = vec![false; tree.len()];
    reachable[0] = true;
    for id in 0..tree.len() {
        if reachable[id] {
            for c in tree.supported_children(id) {
                reachable[c] = true;
            }
        }
    }
    SupportMask { reachable }
}

/// `η(n) ∈ -K(n)` at every reachable node.
pub fn is_admissible(tree: &ScenarioTree, eta: &[Vec<Q>]) -> Result<bool, ConeError> {
    if eta.len() != tree.len() {
        return Err(ConeError::DimensionMismatch { expected: tree.len(), got: eta.len() });
    }
    let mask = tree.polar_mask();
    for (id, e) in eta.iter().enumerate() {
        let ok = tree.cone(id).in_minus_cone(e)?;
        if mask.reachable[id] && !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cone::{build_cone, BidAskSpec};
    use crate::rational::{q, qi, qv};

    pub(crate) fn unit_cone() -> SolvencyCone {
        build_cone(&BidAskSpec { mid: qv(&[1, 1]), factor: qi(2), intervals: None, frictionless: false }).unwrap()
    }

    /// Depth-two binary tree; `kernels[i]` is the kernel list of node `i`.
    fn binary(kernels: [Vec<Vec<Q>>; 3]) -> ScenarioTree {
        let [k0, k1, k2] = kernels;
        let mut specs = vec![
            NodeSpec { id: 0, parent: None, cone: unit_cone(), kernels: k0 },
            NodeSpec { id: 1, parent: Some(0), cone: unit_cone(), kernels: k1 },
            NodeSpec { id: 2, parent: Some(0), cone: unit_cone(), kernels: k2 },
        ];
        for (id, parent) in [(3, 1), (4, 1), (5, 2), (6, 2)] {
            specs.push(NodeSpec { id, parent: Some(parent), cone: unit_cone(), kernels: vec![] });
        }
        ScenarioTree::new(2, specs).unwrap()
    }

    fn half() -> Vec<Q> {
        vec![q(1, 2), q(1, 2)]
    }

    #[test]
    fn full_support_reaches_everything() {
        let t = binary([vec![half()], vec![half()], vec![half()]]);
        assert!(t.polar_mask().reachable.iter().all(|&r| r));
    }

    #[test]
    fn uncharged_child_is_polar_with_its_subtree() {
        let t = binary([vec![qv(&[1, 0])], vec![half()], vec![half()]]);
        assert_eq!(t.polar_mask().reachable, vec![true, true, false, true, true, false, false]);
    }

    #[test]
    fn union_of_degenerate_kernels() {
        let t = binary([vec![qv(&[1, 0]), qv(&[0, 1])], vec![half()], vec![half()]]);
        assert!(t.polar_mask().reachable.iter().all(|&r| r));
    }

    #[test]
    fn admissibility_examples() {
        let t = binary([vec![qv(&[1, 0])], vec![half()], vec![half()]]);
        let zero = vec![qv(&[0, 0]); 7];
        assert!(is_admissible(&t, &zero).unwrap());
        let mut eta = zero.clone();
        eta[1] = qv(&[1, -2]);
        assert!(is_admissible(&t, &eta).unwrap());
        eta[1] = qv(&[1, -1]);
        assert!(!is_admissible(&t, &eta).unwrap());
        let mut polar_only = zero;
        polar_only[5] = qv(&[5, 5]);
        assert!(is_admissible(&t, &polar_only).unwrap());
        assert!(is_admissible(&t, &[qv(&[0, 0])]).is_err());
    }

    #[test]
    fn structural_errors() {
        let bad_kernel = vec![NodeSpec { id: 0, parent: None, cone: unit_cone(), kernels: vec![qv(&[1])] }];
        assert!(matches!(ScenarioTree::new(1, bad_kernel), Err(TreeError::EarlyLeaf { .. })));
        let specs = vec![
            NodeSpec { id: 0, parent: None, cone: unit_cone(), kernels: vec![vec![q(1, 3)]] },
            NodeSpec { id: 1, parent: Some(0), cone: unit_cone(), kernels: vec![] },
        ];
        assert!(matches!(ScenarioTree::new(1, specs), Err(TreeError::KernelNotNormalized { .. })));
        let specs = vec![
            NodeSpec { id: 0, parent: None, cone: unit_cone(), kernels: vec![qv(&[1])] },
            NodeSpec { id: 1, parent: Some(1), cone: unit_cone(), kernels: vec![] },
        ];
        assert!(matches!(ScenarioTree::new(1, specs), Err(TreeError::BadParent { .. })));
    }

    /// Union of supports over every way of picking one kernel per node.
    fn enumerate_selections(t: &ScenarioTree) -> Vec<bool> {
        let inner: Vec<usize> = (0..t.len()).filter(|&i| !t.is_terminal(i)).collect();
        let total: usize = inner.iter().map(|&i| t.node(i).kernels.len()).product();
        assert!(total <= 64);
        let mut seen = vec![false; t.len()];
        for mut code in 0..total {
            let mut pick = vec![0; t.len()];
            for &i in &inner {
                let k = t.node(i).kernels.len();
                pick[i] = code % k;
                code /= k;
            }
            let mut prob = vec![Q::zero(); t.len()];
            prob[0] = Q::one();
            for i in 0..t.len() {
                if t.is_terminal(i) {
                    continue;
                }
                let n = t.node(i);
                for (j, &c) in n.children.iter().enumerate() {
                    prob[c] = &prob[i] * &n.kernels[pick[i]][j];
                }
            }
            for i in 0..t.len() {
                seen[i] |= prob[i].is_positive();
            }
        }
        seen
    }

    #[test]
    fn mask_matches_selection_enumeration() {
        let cases = [
            binary([vec![qv(&[1, 0]), qv(&[0, 1])], vec![qv(&[0, 1])], vec![half(), qv(&[1, 0])]]),
            binary([vec![qv(&[1, 0])], vec![qv(&[0, 1]), qv(&[0, 1])], vec![half()]]),
            binary([vec![half(), qv(&[0, 1])], vec![qv(&[1, 0]), qv(&[0, 1]), half()], vec![qv(&[0, 1])]]),
        ];
        for t in cases {
            assert_eq!(t.polar_mask().reachable, enumerate_selections(&t));
        }
    }

    #[test]
    fn adding_a_kernel_only_grows_the_mask() {
        let t = binary([vec![qv(&[1, 0])], vec![qv(&[1, 0])], vec![qv(&[0, 1])]]);
        let before = t.polar_mask().reachable;
        for node in 0..3 {
            for k in [qv(&[0, 1]), half()] {
                let after = t.with_kernel(node, k).unwrap().polar_mask().reachable;
                assert!(before.iter().zip(&after).all(|(b, a)| !b || *a));
            }
        }
    }

    #[test]
    fn paths_and_layers() {
        let t = binary([vec![half()], vec![half()], vec![half()]]);
        assert_eq!(t.path(5), vec![0, 2, 5]);
        assert_eq!(t.nodes_at(1), vec![1, 2]);
        assert_eq!(t.terminal_nodes(), vec![3, 4, 5, 6]);
    }
}
