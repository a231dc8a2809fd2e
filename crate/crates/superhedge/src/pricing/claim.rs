//! Claims: a payoff vector per terminal node plus static options.

use crate::rational::cash;
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Option `ζ` traded at time 0 with bid `-bound` and ask `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticOption {
    pub payoff: BTreeMap<usize, Vec<Q>>,
    pub bound: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimSpec {
    /// Terminal node id to `ξ(node) ∈ Q^d`.
    pub xi: BTreeMap<usize, Vec<Q>>,
    pub statics: Vec<StaticOption>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClaimError {
    #[error("payoff {what} is missing terminal node {node}")]
    MissingNode { what: String, node: usize },
    #[error("payoff {what} names node {node}, which is not terminal")]
    NotTerminal { what: String, node: usize },
    #[error("payoff {what} at node {node} has length {got}, expected {expected}")]
    Length { what: String, node: usize, expected: usize, got: usize },
    #[error("static option {0} has a negative price bound")]
    NegativeBound(usize),
    #[error("static option {0} pays zero everywhere")]
    ZeroOption(usize),
}

fn check_payoff(tree: &ScenarioTree, what: &str, p: &BTreeMap<usize, Vec<Q>>) -> Result<(), ClaimError> {
    for (&node, v) in p {
        if node >= tree.len() || !tree.is_terminal(node) {
            return Err(ClaimError::NotTerminal { what: what.into(), node });
        }
        if v.len() != tree.d() {
            return Err(ClaimError::Length { what: what.into(), node, expected: tree.d(), got: v.len() });
        }
    }
    match tree.terminal_nodes().into_iter().find(|n| !p.contains_key(n)) {
        Some(node) => Err(ClaimError::MissingNode { what: what.into(), node }),
        None => Ok(()),
    }
}

impl ClaimSpec {
    pub fn new(xi: BTreeMap<usize, Vec<Q>>) -> Self {
        ClaimSpec { xi, statics: Vec::new() }
    }

    pub fn zero(tree: &ScenarioTree) -> Self {
        Self::new(tree.terminal_nodes().into_iter().map(|n| (n, vec![Q::zero(); tree.d()])).collect())
    }

    pub fn validate(&self, tree: &ScenarioTree) -> Result<(), ClaimError> {
        check_payoff(tree, "xi", &self.xi)?;
        for (i, s) in self.statics.iter().enumerate() {
            check_payoff(tree, &format!("static {i}"), &s.payoff)?;
            if s.bound.is_negative() {
                return Err(ClaimError::NegativeBound(i));
            }
            if s.payoff.values().flatten().all(Zero::is_zero) {
                return Err(ClaimError::ZeroOption(i));
            }
        }
        Ok(())
    }

    /// `ξ + a·1_d`.
    pub fn shifted(&self, a: &Q) -> Self {
        let mut out = self.clone();
        for v in out.xi.values_mut() {
            let d = v.len();
            v[d - 1] += a;
        }
        out
    }

    /// The same claim without its last static option.
    pub fn drop_last_static(&self) -> Self {
        let mut out = self.clone();
        out.statics.pop();
        out
    }

    pub fn with_static(&self, option: StaticOption) -> Self {
        let mut out = self.clone();
        out.statics.push(option);
        out
    }

    /// Constant payoff `a·1_d`.
    pub fn cash(tree: &ScenarioTree, a: &Q) -> Self {
        Self::new(tree.terminal_nodes().into_iter().map(|n| (n, cash(tree.d()).iter().map(|x| x * a).collect())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, qv};
    use crate::scenario::tests::unit_cone;
    use crate::scenario::NodeSpec;

    fn tree() -> ScenarioTree {
        ScenarioTree::new(
            1,
            vec![
                NodeSpec { id: 0, parent: None, cone: unit_cone(), kernels: vec![qv(&[1])] },
                NodeSpec { id: 1, parent: Some(0), cone: unit_cone(), kernels: vec![] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let t = tree();
        assert!(ClaimSpec::zero(&t).validate(&t).is_ok());
        let bad = ClaimSpec::new(BTreeMap::from([(0, qv(&[0, 0]))]));
        assert!(matches!(bad.validate(&t), Err(ClaimError::NotTerminal { node: 0, .. })));
        let short = ClaimSpec::new(BTreeMap::from([(1, qv(&[0]))]));
        assert!(matches!(short.validate(&t), Err(ClaimError::Length { .. })));
        let zero_opt = ClaimSpec::zero(&t).with_static(StaticOption { payoff: BTreeMap::from([(1, qv(&[0, 0]))]), bound: qi(1) });
        assert_eq!(zero_opt.validate(&t), Err(ClaimError::ZeroOption(0)));
        let neg = ClaimSpec::zero(&t).with_static(StaticOption { payoff: BTreeMap::from([(1, qv(&[1, 0]))]), bound: qi(-1) });
        assert_eq!(neg.validate(&t), Err(ClaimError::NegativeBound(0)));
    }

    #[test]
    fn shift_adds_cash() {
        let t = tree();
        assert_eq!(ClaimSpec::zero(&t).shifted(&qi(3)), ClaimSpec::cash(&t, &qi(3)));
    }
}
