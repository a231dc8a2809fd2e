//! Independent verifiers for small shapes.
//!
//! [`brute_price_one_period`] and [`brute_na2`] use closed-form interval
//! reasoning only (no linear programming). [`frictionless_price`] is the
//! textbook robust price over martingale measures for the mid prices.

use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::pricing::ClaimSpec;
use crate::rational::dot;
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle supports {0} only")]
    UnsupportedShape(&'static str),
    #[error("slice at node {0} is not an interval")]
    NotAnInterval(usize),
}

fn interval(tree: &ScenarioTree, n: usize) -> Result<(Q, Q), OracleError> {
    let (lo, hi) = tree.cone(n).box_bounds().ok_or(OracleError::NotAnInterval(n))?;
    Ok((lo[0].clone(), hi[0].clone()))
}

/// `d = 2`: the parent interval must sit inside the convex hull of the
/// reachable children's intervals, i.e. between their smallest lower and
/// largest upper endpoint.
pub fn brute_na2(tree: &ScenarioTree) -> Result<bool, OracleError> {
    if tree.d() != 2 {
        return Err(OracleError::UnsupportedShape("d = 2"));
    }
    let mask = tree.polar_mask();
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n) && !tree.is_terminal(n)) {
        let (lo, hi) = interval(tree, n)?;
        let mut kids = Vec::new();
        for c in tree.supported_children(n) {
            kids.push(interval(tree, c)?);
        }
        let min = kids.iter().map(|k| k.0.clone()).min().expect("a supported child");
        let max = kids.iter().map(|k| k.1.clone()).max().expect("a supported child");
        if lo < min || hi > max {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Upper concave envelope of `pts` at `z`, or `None` outside their range.
fn envelope(pts: &[(Q, Q)], z: &Q) -> Option<Q> {
    let mut best: Option<Q> = None;
    for (x1, y1) in pts.iter().filter(|p| &p.0 <= z) {
        for (x2, y2) in pts.iter().filter(|p| &p.0 >= z) {
            let v = if x1 == x2 { y1.clone().max(y2.clone()) } else { y1 + (y2 - y1) * (z - x1) / (x2 - x1) };
            best = Some(best.map_or(v.clone(), |b| b.max(v)));
        }
    }
    best
}

/// `d = 2`, `T = 1`, no static options. A price system is `Z_0 = (z_0, 1)`
/// and children `Z_c = (z_c, 1)` in their intervals with `Σ q_c z_c = z_0`.
/// The claim is affine in each `z_c`, so the supremum is the concave
/// envelope of the endpoint values, maximized over the admissible `z_0`.
/// `None` when no price system exists.
pub fn brute_price_one_period(tree: &ScenarioTree, claim: &ClaimSpec) -> Result<Option<Q>, OracleError> {
    if tree.d() != 2 || tree.horizon() != 1 || !claim.statics.is_empty() {
        return Err(OracleError::UnsupportedShape("d = 2, T = 1, no static options"));
    }
    let mut pts = Vec::new();
    for c in tree.supported_children(0) {
        let (lo, hi) = interval(tree, c)?;
        let xi = &claim.xi[&c];
        for z in [lo, hi] {
            let value = &xi[0] * &z + &xi[1];
            pts.push((z, value));
        }
    }
    let (lo0, hi0) = interval(tree, 0)?;
    let a = pts.iter().map(|p| p.0.clone()).min().expect("a supported child").max(lo0);
    let b = pts.iter().map(|p| p.0.clone()).max().expect("a supported child").min(hi0);
    if a > b {
        return Ok(None);
    }
    let mut cands = vec![a.clone(), b.clone()];
    cands.extend(pts.iter().map(|p| p.0.clone()).filter(|z| &a < z && z < &b));
    Ok(cands.iter().filter_map(|z| envelope(&pts, z)).max())
}

/// Robust frictionless price for the mid prices: the largest expected payoff
/// `⟨ξ, S_T⟩` over martingale measures supported on reachable nodes.
/// `None` when no martingale measure exists.
pub fn frictionless_price(tree: &ScenarioTree, claim: &ClaimSpec) -> Result<Option<Q>, OracleError> {
    if !claim.statics.is_empty() {
        return Err(OracleError::UnsupportedShape("claims without static options"));
    }
    let mask = tree.polar_mask();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut p = vec![None; tree.len()];
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n)) {
        let pay = if tree.is_terminal(n) { dot(&claim.xi[&n], tree.cone(n).mid()) } else { Q::zero() };
        p[n] = Some(lp.add_var(VarBound::NonNegative, pay));
    }
    lp.add_constraint(vec![(p[0].expect("root"), Q::one())], Relation::Eq, Q::one());
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n) && !tree.is_terminal(n)) {
        let kids = tree.supported_children(n);
        for i in 0..tree.d() {
            let mut coeffs = vec![(p[n].expect("reachable"), -tree.cone(n).mid()[i].clone())];
            coeffs.extend(kids.iter().map(|&c| (p[c].expect("reachable"), tree.cone(c).mid()[i].clone())));
            lp.add_constraint(coeffs, Relation::Eq, Q::zero());
        }
    }
    Ok(match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => Some(o.value),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{build_cone, BidAskSpec, SolvencyCone};
    use crate::pricing::price_primal;
    use crate::rational::{q, qi, qv};
    use crate::scenario::NodeSpec;

    fn cone(s: Q, c: Q, iv: Option<(Q, Q)>, frictionless: bool) -> SolvencyCone {
        build_cone(&BidAskSpec { mid: vec![s, qi(1)], factor: c, intervals: iv.map(|x| vec![x]), frictionless }).unwrap()
    }

    fn one_period(root: SolvencyCone, kids: Vec<SolvencyCone>) -> ScenarioTree {
        let n = kids.len();
        let mut specs = vec![NodeSpec {
            id: 0,
            parent: None,
            cone: root,
            kernels: (0..n).map(|i| (0..n).map(|j| if i == j { qi(1) } else { qi(0) }).collect()).collect(),
        }];
        for (i, k) in kids.into_iter().enumerate() {
            specs.push(NodeSpec { id: i + 1, parent: Some(0), cone: k, kernels: vec![] });
        }
        ScenarioTree::new(1, specs).unwrap()
    }

    fn binomial(c: Q, frictionless: bool) -> ScenarioTree {
        one_period(cone(qi(1), c.clone(), None, frictionless), vec![cone(qi(2), c.clone(), None, frictionless), cone(q(1, 2), c, None, frictionless)])
    }

    fn digital(t: &ScenarioTree) -> ClaimSpec {
        let mut c = ClaimSpec::zero(t);
        c.xi.insert(1, qv(&[0, 1]));
        c
    }

    #[test]
    fn binomial_digital_is_one_third() {
        let t = binomial(qi(1), true);
        assert_eq!(brute_price_one_period(&t, &digital(&t)).unwrap(), Some(q(1, 3)));
        assert_eq!(frictionless_price(&t, &digital(&t)).unwrap(), Some(q(1, 3)));
        assert_eq!(brute_price_one_period(&t, &ClaimSpec::zero(&t)).unwrap(), Some(qi(0)));
        assert_eq!(brute_price_one_period(&t, &ClaimSpec::cash(&t, &qi(1))).unwrap(), Some(qi(1)));
    }

    #[test]
    fn spread_binomial_matches_primal() {
        let t = binomial(q(3, 2), false);
        for claim in [digital(&t), ClaimSpec::cash(&t, &q(1, 3))] {
            assert_eq!(brute_price_one_period(&t, &claim).unwrap(), Some(price_primal(&t, &claim).unwrap().price));
        }
    }

    #[test]
    fn interval_na2() {
        let nested = one_period(cone(qi(1), qi(2), None, false), vec![cone(qi(1), qi(3), None, false)]);
        assert!(brute_na2(&nested).unwrap());
        let disjoint = one_period(cone(qi(1), q(3, 2), None, false), vec![cone(qi(4), q(3, 2), None, false)]);
        assert!(!brute_na2(&disjoint).unwrap());
        let touching = one_period(
            cone(qi(1), qi(2), Some((q(1, 2), qi(2))), false),
            vec![cone(q(3, 4), qi(2), Some((q(1, 2), qi(1))), false), cone(q(3, 2), qi(2), Some((qi(1), qi(2))), false)],
        );
        assert!(brute_na2(&touching).unwrap());
    }

    #[test]
    fn shapes_outside_the_oracle() {
        let t = ScenarioTree::new(
            1,
            vec![
                NodeSpec { id: 0, parent: None, cone: build_cone(&BidAskSpec { mid: qv(&[1, 1, 1]), factor: qi(2), intervals: None, frictionless: false }).unwrap(), kernels: vec![qv(&[1])] },
                NodeSpec { id: 1, parent: Some(0), cone: build_cone(&BidAskSpec { mid: qv(&[1, 1, 1]), factor: qi(2), intervals: None, frictionless: false }).unwrap(), kernels: vec![] },
            ],
        )
        .unwrap();
        assert!(matches!(brute_na2(&t), Err(OracleError::UnsupportedShape(_))));
        assert!(matches!(brute_price_one_period(&t, &ClaimSpec::zero(&t)), Err(OracleError::UnsupportedShape(_))));
    }
}
