//! No-arbitrage decisions.
//!
//! * [`check_na2`]: `ζ ∈ K_{t+1}` q.s. implies `ζ ∈ K_t`, decided per node by
//!   asking whether every vertex of the node's dual slice is a convex
//!   combination of vertices of the reachable children's slices.
//! * [`check_na_frictionless`]: no arbitrage for the fictitious price `X`
//!   when θ keeps `X` interior. Interior grid points must sit in the relative
//!   interior of the successor hull; boundary grid points, being limits of
//!   interior ones, must sit in the closed hull.
//! * [`find_scps`] and [`check_ftap`]: consistent price systems.

use crate::enlarged::{EnlargedError, EnlargedTree};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::rational::{dot, sub};
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Na2Report {
    pub holds: bool,
    pub failing_node: Option<usize>,
    pub failing_vertex: Option<Vec<Q>>,
    /// `ζ` with `⟨ζ, w⟩ ≥ 0` on every reachable child slice and `⟨ζ, v⟩ < 0`
    /// at the failing vertex.
    pub witness: Option<Vec<Q>>,
}

fn one() -> Q {
    Q::one()
}

/// Weights `λ ≥ 0`, `Σλ = 1`, `Σ λ_j p_j = x`, or a separating `ζ`
/// (`⟨ζ, p_j⟩ ≥ 0` for all `j`, `⟨ζ, x⟩ < 0`). Points are normalized.
pub fn hull_weights(x: &[Q], pts: &[Vec<Q>]) -> Result<Vec<Q>, Vec<Q>> {
    let d = x.len();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars: Vec<usize> = pts.iter().map(|_| lp.add_var(VarBound::NonNegative, Q::zero())).collect();
    for i in 0..d {
        let coeffs = vars.iter().zip(pts).map(|(&j, p)| (j, p[i].clone())).collect();
        lp.add_constraint(coeffs, Relation::Eq, x[i].clone());
    }
    match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => Ok(o.x),
        LpOutcome::Infeasible(f) => Err(f.y.iter().map(|y| -y).collect()),
        LpOutcome::Unbounded(_) => unreachable!("zero objective"),
    }
}

/// Largest `t` with `x = Σ μ_j p_j + t b`, `b` the barycenter of `pts`.
/// `x` is in the relative interior of the hull iff `t > 0`; the returned
/// weights `μ_j + t/n` are then all strictly positive.
fn relint_weights(x: &[Q], pts: &[Vec<Q>]) -> Option<(Q, Vec<Q>)> {
    let d = x.len();
    let n = Q::from_integer((pts.len() as i64).into());
    let bary: Vec<Q> = (0..d).map(|i| pts.iter().fold(Q::zero(), |a, p| a + &p[i]) / &n).collect();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mu: Vec<usize> = pts.iter().map(|_| lp.add_var(VarBound::NonNegative, Q::zero())).collect();
    let t = lp.add_var(VarBound::NonNegative, one());
    for i in 0..d {
        let mut coeffs: Vec<(usize, Q)> = mu.iter().zip(pts).map(|(&j, p)| (j, p[i].clone())).collect();
        coeffs.push((t, bary[i].clone()));
        lp.add_constraint(coeffs, Relation::Eq, x[i].clone());
    }
    match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => {
            let tv = o.x[t].clone();
            let w = mu.iter().map(|&j| &o.x[j] + &tv / &n).collect();
            Some((tv, w))
        }
        _ => None,
    }
}

fn reachable_inner(tree: &ScenarioTree) -> Vec<usize> {
    let mask = tree.polar_mask();
    (0..tree.len()).filter(|&i| mask.is_reachable(i) && !tree.is_terminal(i)).collect()
}

pub fn check_na2(tree: &ScenarioTree) -> Na2Report {
    for id in reachable_inner(tree) {
        let pts: Vec<Vec<Q>> = tree
            .supported_children(id)
            .into_iter()
            .flat_map(|c| tree.cone(c).vertices().to_vec())
            .collect();
        for v in tree.cone(id).vertices() {
            if let Err(zeta) = hull_weights(v, &pts) {
                return Na2Report {
                    holds: false,
                    failing_node: Some(id),
                    failing_vertex: Some(v.clone()),
                    witness: Some(zeta),
                };
            }
        }
    }
    Na2Report { holds: true, failing_node: None, failing_vertex: None, witness: None }
}

/// Re-checks an NA2 witness against the cones it refers to.
pub fn witness_is_valid(tree: &ScenarioTree, report: &Na2Report) -> bool {
    let (Some(node), Some(z)) = (report.failing_node, &report.witness) else {
        return report.holds;
    };
    let in_children = tree.supported_children(node).iter().all(|&c| tree.cone(c).in_cone(z).unwrap_or(false));
    in_children && !tree.cone(node).in_cone(z).unwrap_or(true)
}

/// Successor of an enlarged node: child id and grid index.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionWeights {
    pub node: usize,
    pub theta_index: usize,
    pub weights: Vec<(usize, usize, Q)>,
}

/// One-period arbitrage: hold `h` from `(node, θ)` on. `x` is the fictitious
/// price there; `on_grid` is false when `x` is an interior point constructed
/// next to a failing boundary grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Arbitrage {
    pub node: usize,
    pub theta: Vec<Q>,
    pub x: Vec<Q>,
    pub h: Vec<Q>,
    pub on_grid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaReport {
    pub holds: bool,
    /// Martingale transition weights at every reachable enlarged node (when
    /// `holds`); strictly positive on all successors at interior points.
    pub kernels: Vec<TransitionWeights>,
    pub arbitrage: Option<Arbitrage>,
}

struct Successors {
    xs: Vec<Vec<Q>>,
    owners: Vec<(usize, usize)>,
}

fn successors(enl: &EnlargedTree<'_>, id: usize) -> Successors {
    let mut xs: Vec<Vec<Q>> = Vec::new();
    let mut owners = Vec::new();
    for c in enl.tree().supported_children(id) {
        for (k, p) in enl.points(c).iter().enumerate() {
            if !xs.contains(&p.x) {
                xs.push(p.x.clone());
                owners.push((c, k));
            }
        }
    }
    Successors { xs, owners }
}

/// `h` with `h·(p - x) ≥ 0` on every successor and positive somewhere.
fn weak_arbitrage(x: &[Q], pts: &[Vec<Q>]) -> Option<Vec<Q>> {
    let k = x.len() - 1;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let incs: Vec<Vec<Q>> = pts.iter().map(|p| sub(&p[..k], &x[..k])).collect();
    let total: Vec<Q> = (0..k).map(|i| incs.iter().fold(Q::zero(), |a, v| a + &v[i])).collect();
    let h: Vec<usize> = total.iter().map(|c| lp.add_var(VarBound::Free, c.clone())).collect();
    for inc in &incs {
        lp.add_constraint(h.iter().zip(inc).map(|(&j, a)| (j, a.clone())).collect(), Relation::Ge, Q::zero());
    }
    for &j in &h {
        lp.add_constraint(vec![(j, one())], Relation::Le, one());
        lp.add_constraint(vec![(j, one())], Relation::Ge, -one());
    }
    let o = lp::solve(&lp).expect("well-formed").optimum().cloned()?;
    o.value.is_positive().then(|| {
        let mut v: Vec<Q> = h.iter().map(|&j| o.x[j].clone()).collect();
        v.push(Q::zero());
        v
    })
}

/// `h` and `τ > 0` with `h·(p - x) ≥ τ` on every successor.
fn strict_arbitrage(x: &[Q], pts: &[Vec<Q>]) -> Option<(Vec<Q>, Q)> {
    let k = x.len() - 1;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let h: Vec<usize> = (0..k).map(|_| lp.add_var(VarBound::Free, Q::zero())).collect();
    let tau = lp.add_var(VarBound::Free, one());
    for p in pts {
        let mut coeffs: Vec<(usize, Q)> = h.iter().enumerate().map(|(i, &j)| (j, &p[i] - &x[i])).collect();
        coeffs.push((tau, -one()));
        lp.add_constraint(coeffs, Relation::Ge, Q::zero());
    }
    for &j in &h {
        lp.add_constraint(vec![(j, one())], Relation::Le, one());
        lp.add_constraint(vec![(j, one())], Relation::Ge, -one());
    }
    lp.add_constraint(vec![(tau, one())], Relation::Le, one());
    let o = lp::solve(&lp).expect("well-formed").optimum().cloned()?;
    o.value.is_positive().then(|| {
        let mut v: Vec<Q> = h.iter().map(|&j| o.x[j].clone()).collect();
        v.push(Q::zero());
        (v, o.value)
    })
}

pub fn check_na_frictionless(enl: &EnlargedTree<'_>) -> Result<NaReport, EnlargedError> {
    let tree = enl.tree();
    let mut kernels = Vec::new();
    for id in reachable_inner(tree) {
        if !enl.points(id).iter().any(|p| p.interior) {
            return Err(EnlargedError::EmptyInteriorGrid(id));
        }
        let succ = successors(enl, id);
        let mut memo: HashMap<(Vec<Q>, bool), Option<Vec<Q>>> = HashMap::new();
        for (k, p) in enl.points(id).iter().enumerate() {
            let key = (p.x.clone(), p.interior);
            let weights = memo
                .entry(key)
                .or_insert_with(|| {
                    if p.interior {
                        relint_weights(&p.x, &succ.xs).and_then(|(t, w)| t.is_positive().then_some(w))
                    } else {
                        hull_weights(&p.x, &succ.xs).ok()
                    }
                })
                .clone();
            match weights {
                Some(w) => kernels.push(TransitionWeights {
                    node: id,
                    theta_index: k,
                    weights: succ.owners.iter().zip(w).map(|(&(c, j), q)| (c, j, q)).collect(),
                }),
                None => {
                    let arb = if p.interior {
                        let h = weak_arbitrage(&p.x, &succ.xs).expect("x outside the relative interior");
                        Arbitrage { node: id, theta: p.theta.clone(), x: p.x.clone(), h, on_grid: true }
                    } else {
                        interior_witness(enl, id, &p.x, &succ.xs)
                    };
                    return Ok(NaReport { holds: false, kernels: Vec::new(), arbitrage: Some(arb) });
                }
            }
        }
    }
    Ok(NaReport { holds: true, kernels, arbitrage: None })
}

/// A boundary point `x_b` outside the closed successor hull: step toward the
/// mid price by `ε = min(1/2, τ / (2(|h·(S - x_b)| + 1)))`, which keeps a
/// strict gain at every successor.
fn interior_witness(enl: &EnlargedTree<'_>, id: usize, xb: &[Q], pts: &[Vec<Q>]) -> Arbitrage {
    let (h, tau) = strict_arbitrage(xb, pts).expect("closed hull separates strictly");
    let cone = enl.tree().cone(id);
    let s = cone.mid();
    let drift = dot(&h, &sub(s, xb)).abs();
    let two = Q::from_integer(2.into());
    let eps = (tau / (&two * (drift + one()))).min(one() / &two);
    let x: Vec<Q> = xb.iter().zip(s).map(|(a, m)| a + &eps * (m - a)).collect();
    let theta = x[..x.len() - 1].iter().zip(s).map(|(a, m)| a / m).collect();
    Arbitrage { node: id, theta, x, h, on_grid: false }
}

/// Gains `h·(X' - x)` are nonnegative at every successor grid point and
/// positive at some interior one; `x` is interior at its node.
pub fn arbitrage_is_valid(enl: &EnlargedTree<'_>, arb: &Arbitrage) -> bool {
    let tree = enl.tree();
    if !tree.cone(arb.node).slice_interior(&arb.x) || !arb.h.last().is_some_and(Zero::is_zero) {
        return false;
    }
    let mut strict = false;
    for c in tree.supported_children(arb.node) {
        for p in enl.points(c) {
            let g = dot(&arb.h, &sub(&p.x, &arb.x));
            if g.is_negative() {
                return false;
            }
            strict |= p.interior && g.is_positive();
        }
    }
    strict
}

/// Each recorded transition is a probability vector whose mean is `X`.
pub fn kernels_are_martingales(enl: &EnlargedTree<'_>, report: &NaReport) -> bool {
    report.kernels.iter().all(|k| {
        let x = &enl.points(k.node)[k.theta_index].x;
        let mut mean = vec![Q::zero(); x.len()];
        let mut mass = Q::zero();
        for (c, j, w) in &k.weights {
            if w.is_negative() {
                return false;
            }
            mass += w;
            for (m, v) in mean.iter_mut().zip(&enl.points(*c)[*j].x) {
                *m += w * v;
            }
        }
        let strict = !enl.points(k.node)[k.theta_index].interior || k.weights.iter().all(|(_, _, w)| w.is_positive());
        mass.is_one() && &mean == x && strict
    })
}

pub fn cross_check_equivalence(tree: &ScenarioTree, enl: &EnlargedTree<'_>) -> Result<bool, EnlargedError> {
    Ok(check_na2(tree).holds == check_na_frictionless(enl)?.holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interiority {
    Strict,
    Boundary,
}

/// Node masses of `Q` and the conditional prices `Z`; both vanish off the
/// reachable set.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSystem {
    pub mass: Vec<Q>,
    pub z: Vec<Option<Vec<Q>>>,
    pub interiority: Vec<Option<Interiority>>,
}

impl PriceSystem {
    pub fn all_strict(&self) -> bool {
        self.interiority.iter().flatten().all(|i| *i == Interiority::Strict)
    }

    /// Masses, martingale property, slice membership and full support.
    pub fn verify(&self, tree: &ScenarioTree) -> Result<(), String> {
        let mask = tree.polar_mask();
        if !self.mass[0].is_one() {
            return Err("root mass is not 1".into());
        }
        for id in 0..tree.len() {
            let m = &self.mass[id];
            if mask.is_reachable(id) != m.is_positive() {
                return Err(format!("support differs from the reachable set at node {id}"));
            }
            let Some(z) = &self.z[id] else {
                if m.is_positive() {
                    return Err(format!("missing price at node {id}"));
                }
                continue;
            };
            if !tree.cone(id).slice_contains(z) {
                return Err(format!("price outside the slice at node {id}"));
            }
            if tree.is_terminal(id) {
                continue;
            }
            let kids = tree.supported_children(id);
            let mass: Q = kids.iter().fold(Q::zero(), |a, &c| a + &self.mass[c]);
            if &mass != m {
                return Err(format!("masses do not add up below node {id}"));
            }
            let mut mean = vec![Q::zero(); tree.d()];
            for &c in &kids {
                let zc = self.z[c].as_ref().ok_or("missing child price")?;
                for (a, b) in mean.iter_mut().zip(zc) {
                    *a += &self.mass[c] * b;
                }
            }
            let target: Vec<Q> = z.iter().map(|a| a * m).collect();
            if mean != target {
                return Err(format!("martingale property fails at node {id}"));
            }
        }
        Ok(())
    }
}

/// Maximizes the smallest node mass of a consistent price system whose
/// prices are drawn from `slice(n)` at each reachable node.
fn scps_lp(tree: &ScenarioTree, slice: &dyn Fn(usize) -> Vec<Vec<Q>>) -> Option<(Q, Vec<Q>, Vec<Option<Vec<Q>>>)> {
    let mask = tree.polar_mask();
    let d = tree.d();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let s = lp.add_var(VarBound::NonNegative, one());
    let mut lam: Vec<Vec<(usize, Vec<Q>)>> = vec![Vec::new(); tree.len()];
    for id in (0..tree.len()).filter(|&i| mask.is_reachable(i)) {
        for v in slice(id) {
            lam[id].push((lp.add_var(VarBound::NonNegative, Q::zero()), v));
        }
    }
    lp.add_constraint(lam[0].iter().map(|(j, _)| (*j, one())).collect(), Relation::Eq, one());
    for id in reachable_inner(tree) {
        for i in 0..d {
            let mut coeffs: Vec<(usize, Q)> = lam[id].iter().map(|(j, v)| (*j, -&v[i])).collect();
            for c in tree.supported_children(id) {
                coeffs.extend(lam[c].iter().map(|(j, v)| (*j, v[i].clone())));
            }
            lp.add_constraint(coeffs, Relation::Eq, Q::zero());
        }
    }
    for id in (0..tree.len()).filter(|&i| mask.is_reachable(i)) {
        let mut coeffs: Vec<(usize, Q)> = lam[id].iter().map(|(j, _)| (*j, one())).collect();
        coeffs.push((s, -one()));
        lp.add_constraint(coeffs, Relation::Ge, Q::zero());
    }
    let o = lp::solve(&lp).expect("well-formed").optimum().cloned()?;
    let mut mass = vec![Q::zero(); tree.len()];
    let mut z = vec![None; tree.len()];
    for id in (0..tree.len()).filter(|&i| mask.is_reachable(i)) {
        let mut y = vec![Q::zero(); d];
        for (j, v) in &lam[id] {
            for (a, b) in y.iter_mut().zip(v) {
                *a += &o.x[*j] * b;
            }
        }
        mass[id] = y[d - 1].clone();
        if mass[id].is_positive() {
            z[id] = Some(y.iter().map(|a| a / &mass[id]).collect());
        }
    }
    Some((o.value, mass, z))
}

/// A full-support consistent price system started at the root, or `None`
/// when even the closed-slice program has none. A strictly interior system is
/// sought first on slices pulled inward by a small margin.
pub fn find_scps(tree: &ScenarioTree) -> Option<PriceSystem> {
    let (s, mass, z) = scps_lp(tree, &|id| tree.cone(id).vertices().to_vec())?;
    if !s.is_positive() {
        return None;
    }
    let (mass, z) = match scps_lp(tree, &|id| tree.cone(id).shrunk_vertices()) {
        Some((s2, m2, z2)) if s2.is_positive() => (m2, z2),
        _ => (mass, z),
    };
    let interiority = z
        .iter()
        .enumerate()
        .map(|(id, zi)| {
            zi.as_ref().map(|p| {
                if tree.cone(id).slice_interior(p) {
                    Interiority::Strict
                } else {
                    Interiority::Boundary
                }
            })
        })
        .collect();
    Some(PriceSystem { mass, z, interiority })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FtapReport {
    pub holds: bool,
    pub failing: Option<(usize, Vec<Q>)>,
}

/// For every reachable node and every vertex `v` of its slice, a consistent
/// price system on the subtree starting from `Z = v`.
pub fn check_ftap(tree: &ScenarioTree) -> FtapReport {
    let mask = tree.polar_mask();
    let d = tree.d();
    for id in reachable_inner(tree) {
        let mut sub_nodes = Vec::new();
        let mut stack = tree.supported_children(id);
        while let Some(n) = stack.pop() {
            sub_nodes.push(n);
            if !tree.is_terminal(n) {
                stack.extend(tree.supported_children(n));
            }
        }
        sub_nodes.sort();
        for v in tree.cone(id).vertices() {
            let mut lp = LinearProgram::new(Sense::Minimize);
            let mut lam: HashMap<usize, Vec<(usize, &Vec<Q>)>> = HashMap::new();
            for &n in &sub_nodes {
                let vars = tree.cone(n).vertices().iter().map(|w| (lp.add_var(VarBound::NonNegative, Q::zero()), w)).collect();
                lam.insert(n, vars);
            }
            for i in 0..d {
                let coeffs = tree.supported_children(id).iter().flat_map(|c| lam[c].iter().map(|(j, w)| (*j, w[i].clone()))).collect();
                lp.add_constraint(coeffs, Relation::Eq, v[i].clone());
            }
            for &n in sub_nodes.iter().filter(|&&n| !tree.is_terminal(n) && mask.is_reachable(n)) {
                for i in 0..d {
                    let mut coeffs: Vec<(usize, Q)> = lam[&n].iter().map(|(j, w)| (*j, -&w[i])).collect();
                    for c in tree.supported_children(n) {
                        coeffs.extend(lam[&c].iter().map(|(j, w)| (*j, w[i].clone())));
                    }
                    lp.add_constraint(coeffs, Relation::Eq, Q::zero());
                }
            }
            if !lp::feasible(&lp).expect("well-formed") {
                return FtapReport { holds: false, failing: Some((id, v.clone())) };
            }
        }
    }
    FtapReport { holds: true, failing: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{build_cone, BidAskSpec, SolvencyCone};
    use crate::enlarged::build_enlarged;
    use crate::rational::{q, qi, qs, qv};
    use crate::scenario::NodeSpec;

    fn boxed(s: Q, lo: Q, hi: Q, c: Q) -> SolvencyCone {
        build_cone(&BidAskSpec { mid: vec![s, qi(1)], factor: c, intervals: Some(vec![(lo, hi)]), frictionless: false }).unwrap()
    }

    fn point(s: Q) -> SolvencyCone {
        build_cone(&BidAskSpec { mid: vec![s, qi(1)], factor: qi(1), intervals: None, frictionless: true }).unwrap()
    }

    fn one_period(root: SolvencyCone, kids: Vec<SolvencyCone>, kernels: Vec<Vec<Q>>) -> ScenarioTree {
        let mut specs = vec![NodeSpec { id: 0, parent: None, cone: root, kernels }];
        for (i, k) in kids.into_iter().enumerate() {
            specs.push(NodeSpec { id: i + 1, parent: Some(0), cone: k, kernels: vec![] });
        }
        ScenarioTree::new(1, specs).unwrap()
    }

    fn disjoint() -> ScenarioTree {
        one_period(boxed(qi(1), q(2, 3), q(3, 2), q(3, 2)), vec![boxed(qi(4), q(8, 3), qi(6), q(3, 2))], vec![qv(&[1])])
    }

    fn static_market() -> ScenarioTree {
        let k = || boxed(qi(1), q(1, 2), qi(2), qi(2));
        let mut specs = vec![NodeSpec { id: 0, parent: None, cone: k(), kernels: vec![qs(&[(1, 2), (1, 2)])] }];
        specs.push(NodeSpec { id: 1, parent: Some(0), cone: k(), kernels: vec![qs(&[(1, 2), (1, 2)])] });
        specs.push(NodeSpec { id: 2, parent: Some(0), cone: k(), kernels: vec![qs(&[(1, 2), (1, 2)])] });
        for (id, p) in [(3, 1), (4, 1), (5, 2), (6, 2)] {
            specs.push(NodeSpec { id, parent: Some(p), cone: k(), kernels: vec![] });
        }
        ScenarioTree::new(2, specs).unwrap()
    }

    #[test]
    fn static_market_holds() {
        let t = static_market();
        assert!(check_na2(&t).holds);
        let e = build_enlarged(&t, 3).unwrap();
        assert!(check_na_frictionless(&e).unwrap().holds);
        assert!(check_ftap(&t).holds);
    }

    #[test]
    fn disjoint_slices_fail_with_valid_witness() {
        let t = disjoint();
        let r = check_na2(&t);
        assert!(!r.holds);
        assert_eq!(r.failing_node, Some(0));
        assert!(witness_is_valid(&t, &r));
        // The hand-derived witness works too.
        let z = qv(&[1, -2]);
        assert!(t.cone(1).in_cone(&z).unwrap() && !t.cone(0).in_cone(&z).unwrap());
        assert!(!check_ftap(&t).holds);
        assert!(find_scps(&t).is_none());
    }

    #[test]
    fn two_kernels_cover_the_parent() {
        let t = one_period(
            boxed(qi(1), q(3, 4), q(3, 2), q(3, 2)),
            vec![boxed(q(3, 4), q(1, 2), qi(1), q(3, 2)), boxed(q(3, 2), qi(1), qi(2), q(3, 2))],
            vec![qv(&[1, 0]), qv(&[0, 1])],
        );
        assert!(check_na2(&t).holds);
        assert!(check_ftap(&t).holds);
    }

    #[test]
    fn redundant_mixture_kernel_keeps_verdict() {
        for t in [disjoint(), static_market()] {
            let before = check_na2(&t).holds;
            let k = t.node(0).kernels[0].clone();
            let t2 = t.with_kernel(0, k).unwrap();
            assert_eq!(check_na2(&t2).holds, before);
        }
    }

    #[test]
    fn constant_price_is_a_martingale() {
        let t = one_period(point(qi(1)), vec![point(qi(1)), point(qi(1))], vec![qs(&[(1, 2), (1, 2)])]);
        let e = build_enlarged(&t, 3).unwrap();
        let r = check_na_frictionless(&e).unwrap();
        assert!(r.holds);
        assert!(kernels_are_martingales(&e, &r));
    }

    #[test]
    fn one_sided_increments_are_an_arbitrage() {
        let t = one_period(point(qi(1)), vec![point(qi(2)), point(q(3, 2))], vec![qs(&[(1, 2), (1, 2)])]);
        let e = build_enlarged(&t, 3).unwrap();
        let r = check_na_frictionless(&e).unwrap();
        assert!(!r.holds);
        let a = r.arbitrage.unwrap();
        assert_eq!(a.h, qv(&[1, 0]));
        assert!(arbitrage_is_valid(&e, &a));
        let gains: Vec<Q> = [qi(2), q(3, 2)].iter().map(|p| &a.h[0] * (p - qi(1))).collect();
        assert!(gains.iter().all(|g| g >= &q(1, 2)));
    }

    #[test]
    fn binomial_martingale_weights() {
        let t = one_period(point(qi(1)), vec![point(qi(2)), point(q(1, 2))], vec![qs(&[(1, 2), (1, 2)])]);
        let e = build_enlarged(&t, 3).unwrap();
        let r = check_na_frictionless(&e).unwrap();
        assert!(r.holds);
        let w: Vec<Q> = r.kernels[0].weights.iter().map(|(_, _, w)| w.clone()).collect();
        assert_eq!(w, qs(&[(1, 3), (2, 3)]));
        let p = find_scps(&t).unwrap();
        assert_eq!(p.z[0], Some(qv(&[1, 1])));
        assert_eq!((p.mass[1].clone(), p.mass[2].clone()), (q(1, 3), q(2, 3)));
    }

    #[test]
    fn boundary_failure_yields_interior_witness() {
        // Parent slice [1/2, 2], children cover only [3/5, 2]: the vertex 1/2 fails.
        let t = one_period(
            boxed(qi(1), q(1, 2), qi(2), qi(2)),
            vec![boxed(qi(1), q(3, 5), qi(2), qi(2))],
            vec![qv(&[1])],
        );
        assert!(!check_na2(&t).holds);
        let e = build_enlarged(&t, 3).unwrap();
        let r = check_na_frictionless(&e).unwrap();
        assert!(!r.holds);
        let a = r.arbitrage.unwrap();
        assert!(!a.on_grid);
        assert!(arbitrage_is_valid(&e, &a));
    }

    #[test]
    fn equivalence_on_small_cases() {
        for t in [disjoint(), static_market()] {
            let e = build_enlarged(&t, 3).unwrap();
            assert!(cross_check_equivalence(&t, &e).unwrap());
        }
    }

    #[test]
    fn frictionless_toggle_separates_the_two_notions() {
        // Mid 1 with children at 1 and 2: 1 is in the closed hull [1, 2] but not
        // in its relative interior.
        let t = one_period(point(qi(1)), vec![point(qi(1)), point(qi(2))], vec![qs(&[(1, 2), (1, 2)])]);
        assert!(check_na2(&t).holds);
        let e = build_enlarged(&t, 3).unwrap();
        assert!(!check_na_frictionless(&e).unwrap().holds);
    }

    #[test]
    fn static_market_price_system() {
        let t = static_market();
        let p = find_scps(&t).unwrap();
        p.verify(&t).unwrap();
        assert!(p.all_strict());
        for id in 3..7 {
            assert_eq!(p.mass[id], q(1, 4));
        }
    }

    #[test]
    fn closed_price_system_without_na2() {
        // Z ≡ 7/4 is consistent at t = 0 although NA2 fails at the vertex 1.
        let t = one_period(boxed(q(3, 2), qi(1), qi(2), qi(2)), vec![boxed(q(7, 4), q(3, 2), qi(3), qi(2))], vec![qv(&[1])]);
        assert!(!check_na2(&t).holds);
        assert!(!check_ftap(&t).holds);
        let p = find_scps(&t).unwrap();
        p.verify(&t).unwrap();
    }
}
