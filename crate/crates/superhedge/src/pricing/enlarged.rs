//! Frictionless super-hedging on the randomized market.
//!
//! Gains `Σ_t H_{t+1}·(X_{t+1} - X_t)` of a base-adapted `H` regroup along a
//! path as `Σ_m ⟨a(m), X(m, θ_m)⟩` with `a(root) = -H(root)`,
//! `a(m) = H(parent) - H(m)` in between and `a(N) = H(parent) + Σ ℓ_i ζ_i(N) - ξ(N)`
//! at the end. Each term depends on its own θ only, so the constraint over
//! all θ-paths splits into per-node epigraph variables `u(m) ≤ ⟨a(m), X⟩`
//! and one row `y + Σ_path u ≥ 0` per terminal node. All grid points enter,
//! boundary ones included (the price over the closure is the same).

use super::primal::certificate;
use super::{ClaimSpec, HedgeCertificate, PricingError};
use crate::enlarged::{EnlargedError, EnlargedTree};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::rational::dot;
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedSolution {
    pub price: Q,
    pub ell: Vec<Q>,
    /// Holding `H(n) ∈ Q^{d-1}` chosen at node `n` for the next period.
    pub h: Vec<Vec<Q>>,
    /// The strategy translated back to the base market.
    pub certificate: HedgeCertificate,
}

fn distinct_x(enl: &EnlargedTree<'_>, n: usize) -> Vec<Vec<Q>> {
    let mut xs: Vec<Vec<Q>> = Vec::new();
    for p in enl.points(n) {
        if !xs.contains(&p.x) {
            xs.push(p.x.clone());
        }
    }
    xs
}

struct Vars {
    y: usize,
    ell: Vec<(usize, usize)>,
    h: Vec<Option<Vec<usize>>>,
}

fn base_vars(lp: &mut LinearProgram, tree: &ScenarioTree, claim: &ClaimSpec) -> Vars {
    let mask = tree.polar_mask();
    let y = lp.add_var(VarBound::Free, Q::one());
    let ell = claim
        .statics
        .iter()
        .map(|s| (lp.add_var(VarBound::NonNegative, s.bound.clone()), lp.add_var(VarBound::NonNegative, s.bound.clone())))
        .collect();
    let h = (0..tree.len())
        .map(|n| {
            (mask.is_reachable(n) && !tree.is_terminal(n))
                .then(|| (0..tree.d() - 1).map(|_| lp.add_var(VarBound::Free, Q::zero())).collect())
        })
        .collect();
    Vars { y, ell, h }
}

fn read_back(tree: &ScenarioTree, vars: &Vars, x: &[Q]) -> (Vec<Q>, Vec<Vec<Q>>) {
    let ell = vars.ell.iter().map(|(p, m)| &x[*p] - &x[*m]).collect();
    let h = vars
        .h
        .iter()
        .map(|v| match v {
            Some(js) => js.iter().map(|&j| x[j].clone()).collect(),
            None => vec![Q::zero(); tree.d() - 1],
        })
        .collect();
    (ell, h)
}

/// `Σ ℓ_i ⟨ζ_i(N), x⟩` as coefficients on `ℓ^±`.
fn statics_terms(vars: &Vars, claim: &ClaimSpec, n: usize, x: &[Q], sign: &Q) -> Vec<(usize, Q)> {
    let mut out = Vec::new();
    for ((p, m), s) in vars.ell.iter().zip(&claim.statics) {
        let v = dot(&s.payoff[&n], x) * sign;
        out.push((*p, v.clone()));
        out.push((*m, -v));
    }
    out
}

fn check(enl: &EnlargedTree<'_>, claim: &ClaimSpec) -> Result<(), PricingError> {
    claim.validate(enl.tree())?;
    if let Some(n) = enl.first_missing_vertex() {
        return Err(EnlargedError::GridMissingVertices(n).into());
    }
    Ok(())
}

pub fn price_enlarged(enl: &EnlargedTree<'_>, claim: &ClaimSpec) -> Result<EnlargedSolution, PricingError> {
    check(enl, claim)?;
    let tree = enl.tree();
    let mask = tree.polar_mask();
    let k = tree.d() - 1;
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars = base_vars(&mut lp, tree, claim);
    let mut u = vec![None; tree.len()];
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n)) {
        let un = lp.add_var(VarBound::Free, Q::zero());
        u[n] = Some(un);
        let parent = tree.node(n).parent;
        for x in distinct_x(enl, n) {
            // u(n) - ⟨a(n), X⟩ ≤ const
            let mut coeffs = vec![(un, Q::one())];
            if let Some(p) = parent {
                let hp = vars.h[p].as_ref().expect("reachable parent");
                coeffs.extend(hp.iter().zip(&x[..k]).map(|(&j, a)| (j, -a)));
            }
            let rhs = if tree.is_terminal(n) {
                coeffs.extend(statics_terms(&vars, claim, n, &x, &-Q::one()));
                -dot(&claim.xi[&n], &x)
            } else {
                let hn = vars.h[n].as_ref().expect("reachable node");
                coeffs.extend(hn.iter().zip(&x[..k]).map(|(&j, a)| (j, a.clone())));
                Q::zero()
            };
            lp.add_constraint(coeffs, Relation::Le, rhs);
        }
    }
    for n in tree.terminal_nodes().into_iter().filter(|&n| mask.is_reachable(n)) {
        let mut coeffs = vec![(vars.y, Q::one())];
        coeffs.extend(tree.path(n).iter().map(|&m| (u[m].expect("reachable path"), Q::one())));
        lp.add_constraint(coeffs, Relation::Ge, Q::zero());
    }
    let o = match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => o,
        LpOutcome::Unbounded(_) => return Err(PricingError::Unbounded),
        LpOutcome::Infeasible(_) => unreachable!("large cash positions are always feasible"),
    };
    let (ell, h) = read_back(tree, &vars, &o.x);
    let eta = eta_from_h(enl, &h);
    let certificate = certificate(tree, claim, o.value.clone(), ell.clone(), eta);
    Ok(EnlargedSolution { price: o.value, ell, h, certificate })
}

/// The same program with one row per θ-path. Exponential in the horizon;
/// meant for cross-checking [`price_enlarged`] on small trees.
pub fn price_enlarged_paths(enl: &EnlargedTree<'_>, claim: &ClaimSpec) -> Result<Q, PricingError> {
    check(enl, claim)?;
    let tree = enl.tree();
    let mask = tree.polar_mask();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let vars = base_vars(&mut lp, tree, claim);
    for n in tree.terminal_nodes().into_iter().filter(|&n| mask.is_reachable(n)) {
        let path = tree.path(n);
        let grids: Vec<Vec<Vec<Q>>> = path.iter().map(|&m| distinct_x(enl, m)).collect();
        let mut idx = vec![0usize; path.len()];
        loop {
            let xs: Vec<&Vec<Q>> = idx.iter().zip(&grids).map(|(&i, g)| &g[i]).collect();
            let mut coeffs = vec![(vars.y, Q::one())];
            for t in 0..path.len() - 1 {
                let h = vars.h[path[t]].as_ref().expect("reachable path");
                coeffs.extend(h.iter().enumerate().map(|(i, &j)| (j, &xs[t + 1][i] - &xs[t][i])));
            }
            let last = xs[path.len() - 1];
            coeffs.extend(statics_terms(&vars, claim, n, last, &Q::one()));
            lp.add_constraint(coeffs, Relation::Ge, dot(&claim.xi[&n], last));
            let mut t = 0;
            while t < idx.len() {
                idx[t] += 1;
                if idx[t] < grids[t].len() {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == idx.len() {
                break;
            }
        }
    }
    match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => Ok(o.value),
        LpOutcome::Unbounded(_) => Err(PricingError::Unbounded),
        LpOutcome::Infeasible(_) => unreachable!("large cash positions are always feasible"),
    }
}

/// Base-market transfers replicating a frictionless strategy: the risky
/// legs are the trades `H(n) - H(parent)` and the cash leg pays for them at
/// the worst grid price, `η^d(n) = min_θ -Σ_i η^i(n) X^i(n, θ)`.
pub fn eta_from_h(enl: &EnlargedTree<'_>, h: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let tree = enl.tree();
    let mask = tree.polar_mask();
    let d = tree.d();
    (0..tree.len())
        .map(|n| {
            if !mask.is_reachable(n) || tree.is_terminal(n) {
                return vec![Q::zero(); d];
            }
            let mut eta: Vec<Q> = match tree.node(n).parent {
                Some(p) => h[n].iter().zip(&h[p]).map(|(a, b)| a - b).collect(),
                None => h[n].clone(),
            };
            let cash = enl
                .points(n)
                .iter()
                .map(|p| -eta.iter().zip(&p.x).map(|(a, b)| a * b).sum::<Q>())
                .min()
                .expect("nonempty grid");
            eta.push(cash);
            eta
        })
        .collect()
}
