//! The super-hedging cone program in the base market.
//!
//! min `y + Σ c_i (ℓ_i⁺ + ℓ_i⁻)` over `y`, `ℓ^±`, and transfers `η(n) ∈ -K(n)`
//! at reachable non-terminal nodes, subject to
//! `y 1_d + Σ ℓ_i ζ_i + Σ_path η - ξ ∈ K_T` at every reachable terminal node.
//! Cone membership is written through the slice vertices. A transfer at a
//! terminal node can only hurt, so `η_T = 0`.

use super::{ClaimSpec, PricingError};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::rational::{abs, cash};
use crate::scenario::{is_admissible, ScenarioTree};
use crate::Q;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub node: usize,
    pub value: Vec<Q>,
    pub in_cone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeCertificate {
    pub price: Q,
    pub ell: Vec<Q>,
    /// Node-indexed transfers; zero at terminal and unreachable nodes.
    pub eta: Vec<Vec<Q>>,
    pub residuals: Vec<Residual>,
}

/// `price 1_d + Σ (ℓ_i ζ_i - |ℓ_i| c_i 1_d) + Σ_path η - ξ` per reachable
/// terminal node.
pub(crate) fn residuals(tree: &ScenarioTree, claim: &ClaimSpec, price: &Q, ell: &[Q], eta: &[Vec<Q>]) -> Vec<Residual> {
    let mask = tree.polar_mask();
    let d = tree.d();
    let e_d = cash(d);
    let cost: Q = ell.iter().zip(&claim.statics).map(|(l, s)| abs(l) * &s.bound).sum();
    tree.terminal_nodes()
        .into_iter()
        .filter(|&n| mask.is_reachable(n))
        .map(|n| {
            let mut r: Vec<Q> = e_d.iter().map(|e| e * (price - &cost)).collect();
            for (l, s) in ell.iter().zip(&claim.statics) {
                for (a, z) in r.iter_mut().zip(&s.payoff[&n]) {
                    *a += l * z;
                }
            }
            for m in tree.path(n) {
                for (a, h) in r.iter_mut().zip(&eta[m]) {
                    *a += h;
                }
            }
            for (a, x) in r.iter_mut().zip(&claim.xi[&n]) {
                *a -= x;
            }
            let in_cone = tree.cone(n).in_cone(&r).expect("length d");
            Residual { node: n, value: r, in_cone }
        })
        .collect()
}

pub(crate) fn certificate(tree: &ScenarioTree, claim: &ClaimSpec, price: Q, ell: Vec<Q>, eta: Vec<Vec<Q>>) -> HedgeCertificate {
    let residuals = residuals(tree, claim, &price, &ell, &eta);
    HedgeCertificate { price, ell, eta, residuals }
}

pub fn price_primal(tree: &ScenarioTree, claim: &ClaimSpec) -> Result<HedgeCertificate, PricingError> {
    claim.validate(tree)?;
    let mask = tree.polar_mask();
    let d = tree.d();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let y = lp.add_var(VarBound::Free, Q::one());
    let ell: Vec<(usize, usize)> = claim
        .statics
        .iter()
        .map(|s| (lp.add_var(VarBound::NonNegative, s.bound.clone()), lp.add_var(VarBound::NonNegative, s.bound.clone())))
        .collect();
    let mut eta: Vec<Option<Vec<usize>>> = vec![None; tree.len()];
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n) && !tree.is_terminal(n)) {
        let vars: Vec<usize> = (0..d).map(|_| lp.add_var(VarBound::Free, Q::zero())).collect();
        for v in tree.cone(n).vertices() {
            lp.add_constraint(vars.iter().zip(v).map(|(&j, a)| (j, a.clone())).collect(), Relation::Le, Q::zero());
        }
        eta[n] = Some(vars);
    }
    for n in tree.terminal_nodes().into_iter().filter(|&n| mask.is_reachable(n)) {
        let anc: Vec<&Vec<usize>> = tree.path(n).iter().filter_map(|&m| eta[m].as_ref()).collect();
        for v in tree.cone(n).vertices() {
            let mut coeffs = vec![(y, v[d - 1].clone())];
            for ((p, m), s) in ell.iter().zip(&claim.statics) {
                let zv: Q = s.payoff[&n].iter().zip(v).map(|(a, b)| a * b).sum();
                coeffs.push((*p, zv.clone()));
                coeffs.push((*m, -zv));
            }
            for vars in &anc {
                coeffs.extend(vars.iter().zip(v).map(|(&j, a)| (j, a.clone())));
            }
            let rhs: Q = claim.xi[&n].iter().zip(v).map(|(a, b)| a * b).sum();
            lp.add_constraint(coeffs, Relation::Ge, rhs);
        }
    }
    let o = match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => o,
        LpOutcome::Unbounded(_) => return Err(PricingError::Unbounded),
        LpOutcome::Infeasible(_) => unreachable!("large cash positions are always feasible"),
    };
    let ell_val: Vec<Q> = ell.iter().map(|(p, m)| &o.x[*p] - &o.x[*m]).collect();
    let eta_val = eta
        .iter()
        .map(|vars| match vars {
            Some(vs) => vs.iter().map(|&j| o.x[j].clone()).collect(),
            None => vec![Q::zero(); d],
        })
        .collect();
    Ok(certificate(tree, claim, o.value, ell_val, eta_val))
}

/// Re-evaluates a certificate from its price, positions and transfers:
/// admissible `η`, every terminal residual in `K_T`, reported residuals
/// matching, and optionally the price itself.
pub fn verify_certificate(
    tree: &ScenarioTree,
    claim: &ClaimSpec,
    cert: &HedgeCertificate,
    expected_price: Option<&Q>,
) -> Result<(), String> {
    if cert.ell.len() != claim.statics.len() {
        return Err(format!("{} option positions for {} options", cert.ell.len(), claim.statics.len()));
    }
    if !is_admissible(tree, &cert.eta).map_err(|e| e.to_string())? {
        return Err("a transfer lies outside -K".into());
    }
    let mask = tree.polar_mask();
    if tree.terminal_nodes().iter().any(|&n| mask.is_reachable(n) && cert.eta[n].iter().any(|x| !x.is_zero())) {
        return Err("nonzero transfer at a terminal node".into());
    }
    let fresh = residuals(tree, claim, &cert.price, &cert.ell, &cert.eta);
    if fresh != cert.residuals {
        return Err("reported residuals differ from recomputed ones".into());
    }
    if let Some(r) = fresh.iter().find(|r| !r.in_cone) {
        return Err(format!("residual at node {} is not solvent", r.node));
    }
    match expected_price {
        Some(p) if p != &cert.price => Err(format!("price {} differs from {}", cert.price, p)),
        _ => Ok(()),
    }
}
