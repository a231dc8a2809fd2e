//! Robustness of the static options: no nonzero option position `ℓ` can be
//! completed by admissible transfers into a solvent terminal position once
//! the costs `|ℓ_i| c_i` are paid.

use super::{ClaimSpec, PricingError};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub robust: bool,
    /// A position `ℓ` with `ℓ_i = ±1` that costs nothing to hold.
    pub offending: Option<Vec<Q>>,
}

/// By homogeneity a nonzero `ℓ` may be scaled so that some `ℓ_i = ±1`; each
/// of the `2e` cases is one feasibility program with `u_j ≥ |ℓ_j|`.
pub fn robustness_check(tree: &ScenarioTree, claim: &ClaimSpec) -> Result<RobustnessReport, PricingError> {
    claim.validate(tree)?;
    let mask = tree.polar_mask();
    let d = tree.d();
    let e = claim.statics.len();
    for i in 0..e {
        for sign in [Q::one(), -Q::one()] {
            let mut lp = LinearProgram::new(Sense::Minimize);
            let ell: Vec<usize> = (0..e).map(|_| lp.add_var(VarBound::Free, Q::zero())).collect();
            let u: Vec<usize> = (0..e).map(|_| lp.add_var(VarBound::NonNegative, Q::zero())).collect();
            lp.add_constraint(vec![(ell[i], Q::one())], Relation::Eq, sign.clone());
            for j in 0..e {
                lp.add_constraint(vec![(u[j], Q::one()), (ell[j], -Q::one())], Relation::Ge, Q::zero());
                lp.add_constraint(vec![(u[j], Q::one()), (ell[j], Q::one())], Relation::Ge, Q::zero());
            }
            let mut eta: Vec<Option<Vec<usize>>> = vec![None; tree.len()];
            for n in (0..tree.len()).filter(|&n| mask.is_reachable(n) && !tree.is_terminal(n)) {
                let vars: Vec<usize> = (0..d).map(|_| lp.add_var(VarBound::Free, Q::zero())).collect();
                for v in tree.cone(n).vertices() {
                    lp.add_constraint(vars.iter().zip(v).map(|(&j, a)| (j, a.clone())).collect(), Relation::Le, Q::zero());
                }
                eta[n] = Some(vars);
            }
            for n in tree.terminal_nodes().into_iter().filter(|&n| mask.is_reachable(n)) {
                for v in tree.cone(n).vertices() {
                    let mut coeffs = Vec::new();
                    for (j, s) in claim.statics.iter().enumerate() {
                        coeffs.push((ell[j], s.payoff[&n].iter().zip(v).map(|(a, b)| a * b).sum()));
                        coeffs.push((u[j], -(&s.bound * &v[d - 1])));
                    }
                    for m in tree.path(n) {
                        if let Some(vars) = &eta[m] {
                            coeffs.extend(vars.iter().zip(v).map(|(&j, a)| (j, a.clone())));
                        }
                    }
                    lp.add_constraint(coeffs, Relation::Ge, Q::zero());
                }
            }
            if let LpOutcome::Optimal(o) = lp::solve(&lp).expect("well-formed") {
                let l = ell.iter().map(|&j| o.x[j].clone()).collect();
                return Ok(RobustnessReport { robust: false, offending: Some(l) });
            }
        }
    }
    Ok(RobustnessReport { robust: true, offending: None })
}
