//! Dual route: maximize `E^Q[⟨ξ, Z_T⟩]` over consistent price systems on
//! closed slices, in the variables `Y(n) = Q(n) Z(n) = Σ_v λ_{n,v} v`.

use super::{ClaimSpec, PricingError};
use crate::arbitrage::Interiority;
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub price: Q,
    pub mass: Vec<Q>,
    pub z: Vec<Option<Vec<Q>>>,
    /// Whether the optimizer's prices are strictly interior wherever `Q`
    /// charges a node. The supremum over strictly consistent systems equals
    /// this closed-slice optimum either way.
    pub attainment: Interiority,
}

pub fn price_dual(tree: &ScenarioTree, claim: &ClaimSpec) -> Result<DualSolution, PricingError> {
    claim.validate(tree)?;
    let mask = tree.polar_mask();
    let d = tree.d();
    let reach: Vec<usize> = (0..tree.len()).filter(|&n| mask.is_reachable(n)).collect();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut lam: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];
    for &n in &reach {
        for v in tree.cone(n).vertices() {
            let cost = if tree.is_terminal(n) { claim.xi[&n].iter().zip(v).map(|(a, b)| a * b).sum() } else { Q::zero() };
            lam[n].push(lp.add_var(VarBound::NonNegative, cost));
        }
    }
    let col = |n: usize, i: usize| -> Vec<(usize, Q)> {
        lam[n].iter().zip(tree.cone(n).vertices()).map(|(&j, v)| (j, v[i].clone())).collect()
    };
    lp.add_constraint(lam[0].iter().map(|&j| (j, Q::one())).collect(), Relation::Eq, Q::one());
    for &n in reach.iter().filter(|&&n| !tree.is_terminal(n)) {
        for i in 0..d {
            let mut coeffs: Vec<(usize, Q)> = col(n, i).into_iter().map(|(j, a)| (j, -a)).collect();
            for c in tree.supported_children(n) {
                coeffs.extend(col(c, i));
            }
            lp.add_constraint(coeffs, Relation::Eq, Q::zero());
        }
    }
    for s in &claim.statics {
        let mut coeffs = Vec::new();
        for &n in reach.iter().filter(|&&n| tree.is_terminal(n)) {
            for (&j, v) in lam[n].iter().zip(tree.cone(n).vertices()) {
                coeffs.push((j, s.payoff[&n].iter().zip(v).map(|(a, b)| a * b).sum()));
            }
        }
        lp.add_constraint(coeffs.clone(), Relation::Le, s.bound.clone());
        lp.add_constraint(coeffs, Relation::Ge, -s.bound.clone());
    }
    let o = match lp::solve(&lp).expect("well-formed") {
        LpOutcome::Optimal(o) => o,
        LpOutcome::Infeasible(_) => return Err(PricingError::DualInfeasible),
        LpOutcome::Unbounded(_) => unreachable!("masses and prices are bounded"),
    };
    let mut mass = vec![Q::zero(); tree.len()];
    let mut z = vec![None; tree.len()];
    let mut strict = true;
    for &n in &reach {
        let mut y = vec![Q::zero(); d];
        for (&j, v) in lam[n].iter().zip(tree.cone(n).vertices()) {
            for (a, b) in y.iter_mut().zip(v) {
                *a += &o.x[j] * b;
            }
        }
        mass[n] = y[d - 1].clone();
        if mass[n].is_positive() {
            let zn: Vec<Q> = y.iter().map(|a| a / &mass[n]).collect();
            strict &= tree.cone(n).slice_interior(&zn);
            z[n] = Some(zn);
        }
    }
    let attainment = if strict { Interiority::Strict } else { Interiority::Boundary };
    Ok(DualSolution { price: o.value, mass, z, attainment })
}
