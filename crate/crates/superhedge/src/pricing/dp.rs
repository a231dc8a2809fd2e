//! Backward induction on the randomized market.
//!
//! `G(n, x)` is the largest expected terminal value `⟨ξ, X_T⟩` over
//! martingales started at `x ∈ slice(n)`, and `g'(n, h) = sup_x G(n, x) - h·x`.
//! Each node keeps a pool of exact points `(x, G(n, x))`. A one-period
//! master program mixes the children's pools; its multipliers `h'` price the
//! children through `g'(c, h')`, and any child beating the master's
//! multiplier `σ` contributes its maximizer as a new column. At convergence
//! the master value is exact and `h'` is the one-step hedge.
//!
//! The pass is layer-synchronous: `G` is first evaluated bottom-up at every
//! grid point (pinned masters), which also seeds the pools; the price is
//! `g'(root, 0)` and the hedge is read off by descending the tree.

use super::enlarged::eta_from_h;
use super::primal::certificate;
use super::{ClaimSpec, HedgeCertificate, PricingError};
use crate::enlarged::{EnlargedError, EnlargedTree};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, VarBound};
use crate::rational::dot;
use crate::scenario::ScenarioTree;
use crate::Q;
use num_traits::{One, Zero};
use std::collections::HashMap;

const MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    /// `g_t(n, θ)` per node and grid point; empty at unreachable nodes.
    pub grid: Vec<Vec<Q>>,
    /// `(h, g'(n, h))` along the hedge, at reachable non-terminal nodes.
    pub holding: Vec<Option<(Vec<Q>, Q)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub price: Q,
    pub values: ValueFunction,
    pub h: Vec<Vec<Q>>,
    pub certificate: HedgeCertificate,
    /// Number of one-period programs solved.
    pub programs: usize,
}

#[derive(Clone)]
struct Point {
    x: Vec<Q>,
    g: Q,
}

struct Master {
    value: Q,
    x: Vec<Q>,
    h: Vec<Q>,
}

struct Dp<'a> {
    tree: &'a ScenarioTree,
    claim: &'a ClaimSpec,
    kids: Vec<Vec<usize>>,
    pools: Vec<Vec<Point>>,
    memo: HashMap<(usize, Vec<Q>), (Q, Vec<Q>, Vec<Q>)>,
    programs: usize,
}

impl Dp<'_> {
    fn k(&self) -> usize {
        self.tree.d() - 1
    }

    /// Solves the master at `n`; `pin = Some(x)` fixes the mean, otherwise
    /// the mean ranges over the slice and is charged `h·x`.
    fn master(&mut self, n: usize, pin: Option<&[Q]>, h: &[Q]) -> Result<Master, PricingError> {
        let k = self.k();
        for _ in 0..MAX_ROUNDS {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let mut cols = Vec::new();
            for &c in &self.kids[n] {
                for p in &self.pools[c] {
                    cols.push((lp.add_var(VarBound::NonNegative, p.g.clone()), p.x.clone()));
                }
            }
            let verts = self.tree.cone(n).vertices();
            let lam: Vec<usize> = match pin {
                Some(_) => Vec::new(),
                None => verts.iter().map(|v| lp.add_var(VarBound::NonNegative, -dot(h, &v[..k]))).collect(),
            };
            for i in 0..k {
                let mut coeffs: Vec<(usize, Q)> = cols.iter().map(|(j, x)| (*j, x[i].clone())).collect();
                coeffs.extend(lam.iter().zip(verts).map(|(&j, v)| (j, -&v[i])));
                let rhs = pin.map_or_else(Q::zero, |x| x[i].clone());
                lp.add_constraint(coeffs, Relation::Eq, rhs);
            }
            lp.add_constraint(cols.iter().map(|(j, _)| (*j, Q::one())).collect(), Relation::Eq, Q::one());
            if !lam.is_empty() {
                lp.add_constraint(lam.iter().map(|&j| (j, Q::one())).collect(), Relation::Eq, Q::one());
            }
            self.programs += 1;
            let o = match lp::solve(&lp).expect("well-formed") {
                LpOutcome::Optimal(o) => o,
                _ => return Err(PricingError::NaViolated { node: n }),
            };
            let hp: Vec<Q> = o.duals[..k].to_vec();
            let sigma = o.duals[k].clone();
            let mut added = false;
            for c in self.kids[n].clone() {
                let (gc, xc, _) = self.g_prime(c, &hp)?;
                if gc > sigma {
                    let g = &gc + dot(&hp, &xc[..k]);
                    self.pools[c].push(Point { x: xc, g });
                    added = true;
                }
            }
            if !added {
                let x = match pin {
                    Some(x) => x.to_vec(),
                    None => {
                        let mut x = vec![Q::zero(); k + 1];
                        for (&j, v) in lam.iter().zip(verts) {
                            for (a, b) in x.iter_mut().zip(v) {
                                *a += &o.x[j] * b;
                            }
                        }
                        x
                    }
                };
                return Ok(Master { value: o.value, x, h: hp });
            }
        }
        Err(PricingError::NoConvergence { node: n })
    }

    /// `(g'(n, h), maximizer, next holding)`.
    fn g_prime(&mut self, n: usize, h: &[Q]) -> Result<(Q, Vec<Q>, Vec<Q>), PricingError> {
        let key = (n, h.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let k = self.k();
        let out = if self.tree.is_terminal(n) {
            let xi = &self.claim.xi[&n];
            let (val, v) = self
                .tree
                .cone(n)
                .vertices()
                .iter()
                .map(|v| (dot(xi, v) - dot(h, &v[..k]), v))
                .reduce(|a, b| if b.0 > a.0 { b } else { a })
                .expect("nonempty slice");
            (val, v.clone(), vec![Q::zero(); k])
        } else {
            let m = self.master(n, None, h)?;
            (m.value, m.x, m.h)
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

pub fn backward_induction(enl: &EnlargedTree<'_>, claim: &ClaimSpec) -> Result<DpSolution, PricingError> {
    let tree = enl.tree();
    claim.validate(tree)?;
    if !claim.statics.is_empty() {
        return Err(PricingError::StaticsUnsupported);
    }
    if let Some(n) = enl.first_missing_vertex() {
        return Err(EnlargedError::GridMissingVertices(n).into());
    }
    let mask = tree.polar_mask();
    let k = tree.d() - 1;
    let mut dp = Dp {
        tree,
        claim,
        kids: (0..tree.len()).map(|n| tree.supported_children(n)).collect(),
        pools: vec![Vec::new(); tree.len()],
        memo: HashMap::new(),
        programs: 0,
    };
    let mut grid = vec![Vec::new(); tree.len()];
    for t in (0..=tree.horizon()).rev() {
        for n in tree.nodes_at(t).into_iter().filter(|&n| mask.is_reachable(n)) {
            let mut vals = Vec::new();
            for p in enl.points(n) {
                let g = if tree.is_terminal(n) {
                    dot(&claim.xi[&n], &p.x)
                } else {
                    dp.master(n, Some(&p.x), &vec![Q::zero(); k])?.value
                };
                vals.push(g);
            }
            dp.pools[n] = enl.points(n).iter().zip(&vals).map(|(p, g)| Point { x: p.x.clone(), g: g.clone() }).collect();
            grid[n] = vals;
        }
    }
    let mut h = vec![vec![Q::zero(); k]; tree.len()];
    let mut holding = vec![None; tree.len()];
    let mut price = Q::zero();
    for n in (0..tree.len()).filter(|&n| mask.is_reachable(n) && !tree.is_terminal(n)) {
        let h_in = tree.node(n).parent.map_or_else(|| vec![Q::zero(); k], |p| h[p].clone());
        let (val, _, next) = dp.g_prime(n, &h_in)?;
        if n == 0 {
            price = val.clone();
        }
        h[n] = next;
        holding[n] = Some((h_in, val));
    }
    let eta = eta_from_h(enl, &h);
    let certificate = certificate(tree, claim, price.clone(), Vec::new(), eta);
    Ok(DpSolution { price, values: ValueFunction { grid, holding }, h, certificate, programs: dp.programs })
}
