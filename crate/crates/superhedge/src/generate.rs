//! Seeded random markets.
//!
//! The tree shape and kernels are drawn first, then bid–ask boxes top-down.
//! With `Na2Mode::Yes` every parent vertex outside the hull of its
//! reachable children's slices is patched by widening one child box to
//! contain it. `Na2Mode::No` then plants a violation: all reachable
//! children of one node move strictly above the parent's first-axis range.

use crate::arbitrage::hull_weights;
use crate::cone::{build_cone, BidAskSpec};
use crate::market_file::{GeneratorInfo, Market};
use crate::pricing::{price_primal, robustness_check, ClaimSpec, StaticOption};
use crate::rational::{cash, q, qi};
use crate::scenario::{NodeSpec, ScenarioTree};
use crate::Q;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Na2Mode {
    Yes,
    No,
    Any,
}

impl Na2Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Na2Mode::Yes => "yes",
            Na2Mode::No => "no",
            Na2Mode::Any => "any",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateOptions {
    pub seed: u64,
    pub horizon: usize,
    pub assets: usize,
    pub branching: usize,
    pub kernels: usize,
    pub na2: Na2Mode,
    /// Number of static options, each made robust by construction.
    pub statics: usize,
}

impl GenerateOptions {
    pub fn new(seed: u64, horizon: usize, assets: usize, na2: Na2Mode) -> Self {
        GenerateOptions { seed, horizon, assets, branching: 2, kernels: 2, na2, statics: 0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("{name} must lie in {lo}..={hi}, got {got}")]
    OutOfRange { name: &'static str, lo: usize, hi: usize, got: usize },
}

fn check(name: &'static str, got: usize, lo: usize, hi: usize) -> Result<(), GenerateError> {
    if got < lo || got > hi {
        return Err(GenerateError::OutOfRange { name, lo, hi, got });
    }
    Ok(())
}

struct Draft {
    parent: Option<usize>,
    children: Vec<usize>,
    kernels: Vec<Vec<Q>>,
    spec: BidAskSpec,
}

fn pick(rng: &mut ChaCha8Rng, xs: &[(i64, i64)]) -> Q {
    let &(n, d) = xs.choose(rng).expect("nonempty");
    q(n, d)
}

fn lo_hi(spec: &BidAskSpec) -> Vec<(Q, Q)> {
    spec.intervals.clone().expect("drafts carry explicit intervals")
}

fn vertices(spec: &BidAskSpec) -> Vec<Vec<Q>> {
    build_cone(spec).expect("drafts stay valid").vertices().to_vec()
}

/// Smallest factor compatible with the intervals, never below the current one.
fn refit_factor(spec: &mut BidAskSpec) {
    for ((lo, hi), s) in lo_hi(spec).iter().zip(&spec.mid) {
        spec.factor = spec.factor.clone().max(s / lo).max(hi / s);
    }
}

fn draw_box(rng: &mut ChaCha8Rng, mid: Vec<Q>) -> BidAskSpec {
    let c = pick(rng, &[(5, 4), (3, 2), (2, 1)]);
    let shrink = [(0, 1), (0, 1), (1, 4), (1, 2)];
    let intervals = mid[..mid.len() - 1]
        .iter()
        .map(|s| {
            let (a, b) = (s / &c, s * &c);
            let lo = &a + (s - &a) * pick(rng, &shrink);
            let hi = &b - (&b - s) * pick(rng, &shrink);
            (lo, hi)
        })
        .collect();
    BidAskSpec { mid, factor: c, intervals: Some(intervals), frictionless: false }
}

fn supported(d: &Draft) -> Vec<usize> {
    d.children.iter().enumerate().filter(|(j, _)| d.kernels.iter().any(|k| k[*j].is_positive())).map(|(_, &c)| c).collect()
}

fn reachable(drafts: &[Draft]) -> Vec<bool> {
    let mut r = vec![false; drafts.len()];
    r[0] = true;
    for n in 0..drafts.len() {
        if r[n] {
            for c in supported(&drafts[n]) {
                r[c] = true;
            }
        }
    }
    r
}

fn repair(rng: &mut ChaCha8Rng, drafts: &mut [Draft]) {
    for n in 0..drafts.len() {
        if !reachable(drafts)[n] || drafts[n].children.is_empty() {
            continue;
        }
        let kids = supported(&drafts[n]);
        for v in vertices(&drafts[n].spec) {
            let pts: Vec<Vec<Q>> = kids.iter().flat_map(|&c| vertices(&drafts[c].spec)).collect();
            if hull_weights(&v, &pts).is_ok() {
                continue;
            }
            let c = *kids.choose(rng).expect("a supported child");
            let spec = &mut drafts[c].spec;
            let widened = lo_hi(spec).into_iter().zip(&v).map(|((lo, hi), x)| (lo.min(x.clone()), hi.max(x.clone()))).collect();
            spec.intervals = Some(widened);
            refit_factor(spec);
        }
    }
}

fn plant(rng: &mut ChaCha8Rng, drafts: &mut [Draft]) -> usize {
    let r = reachable(drafts);
    let inner: Vec<usize> = (0..drafts.len()).filter(|&n| r[n] && !drafts[n].children.is_empty()).collect();
    let n = *inner.choose(rng).expect("the root is inner");
    let top = lo_hi(&drafts[n].spec)[0].1.clone();
    for c in supported(&drafts[n]) {
        let spec = &mut drafts[c].spec;
        spec.mid[0] = &top * qi(2);
        spec.factor = spec.factor.clone().max(qi(2));
        let mut iv = lo_hi(spec);
        iv[0] = (&top * q(3, 2), &top * qi(3));
        spec.intervals = Some(iv);
    }
    n
}

fn draw_payoff(rng: &mut ChaCha8Rng, terminals: &[usize], d: usize) -> BTreeMap<usize, Vec<Q>> {
    terminals.iter().map(|&n| (n, (0..d).map(|_| q(rng.gen_range(-4..=4), 2)).collect())).collect()
}

/// Adds robust static options. Each option `ζ` is recentred so that its
/// super- and sub-hedging prices are `±w`; its bound is a fraction of `w`
/// (or `1/10` when `ζ` is replicable). If the set as a whole is not robust,
/// every bound is raised to `w + 1/2`, which is robust by subadditivity.
fn add_statics(rng: &mut ChaCha8Rng, tree: &ScenarioTree, claim: &mut ClaimSpec, e: usize) {
    let d = tree.d();
    let terminals = tree.terminal_nodes();
    let mut widths = Vec::new();
    for _ in 0..e {
        let zeta = draw_payoff(rng, &terminals, d);
        let neg = zeta.iter().map(|(k, v)| (*k, v.iter().map(|x| -x).collect())).collect();
        let (Ok(up), Ok(down)) = (price_primal(tree, &ClaimSpec::new(zeta.clone())), price_primal(tree, &ClaimSpec::new(neg))) else {
            return;
        };
        let (u, l) = (up.price, -down.price);
        let m = (&u + &l) / qi(2);
        let w = (&u - &l) / qi(2);
        let payoff: BTreeMap<usize, Vec<Q>> = zeta
            .into_iter()
            .map(|(k, v)| (k, v.iter().zip(cash(d)).map(|(a, c)| a - &m * c).collect()))
            .collect();
        if payoff.values().flatten().all(Zero::is_zero) {
            continue;
        }
        let bound = if w.is_positive() { &w * pick(rng, &[(1, 4), (1, 2), (3, 4), (1, 1)]) } else { q(1, 10) };
        claim.statics.push(StaticOption { payoff, bound });
        widths.push(w);
    }
    if !robustness_check(tree, claim).map(|r| r.robust).unwrap_or(false) {
        for (s, w) in claim.statics.iter_mut().zip(widths) {
            s.bound = w + q(1, 2);
        }
    }
}

pub fn generate(opts: &GenerateOptions) -> Result<Market, GenerateError> {
    check("horizon", opts.horizon, 1, 4)?;
    check("assets", opts.assets, 2, 4)?;
    check("branching", opts.branching, 1, 4)?;
    check("kernels", opts.kernels, 1, 4)?;
    check("statics", opts.statics, 0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let k = opts.assets - 1;
    let root_mid: Vec<Q> = (0..k).map(|_| pick(&mut rng, &[(1, 2), (3, 4), (1, 1), (5, 4), (3, 2), (2, 1)])).chain([Q::one()]).collect();
    let mut drafts = vec![Draft { parent: None, children: Vec::new(), kernels: Vec::new(), spec: draw_box(&mut rng, root_mid) }];
    let mut frontier = vec![0];
    for _ in 0..opts.horizon {
        let mut next = Vec::new();
        for &p in &frontier {
            let nkids = rng.gen_range(1..=opts.branching);
            for _ in 0..nkids {
                let id = drafts.len();
                let mut mid: Vec<Q> =
                    drafts[p].spec.mid[..k].iter().map(|s| s * pick(&mut rng, &[(1, 2), (2, 3), (1, 1), (3, 2), (2, 1)])).collect();
                mid.push(Q::one());
                drafts.push(Draft { parent: Some(p), children: Vec::new(), kernels: Vec::new(), spec: draw_box(&mut rng, mid) });
                drafts[p].children.push(id);
                next.push(id);
            }
            let nker = rng.gen_range(1..=opts.kernels);
            drafts[p].kernels = (0..nker)
                .map(|_| {
                    let mut w: Vec<i64> = (0..nkids).map(|_| rng.gen_range(0..=3)).collect();
                    if w.iter().all(|&x| x == 0) {
                        let j = rng.gen_range(0..nkids);
                        w[j] = 1;
                    }
                    let total: i64 = w.iter().sum();
                    w.iter().map(|&x| q(x, total)).collect()
                })
                .collect();
        }
        frontier = next;
    }
    let planted = match opts.na2 {
        Na2Mode::Any => None,
        Na2Mode::Yes => {
            repair(&mut rng, &mut drafts);
            None
        }
        Na2Mode::No => {
            repair(&mut rng, &mut drafts);
            Some(plant(&mut rng, &mut drafts))
        }
    };
    let specs = drafts
        .into_iter()
        .enumerate()
        .map(|(id, d)| NodeSpec { id, parent: d.parent, cone: build_cone(&d.spec).expect("drafts stay valid"), kernels: d.kernels })
        .collect();
    let tree = ScenarioTree::new(opts.horizon, specs).expect("generated trees are well formed");
    let terminals = tree.terminal_nodes();
    let mut claim = ClaimSpec::new(draw_payoff(&mut rng, &terminals, opts.assets));
    if opts.statics > 0 {
        add_statics(&mut rng, &tree, &mut claim, opts.statics);
    }
    let generator = GeneratorInfo { seed: opts.seed, na2: opts.na2.as_str().into(), planted_node: planted };
    Ok(Market { tree, claim: Some(claim), generator: Some(generator) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrage::check_na2;
    use crate::market_file::emit_market;

    #[test]
    fn same_seed_same_bytes() {
        let o = GenerateOptions { seed: 7, horizon: 2, assets: 3, branching: 3, kernels: 2, na2: Na2Mode::Yes, statics: 1 };
        assert_eq!(emit_market(&generate(&o).unwrap()).unwrap(), emit_market(&generate(&o).unwrap()).unwrap());
        let other = GenerateOptions { seed: 8, ..o.clone() };
        assert_ne!(emit_market(&generate(&o).unwrap()).unwrap(), emit_market(&generate(&other).unwrap()).unwrap());
    }

    #[test]
    fn repaired_markets_satisfy_na2() {
        for seed in 0..100 {
            let o = GenerateOptions { seed, horizon: 1 + (seed as usize % 3), assets: 2 + (seed as usize % 2), branching: 3, kernels: 3, na2: Na2Mode::Yes, statics: 0 };
            let m = generate(&o).unwrap();
            assert!(check_na2(&m.tree).holds, "seed {seed}");
        }
    }

    #[test]
    fn planted_violation_is_found() {
        for seed in 0..50 {
            let o = GenerateOptions { seed, horizon: 2, assets: 2 + (seed as usize % 3), branching: 2, kernels: 2, na2: Na2Mode::No, statics: 0 };
            let m = generate(&o).unwrap();
            let r = check_na2(&m.tree);
            assert!(!r.holds);
            assert_eq!(r.failing_node, m.generator.unwrap().planted_node, "seed {seed}");
        }
    }

    #[test]
    fn statics_are_robust() {
        for seed in 0..20 {
            let o = GenerateOptions { seed, horizon: 2, assets: 2, branching: 2, kernels: 2, na2: Na2Mode::Yes, statics: 2 };
            let m = generate(&o).unwrap();
            let claim = m.claim.unwrap();
            assert!(!claim.statics.is_empty());
            assert!(robustness_check(&m.tree, &claim).unwrap().robust, "seed {seed}");
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let o = GenerateOptions::new(1, 5, 2, Na2Mode::Any);
        assert!(matches!(generate(&o), Err(GenerateError::OutOfRange { name: "horizon", .. })));
    }
}
