//! Acceptance battery: one PASS/FAIL line per criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::Instant;
use superhedge::arbitrage::{check_na2, check_na_frictionless};
use superhedge::enlarged::{build_enlarged, check_theorem_main};
use superhedge::generate::{generate, GenerateOptions, Na2Mode};
use superhedge::market_file::{emit_market, parse_market, Market};
use superhedge::oracles::{brute_na2, brute_price_one_period, frictionless_price};
use superhedge::pricing::{
    backward_induction, price_dual, price_enlarged, price_primal, robustness_check, verify_certificate, ClaimSpec,
};
use superhedge::rational::{dot, q};
use superhedge::report::{self, Command, HedgeRoute, Route};
use superhedge::Q;

type Outcome = Result<String, String>;

fn market(seed: u64, horizon: usize, assets: usize, branching: usize, kernels: usize, na2: Na2Mode, statics: usize) -> Market {
    generate(&GenerateOptions { seed, horizon, assets, branching, kernels, na2, statics }).expect("options in range")
}

/// Prices by all four routes; the enlarged and DP routes also hand back
/// hedges that must re-verify in the base market.
fn four_routes(m: &Market, claim: &ClaimSpec) -> Result<[Q; 4], String> {
    let enl = build_enlarged(&m.tree, 3).map_err(|e| e.to_string())?;
    let p = price_primal(&m.tree, claim).map_err(|e| format!("primal: {e}"))?.price;
    let d = price_dual(&m.tree, claim).map_err(|e| format!("dual: {e}"))?.price;
    let e = price_enlarged(&enl, claim).map_err(|e| format!("enlarged: {e}"))?.price;
    let g = backward_induction(&enl, claim).map_err(|e| format!("dp: {e}"))?.price;
    Ok([p, d, e, g])
}

fn all_equal(v: &[Q]) -> bool {
    v.iter().all(|x| x == &v[0])
}

fn strong_duality() -> Outcome {
    for seed in 0..200u64 {
        let m = market(seed, 1 + seed as usize % 3, 2 + (seed as usize / 3) % 2, 2 + seed as usize % 2, 1 + seed as usize % 3, Na2Mode::Yes, 0);
        let claim = m.claim.clone().expect("generated with a claim");
        let r = four_routes(&m, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
        if !all_equal(&r) {
            return Err(format!("seed {seed}: routes differ {r:?}"));
        }
    }
    Ok("200/200 instances, primal = dual = enlarged = dp, gap 0".into())
}

fn strong_duality_statics() -> Outcome {
    let (mut done, mut seed) = (0, 0u64);
    while done < 100 {
        seed += 1;
        if seed > 1000 {
            return Err(format!("only {done} robust instances in 1000 seeds"));
        }
        let e = 1 + seed as usize % 2;
        let m = market(seed, 1 + seed as usize % 3, 2 + (seed as usize / 2) % 2, 2, 2, Na2Mode::Yes, e);
        let claim = m.claim.clone().expect("generated with a claim");
        if claim.statics.is_empty() || !robustness_check(&m.tree, &claim).map_err(|e| e.to_string())?.robust {
            continue;
        }
        let p = price_primal(&m.tree, &claim).map_err(|e| format!("seed {seed}: {e}"))?.price;
        let d = price_dual(&m.tree, &claim).map_err(|e| format!("seed {seed}: {e}"))?.price;
        if p != d {
            return Err(format!("seed {seed}: primal {p} != dual {d}"));
        }
        let fewer = price_primal(&m.tree, &claim.drop_last_static()).map_err(|e| format!("seed {seed}: {e}"))?.price;
        if p > fewer {
            return Err(format!("seed {seed}: adding an option raised the price {fewer} -> {p}"));
        }
        done += 1;
    }
    Ok("100/100 robust instances with 1-2 options, primal = dual, price monotone in the option set".into())
}

fn na_equivalence() -> Outcome {
    let (mut yes, mut no) = (0, 0);
    for seed in 0..200u64 {
        let mode = [Na2Mode::Yes, Na2Mode::No, Na2Mode::Any][seed as usize % 3];
        let m = market(seed, 1 + seed as usize % 3, 2 + (seed as usize / 3) % 3, 3, 2, mode, 0);
        let na2 = check_na2(&m.tree).holds;
        let enl = build_enlarged(&m.tree, 3).map_err(|e| e.to_string())?;
        let na = check_na_frictionless(&enl).map_err(|e| e.to_string())?.holds;
        if na2 != na {
            return Err(format!("seed {seed}: NA2 {na2}, frictionless NA {na}"));
        }
        if na2 { yes += 1 } else { no += 1 }
    }
    Ok(format!("200 instances ({yes} hold, {no} fail), 0 disagreements"))
}

/// Adapted `ζ` built from a risky part and a cash part placed at, below or
/// slightly above the threshold `-max_v ⟨ζ^risky, v⟩`, so both verdicts occur.
fn random_zeta(rng: &mut ChaCha8Rng, m: &Market) -> Vec<Vec<Q>> {
    let d = m.tree.d();
    let strict = rng.gen_bool(0.5);
    (0..m.tree.len())
        .map(|n| {
            let mut z: Vec<Q> = (0..d - 1).map(|_| q(rng.gen_range(-4..=4), 2)).collect();
            z.push(Q::from_integer(0.into()));
            let top = m.tree.cone(n).vertices().iter().map(|v| dot(&z, v)).max().expect("vertices");
            let shift = match rng.gen_range(0..if strict { 2 } else { 3 }) {
                0 => q(0, 1),
                1 => q(-1, 2),
                _ => q(1, 10),
            };
            z[d - 1] = -top + shift;
            z
        })
        .collect()
}

fn theorem_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut t, mut f) = (0, 0);
    for seed in 0..50u64 {
        let m = market(seed, 1 + seed as usize % 3, 2 + seed as usize % 3, 2, 2, Na2Mode::Any, 0);
        let enl = build_enlarged(&m.tree, 3).map_err(|e| e.to_string())?;
        if !enl.vertex_complete() {
            return Err(format!("seed {seed}: grid misses a vertex"));
        }
        for k in 0..20 {
            let z = random_zeta(&mut rng, &m);
            let (cone, grid) = check_theorem_main(&enl, &z).map_err(|e| e.to_string())?;
            if cone != grid {
                return Err(format!("seed {seed}, sample {k}: cone side {cone}, grid side {grid}"));
            }
            if cone { t += 1 } else { f += 1 }
        }
    }
    Ok(format!("1000 samples ({t} in -K, {f} not), 0 disagreements"))
}

fn weak_duality() -> Outcome {
    let mut compared = 0;
    for seed in 0..200u64 {
        let m = market(seed, 1 + seed as usize % 3, 2 + (seed as usize / 3) % 2, 3, 3, Na2Mode::Any, 0);
        let claim = m.claim.clone().expect("generated with a claim");
        if let (Ok(p), Ok(d)) = (price_primal(&m.tree, &claim), price_dual(&m.tree, &claim)) {
            if d.price > p.price {
                return Err(format!("seed {seed}: dual {} > primal {}", d.price, p.price));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} of 200 instances with both sides finite, 0 violations"))
}

fn oracle_agreement() -> Outcome {
    let mut priced = 0;
    for seed in 0..100u64 {
        let mode = if seed % 2 == 0 { Na2Mode::Yes } else { Na2Mode::Any };
        let m = market(seed, 1, 2, 3, 3, mode, 0);
        let na2 = check_na2(&m.tree).holds;
        if brute_na2(&m.tree).map_err(|e| e.to_string())? != na2 {
            return Err(format!("seed {seed}: NA2 oracle disagrees"));
        }
        if !na2 {
            continue;
        }
        let claim = m.claim.clone().expect("generated with a claim");
        let oracle = brute_price_one_period(&m.tree, &claim).map_err(|e| e.to_string())?;
        let r = four_routes(&m, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
        if oracle.as_ref() != Some(&r[0]) || !all_equal(&r) {
            return Err(format!("seed {seed}: oracle {oracle:?}, routes {r:?}"));
        }
        priced += 1;
    }
    Ok(format!("100 NA2 verdicts agree; {priced} NA2 instances priced identically by oracle and four routes"))
}

const BINOMIAL: &str = r#"{
  "schema": 1, "horizon": 1, "assets": 2,
  "nodes": [
    {"id": 0, "parent": null, "mid": ["1", "1"], "spread": "1", "frictionless": true, "kernels": [["1", "0"], ["0", "1"]]},
    {"id": 1, "parent": 0, "mid": ["2", "1"], "spread": "1", "frictionless": true, "kernels": []},
    {"id": 2, "parent": 0, "mid": ["1/2", "1"], "spread": "1", "frictionless": true, "kernels": []}
  ],
  "claim": {"payoff": {"1": ["0", "1"], "2": ["0", "0"]}}
}"#;

fn frictionless_collapse() -> Outcome {
    let m = parse_market(BINOMIAL).map_err(|e| e.to_string())?;
    let claim = m.claim.clone().expect("file has a claim");
    let r = four_routes(&m, &claim)?;
    let oracle = frictionless_price(&m.tree, &claim).map_err(|e| e.to_string())?;
    let third = q(1, 3);
    if !r.iter().all(|x| x == &third) || oracle != Some(third) {
        return Err(format!("routes {r:?}, frictionless oracle {oracle:?}"));
    }
    Ok("binomial call = 1/3 by all four routes and by the frictionless oracle".into())
}

fn certificates() -> Outcome {
    let mut checked = 0;
    for seed in 0..100u64 {
        let statics = seed as usize % 3;
        let m = market(seed, 1 + seed as usize % 3, 2 + (seed as usize / 3) % 2, 2, 2, Na2Mode::Yes, statics);
        let claim = m.claim.clone().expect("generated with a claim");
        if !claim.statics.is_empty() && !robustness_check(&m.tree, &claim).map_err(|e| e.to_string())?.robust {
            continue;
        }
        let price = price_dual(&m.tree, &claim).map_err(|e| format!("seed {seed}: {e}"))?.price;
        let cert = price_primal(&m.tree, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
        verify_certificate(&m.tree, &claim, &cert, Some(&price)).map_err(|e| format!("seed {seed} primal: {e}"))?;
        checked += 1;
        let enl = build_enlarged(&m.tree, 3).map_err(|e| e.to_string())?;
        let en = price_enlarged(&enl, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
        verify_certificate(&m.tree, &claim, &en.certificate, Some(&price)).map_err(|e| format!("seed {seed} enlarged: {e}"))?;
        checked += 1;
        if claim.statics.is_empty() {
            let dp = backward_induction(&enl, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
            verify_certificate(&m.tree, &claim, &dp.certificate, Some(&price)).map_err(|e| format!("seed {seed} dp: {e}"))?;
            checked += 1;
            let rep = report::run(&Command::Hedge { route: HedgeRoute::Dp, theta_res: 3 }, &m).map_err(|e| e.to_string())?;
            if rep["result"]["certificate"]["verified"] != true {
                return Err(format!("seed {seed}: hedge report not verified"));
            }
        }
    }
    Ok(format!("{checked}/{checked} certificates re-verify (solvent residuals, admissible transfers, price = dual value)"))
}

fn invariance() -> Outcome {
    let shifts = [q(1, 1), q(-1, 2), q(7, 3), q(-5, 1), q(1, 10)];
    for seed in 0..50u64 {
        let m = market(seed, 1 + seed as usize % 2, 2 + seed as usize % 2, 2, 2, Na2Mode::Yes, 0);
        let claim = m.claim.clone().expect("generated with a claim");
        let base = four_routes(&m, &claim).map_err(|e| format!("seed {seed}: {e}"))?;
        for a in &shifts {
            let moved = four_routes(&m, &claim.shifted(a)).map_err(|e| format!("seed {seed}: {e}"))?;
            if base.iter().zip(&moved).any(|(x, y)| &(x + a) != y) {
                return Err(format!("seed {seed}: shift {a} gives {moved:?} from {base:?}"));
            }
        }
    }
    for seed in 0..10u64 {
        let opts = GenerateOptions { seed, horizon: 2, assets: 2 + seed as usize % 2, branching: 2, kernels: 2, na2: Na2Mode::Any, statics: 0 };
        let a = emit_market(&generate(&opts).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let b = emit_market(&generate(&opts).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("seed {seed}: generator output differs"));
        }
        let m = parse_market(&a).map_err(|e| e.to_string())?;
        for cmd in [
            Command::CheckNa2,
            Command::CheckNa { theta_res: 3 },
            Command::FindScps,
            Command::Price { route: Route::All, theta_res: 3 },
            Command::Hedge { route: HedgeRoute::Primal, theta_res: 3 },
        ] {
            let r1 = report::render(&report::run(&cmd, &m).map_err(|e| e.to_string())?);
            let r2 = report::render(&report::run(&cmd, &m).map_err(|e| e.to_string())?);
            if r1 != r2 {
                return Err(format!("seed {seed}: report for {cmd:?} differs between runs"));
            }
        }
    }
    Ok("50 instances x 5 shifts translate exactly on all routes; generator and reports byte-stable".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("strong duality, no options", strong_duality),
        ("strong duality with static options", strong_duality_statics),
        ("NA2 equals frictionless NA", na_equivalence),
        ("cone side equals price side", theorem_equivalence),
        ("weak duality", weak_duality),
        ("oracle agreement", oracle_agreement),
        ("frictionless collapse", frictionless_collapse),
        ("certificate validity", certificates),
        ("invariance and determinism", invariance),
    ];
    let mut failed = 0;
    let start = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS criterion {}: {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed ({:.1}s)", criteria.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
