//! Structured, deterministic reports for every command.
//!
//! Reports are JSON objects with sorted keys and exact ratio strings. The
//! same market and options always render to the same bytes; wall-clock
//! timing is added by the caller only on request.

use crate::arbitrage::{
    arbitrage_is_valid, check_ftap, check_na2, check_na_frictionless, find_scps, kernels_are_martingales,
    witness_is_valid, Interiority,
};
use crate::enlarged::{build_enlarged, EnlargedError};
use crate::market_file::{digest, Market, SpecError};
use crate::oracles::{brute_na2, brute_price_one_period, frictionless_price, OracleError};
use crate::pricing::{
    backward_induction, price_dual, price_enlarged, price_primal, robustness_check, verify_certificate, ClaimSpec,
    HedgeCertificate, PricingError,
};
use crate::rational::{fmt_q, fmt_vec};
use crate::Q;
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Primal,
    Dual,
    Enlarged,
    Dp,
    All,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Primal => "primal",
            Route::Dual => "dual",
            Route::Enlarged => "enlarged",
            Route::Dp => "dp",
            Route::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeRoute {
    Primal,
    Enlarged,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    PriceOnePeriod,
    Na2,
    Frictionless,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    CheckNa2,
    CheckNa { theta_res: usize },
    FindScps,
    Price { route: Route, theta_res: usize },
    Hedge { route: HedgeRoute, theta_res: usize },
    RobustnessCheck,
    Verify { oracle: Oracle, theta_res: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("the market file has no claim")]
    MissingClaim,
    #[error("robustness-check needs at least one static option")]
    NoStatics,
    #[error(transparent)]
    Grid(#[from] EnlargedError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Pricing(PricingError),
}

const CLOSURE_NOTE: &str = "consistent price systems are optimized over closed dual slices; the supremum over strictly \
consistent systems has the same value, and attainment is reported as interior or boundary";
const GRID_NOTE: &str = "interior grid points are tested against the relative interior of the successor hull and \
boundary grid points against the closed hull";
const ENLARGED_NOTE: &str = "the enlarged program quantifies over all grid points, boundary points included";
const DP_NOTE: &str = "backward induction refines each one-period problem by column generation over exact points \
instead of a fixed theta grid";

fn s(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn sv(v: &[Q]) -> Value {
    json!(fmt_vec(v))
}

fn claim(m: &Market) -> Result<&ClaimSpec, ReportError> {
    m.claim.as_ref().ok_or(ReportError::MissingClaim)
}

fn verdict(e: &PricingError) -> Value {
    let (status, meaning) = match e {
        PricingError::Unbounded => ("unbounded", "the market with its static options admits an arbitrage"),
        PricingError::DualInfeasible => ("dual_infeasible", "no consistent price system meets the option bounds"),
        PricingError::NaViolated { .. } => ("na_violated", "a one-period program has no martingale weights"),
        PricingError::StaticsUnsupported => ("unsupported", "backward induction prices claims without static options"),
        PricingError::NoConvergence { .. } => ("no_convergence", "column generation hit its round limit"),
        PricingError::Claim(_) | PricingError::Grid(_) => ("error", "invalid input"),
    };
    json!({ "status": status, "meaning": meaning, "detail": e.to_string() })
}

fn spec_error(e: PricingError) -> ReportError {
    match e {
        PricingError::Grid(g) => ReportError::Grid(g),
        other => ReportError::Pricing(other),
    }
}

fn is_input_error(e: &PricingError) -> bool {
    matches!(e, PricingError::Claim(_) | PricingError::Grid(_))
}

fn certificate_json(m: &Market, c: &ClaimSpec, cert: &HedgeCertificate, expected: Option<&Q>) -> Value {
    let mask = m.tree.polar_mask();
    let eta: Vec<Value> = (0..m.tree.len())
        .filter(|&n| mask.is_reachable(n) && !m.tree.is_terminal(n))
        .map(|n| json!({ "node": n, "eta": sv(&cert.eta[n]) }))
        .collect();
    let residuals: Vec<Value> = cert
        .residuals
        .iter()
        .map(|r| json!({ "node": r.node, "residual": sv(&r.value), "in_cone": r.in_cone }))
        .collect();
    let check = verify_certificate(&m.tree, c, cert, expected);
    json!({
        "price": s(&cert.price),
        "ell": sv(&cert.ell),
        "eta": eta,
        "residuals": residuals,
        "verified": check.is_ok(),
        "verification_error": check.err(),
    })
}

fn check_na2_result(m: &Market) -> Value {
    let r = check_na2(&m.tree);
    json!({
        "holds": r.holds,
        "failing_node": r.failing_node,
        "failing_vertex": r.failing_vertex.as_deref().map(sv),
        "witness": r.witness.as_deref().map(sv),
        "witness_valid": witness_is_valid(&m.tree, &r),
        "ftap_holds": check_ftap(&m.tree).holds,
    })
}

fn check_na_result(m: &Market, theta_res: usize) -> Result<Value, ReportError> {
    let enl = build_enlarged(&m.tree, theta_res)?;
    let r = check_na_frictionless(&enl)?;
    let interior = (0..m.tree.len()).map(|n| enl.points(n).iter().filter(|p| p.interior).count()).sum::<usize>();
    let arbitrage = r.arbitrage.as_ref().map(|a| {
        json!({
            "node": a.node,
            "theta": sv(&a.theta),
            "x": sv(&a.x),
            "h": sv(&a.h),
            "on_grid": a.on_grid,
            "valid": arbitrage_is_valid(&enl, a),
        })
    });
    Ok(json!({
        "holds": r.holds,
        "grid_points": enl.grid_size(),
        "interior_grid_points": interior,
        "vertex_complete": enl.vertex_complete(),
        "transition_kernels": r.kernels.len(),
        "kernels_valid": kernels_are_martingales(&enl, &r),
        "arbitrage": arbitrage,
        "agrees_with_na2": check_na2(&m.tree).holds == r.holds,
    }))
}

fn interiority(i: Interiority) -> &'static str {
    match i {
        Interiority::Strict => "interior",
        Interiority::Boundary => "boundary",
    }
}

fn find_scps_result(m: &Market) -> Value {
    let ftap = check_ftap(&m.tree).holds;
    match find_scps(&m.tree) {
        None => json!({ "found": false, "ftap_holds": ftap }),
        Some(p) => {
            let nodes: Vec<Value> = (0..m.tree.len())
                .filter(|&n| p.z[n].is_some())
                .map(|n| {
                    json!({
                        "node": n,
                        "mass": s(&p.mass[n]),
                        "z": sv(p.z[n].as_ref().expect("filtered")),
                        "attainment": p.interiority[n].map(interiority),
                    })
                })
                .collect();
            let check = p.verify(&m.tree);
            json!({
                "found": true,
                "strict": p.all_strict(),
                "nodes": nodes,
                "verified": check.is_ok(),
                "verification_error": check.err(),
                "ftap_holds": ftap,
            })
        }
    }
}

fn price_result(m: &Market, route: Route, theta_res: usize) -> Result<(Value, Vec<&'static str>), ReportError> {
    let c = claim(m)?;
    let mut notes = Vec::new();
    let mut routes = Map::new();
    let mut values: Vec<Option<Q>> = Vec::new();
    let wanted = |r: Route| route == Route::All || route == r;
    let enl = if wanted(Route::Enlarged) || wanted(Route::Dp) { Some(build_enlarged(&m.tree, theta_res)?) } else { None };
    let mut record = |name: &str, out: Result<(Q, Value), PricingError>| -> Result<(), ReportError> {
        match out {
            Ok((v, mut extra)) => {
                extra["status"] = json!("ok");
                extra["value"] = s(&v);
                routes.insert(name.into(), extra);
                values.push(Some(v));
            }
            Err(e) if is_input_error(&e) => return Err(spec_error(e)),
            Err(e) => {
                routes.insert(name.into(), verdict(&e));
                values.push(None);
            }
        }
        Ok(())
    };
    if wanted(Route::Primal) {
        record("primal", price_primal(&m.tree, c).map(|h| (h.price, json!({ "ell": sv(&h.ell) }))))?;
    }
    if wanted(Route::Dual) {
        record(
            "dual",
            price_dual(&m.tree, c).map(|d| (d.price, json!({ "attainment": interiority(d.attainment) }))),
        )?;
    }
    if wanted(Route::Enlarged) {
        notes.push(ENLARGED_NOTE);
        let enl = enl.as_ref().expect("built above");
        record("enlarged", price_enlarged(enl, c).map(|e| (e.price, json!({ "ell": sv(&e.ell) }))))?;
    }
    if wanted(Route::Dp) {
        notes.push(DP_NOTE);
        let enl = enl.as_ref().expect("built above");
        record("dp", backward_induction(enl, c).map(|d| (d.price, json!({ "one_period_programs": d.programs }))))?;
    }
    let mut out = json!({ "routes": routes, "theta_res": theta_res });
    if values.len() > 1 {
        let all: Option<Vec<Q>> = values.into_iter().collect();
        match all {
            Some(v) => {
                let gap = v.iter().max().expect("nonempty") - v.iter().min().expect("nonempty");
                out["gap"] = s(&gap);
                out["summary"] = json!(format!("duality gap: {gap}"));
            }
            None => {
                out["gap"] = Value::Null;
                out["summary"] = json!("duality gap: undefined (a route reported a verdict instead of a value)");
            }
        }
    }
    Ok((out, notes))
}

fn hedge_result(m: &Market, route: HedgeRoute, theta_res: usize) -> Result<(Value, Vec<&'static str>), ReportError> {
    let c = claim(m)?;
    let (name, out, h, notes) = match route {
        HedgeRoute::Primal => ("primal", price_primal(&m.tree, c), None, vec![]),
        HedgeRoute::Enlarged => {
            let enl = build_enlarged(&m.tree, theta_res)?;
            match price_enlarged(&enl, c) {
                Ok(e) => ("enlarged", Ok(e.certificate), Some(e.h), vec![ENLARGED_NOTE]),
                Err(e) => ("enlarged", Err(e), None, vec![ENLARGED_NOTE]),
            }
        }
        HedgeRoute::Dp => {
            let enl = build_enlarged(&m.tree, theta_res)?;
            match backward_induction(&enl, c) {
                Ok(d) => ("dp", Ok(d.certificate), Some(d.h), vec![DP_NOTE]),
                Err(e) => ("dp", Err(e), None, vec![DP_NOTE]),
            }
        }
    };
    let body = match out {
        Ok(cert) => {
            let reference = price_primal(&m.tree, c).ok().map(|p| p.price);
            let mut v = certificate_json(m, c, &cert, reference.as_ref());
            if let Some(h) = h {
                let mask = m.tree.polar_mask();
                v["h"] = json!((0..m.tree.len())
                    .filter(|&n| mask.is_reachable(n) && !m.tree.is_terminal(n))
                    .map(|n| json!({ "node": n, "h": sv(&h[n]) }))
                    .collect::<Vec<_>>());
            }
            v["status"] = json!("ok");
            v
        }
        Err(e) if is_input_error(&e) => return Err(spec_error(e)),
        Err(e) => verdict(&e),
    };
    Ok((json!({ "route": name, "certificate": body }), notes))
}

fn robustness_result(m: &Market) -> Result<Value, ReportError> {
    let c = claim(m)?;
    if c.statics.is_empty() {
        return Err(ReportError::NoStatics);
    }
    let r = robustness_check(&m.tree, c).map_err(spec_error)?;
    Ok(json!({ "robust": r.robust, "offending_position": r.offending.as_deref().map(sv), "options": c.statics.len() }))
}

fn verify_result(m: &Market, oracle: Oracle, theta_res: usize) -> Result<Value, ReportError> {
    Ok(match oracle {
        Oracle::Na2 => {
            let o = brute_na2(&m.tree)?;
            let lp = check_na2(&m.tree).holds;
            json!({ "oracle": "na2", "oracle_value": o, "lp_value": lp, "agree": o == lp })
        }
        Oracle::PriceOnePeriod => {
            let c = claim(m)?;
            let o = brute_price_one_period(&m.tree, c)?;
            let (p, _) = price_result(m, Route::All, theta_res)?;
            let mut agree = true;
            for r in ["primal", "dual", "enlarged", "dp"] {
                let v = p["routes"][r]["value"].as_str().map(str::to_string);
                agree &= v == o.as_ref().map(fmt_q);
            }
            json!({ "oracle": "price-one-period", "oracle_value": o.as_ref().map(s), "routes": p["routes"], "agree": agree })
        }
        Oracle::Frictionless => {
            let c = claim(m)?;
            let o = frictionless_price(&m.tree, c)?;
            let primal = price_primal(&m.tree, c).ok().map(|h| h.price);
            json!({
                "oracle": "frictionless",
                "oracle_value": o.as_ref().map(s),
                "primal_value": primal.as_ref().map(s),
                "agree": o == primal,
            })
        }
    })
}

fn command_echo(cmd: &Command) -> Value {
    match cmd {
        Command::CheckNa2 => json!({ "name": "check-na2" }),
        Command::CheckNa { theta_res } => json!({ "name": "check-na", "theta_res": theta_res }),
        Command::FindScps => json!({ "name": "find-scps" }),
        Command::Price { route, theta_res } => json!({ "name": "price", "route": route.name(), "theta_res": theta_res }),
        Command::Hedge { route, theta_res } => {
            let r = match route {
                HedgeRoute::Primal => "primal",
                HedgeRoute::Enlarged => "enlarged",
                HedgeRoute::Dp => "dp",
            };
            json!({ "name": "hedge", "route": r, "theta_res": theta_res })
        }
        Command::RobustnessCheck => json!({ "name": "robustness-check" }),
        Command::Verify { oracle, theta_res } => {
            let o = match oracle {
                Oracle::PriceOnePeriod => "price-one-period",
                Oracle::Na2 => "na2",
                Oracle::Frictionless => "frictionless",
            };
            json!({ "name": "verify", "oracle": o, "theta_res": theta_res })
        }
    }
}

/// Runs `cmd` on `market` and assembles the report.
pub fn run(cmd: &Command, market: &Market) -> Result<Value, ReportError> {
    let mut notes = vec![CLOSURE_NOTE];
    let result = match cmd {
        Command::CheckNa2 => check_na2_result(market),
        Command::CheckNa { theta_res } => {
            notes.push(GRID_NOTE);
            check_na_result(market, *theta_res)?
        }
        Command::FindScps => find_scps_result(market),
        Command::Price { route, theta_res } => {
            let (v, extra) = price_result(market, *route, *theta_res)?;
            notes.extend(extra);
            v
        }
        Command::Hedge { route, theta_res } => {
            let (v, extra) = hedge_result(market, *route, *theta_res)?;
            notes.extend(extra);
            v
        }
        Command::RobustnessCheck => robustness_result(market)?,
        Command::Verify { oracle, theta_res } => verify_result(market, *oracle, *theta_res)?,
    };
    let mask = market.tree.polar_mask();
    Ok(json!({
        "command": command_echo(cmd),
        "instance": {
            "digest": digest(market)?,
            "horizon": market.tree.horizon(),
            "assets": market.tree.d(),
            "nodes": market.tree.len(),
            "reachable_nodes": mask.reachable.iter().filter(|r| **r).count(),
            "static_options": market.claim.as_ref().map_or(0, |c| c.statics.len()),
        },
        "result": result,
        "deviations": notes,
    }))
}

/// Records wall-clock time; only on request, since it varies between runs.
pub fn add_timing(report: &mut Value, millis: u128) {
    report["timing_ms"] = json!(millis as u64);
}

/// Pretty JSON with a trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("plain data");
    s.push('\n');
    s
}
