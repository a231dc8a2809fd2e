//! `superhedge`: no-arbitrage checks, super-replication prices and hedges
//! for markets with proportional transaction costs.
//!
//! Exit codes: 0 when a result was computed (an arbitrage verdict included),
//! 2 for malformed input or arguments, 1 for I/O failures.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use superhedge::generate::{generate, GenerateOptions, Na2Mode};
use superhedge::market_file::{emit_market, parse_market};
use superhedge::report::{self, Command, HedgeRoute, Oracle, Route};

#[derive(Parser)]
#[command(name = "superhedge", version, about = "Super-replication under proportional transaction costs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Market file (JSON).
    market: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add wall-clock time to the report (breaks byte-for-byte stability).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Primal,
    Dual,
    Enlarged,
    Dp,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum HedgeRouteArg {
    Primal,
    Enlarged,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    PriceOnePeriod,
    Na2,
    Frictionless,
}

#[derive(Clone, Copy, ValueEnum)]
enum Na2Arg {
    Yes,
    No,
    Any,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide NA2 on the scenario tree.
    CheckNa2 {
        #[command(flatten)]
        common: Common,
    },
    /// Decide no-arbitrage for the randomized frictionless price.
    CheckNa {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        theta_res: usize,
    },
    /// Search for a consistent price system.
    FindScps {
        #[command(flatten)]
        common: Common,
    },
    /// Super-replication price of the file's claim.
    Price {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        route: RouteArg,
        #[arg(long, default_value_t = 3)]
        theta_res: usize,
    },
    /// Optimal hedge with its verified terminal residuals.
    Hedge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "primal")]
        route: HedgeRouteArg,
        #[arg(long, default_value_t = 3)]
        theta_res: usize,
    },
    /// Check that no nonzero static option position is free.
    RobustnessCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Compare against an independent oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        oracle: OracleArg,
        #[arg(long, default_value_t = 3)]
        theta_res: usize,
    },
    /// Write a seeded random market file.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long = "T", alias = "horizon")]
        horizon: usize,
        #[arg(long = "d", alias = "assets")]
        assets: usize,
        #[arg(long, default_value_t = 2)]
        branching: usize,
        #[arg(long, default_value_t = 2)]
        kernels: usize,
        #[arg(long, value_enum, default_value = "any")]
        na2: Na2Arg,
        #[arg(long, default_value_t = 0)]
        statics: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Io(String),
}

fn write(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze(common: &Common, cmd: Command) -> Result<(), Failure> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&common.market).map_err(|e| Failure::Io(format!("{}: {e}", common.market.display())))?;
    let market = parse_market(&text).map_err(|e| Failure::Input(format!("{}: {e}", common.market.display())))?;
    let mut rep = report::run(&cmd, &market).map_err(|e| Failure::Input(e.to_string()))?;
    if common.timing {
        report::add_timing(&mut rep, started.elapsed().as_millis());
    }
    write(common.out.as_ref(), &report::render(&rep))
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::CheckNa2 { common } => analyze(&common, Command::CheckNa2),
        Cmd::CheckNa { common, theta_res } => analyze(&common, Command::CheckNa { theta_res }),
        Cmd::FindScps { common } => analyze(&common, Command::FindScps),
        Cmd::Price { common, route, theta_res } => {
            let route = match route {
                RouteArg::Primal => Route::Primal,
                RouteArg::Dual => Route::Dual,
                RouteArg::Enlarged => Route::Enlarged,
                RouteArg::Dp => Route::Dp,
                RouteArg::All => Route::All,
            };
            analyze(&common, Command::Price { route, theta_res })
        }
        Cmd::Hedge { common, route, theta_res } => {
            let route = match route {
                HedgeRouteArg::Primal => HedgeRoute::Primal,
                HedgeRouteArg::Enlarged => HedgeRoute::Enlarged,
                HedgeRouteArg::Dp => HedgeRoute::Dp,
            };
            analyze(&common, Command::Hedge { route, theta_res })
        }
        Cmd::RobustnessCheck { common } => analyze(&common, Command::RobustnessCheck),
        Cmd::Verify { common, oracle, theta_res } => {
            let oracle = match oracle {
                OracleArg::PriceOnePeriod => Oracle::PriceOnePeriod,
                OracleArg::Na2 => Oracle::Na2,
                OracleArg::Frictionless => Oracle::Frictionless,
            };
            analyze(&common, Command::Verify { oracle, theta_res })
        }
        Cmd::Generate { seed, horizon, assets, branching, kernels, na2, statics, out } => {
            let na2 = match na2 {
                Na2Arg::Yes => Na2Mode::Yes,
                Na2Arg::No => Na2Mode::No,
                Na2Arg::Any => Na2Mode::Any,
            };
            let opts = GenerateOptions { seed, horizon, assets, branching, kernels, na2, statics };
            let market = generate(&opts).map_err(|e| Failure::Input(e.to_string()))?;
            let text = emit_market(&market).map_err(|e| Failure::Input(e.to_string()))?;
            write(out.as_ref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
