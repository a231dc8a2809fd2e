//! Super-replication prices `π_e(ξ)` and optimal hedges.
//!
//! Four independent routes compute the same number under NA2:
//! [`price_primal`] (cone program in the base market), [`price_dual`]
//! (consistent price systems), [`price_enlarged`] (frictionless program over
//! the randomized market) and [`backward_induction`].

mod claim;
mod dp;
mod dual;
mod enlarged;
mod primal;
mod robust;

pub use claim::{ClaimError, ClaimSpec, StaticOption};
pub use dp::{backward_induction, DpSolution, ValueFunction};
pub use dual::{price_dual, DualSolution};
pub use enlarged::{eta_from_h, price_enlarged, price_enlarged_paths, EnlargedSolution};
pub use primal::{price_primal, verify_certificate, HedgeCertificate, Residual};
pub use robust::{robustness_check, RobustnessReport};

use crate::enlarged::EnlargedError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error(transparent)]
    Claim(#[from] ClaimError),
    #[error(transparent)]
    Grid(#[from] EnlargedError),
    /// The super-hedging program is unbounded below: the market (with its
    /// static options) admits an arbitrage.
    #[error("super-hedging program is unbounded: arbitrage")]
    Unbounded,
    /// No consistent price system satisfies the option price bounds.
    #[error("no consistent price system satisfies the constraints")]
    DualInfeasible,
    #[error("no-arbitrage fails at node {node}: a one-period program is infeasible")]
    NaViolated { node: usize },
    #[error("backward induction handles claims without static options only")]
    StaticsUnsupported,
    #[error("column generation did not converge at node {node}")]
    NoConvergence { node: usize },
}
