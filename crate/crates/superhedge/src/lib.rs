//! Robust super-replication under proportional transaction costs on finite
//! scenario trees, in exact rational arithmetic.
//!
//! The crate builds solvency cones from bid–ask data, decides the
//! no-arbitrage conditions of the cone market and of its randomized
//! frictionless counterpart, and prices claims by four independent routes
//! (a primal cone program, a dual program over consistent price systems, a
//! frictionless program on the enlarged space, and backward induction).

pub mod arbitrage;
pub mod cone;
pub mod enlarged;
pub mod generate;
mod linalg;
pub mod lp;
pub mod market_file;
pub mod oracles;
pub mod pricing;
pub mod rational;
pub mod report;
pub mod scenario;

pub type Q = num_rational::BigRational;
