//! Equilibrium computation, welfare metrics, starting-price optimization and
//! Monte Carlo validation for the hybrid Dutch/English clock auction with
//! time-discounted item values.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod optimize;
pub mod simulate;

pub use error::{AuctionError, Result};
pub use model::{MarketConfig, NumericalSettings, TimeCostKind, TimeCostSpec, ValueDistribution};
