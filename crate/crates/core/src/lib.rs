//! Reliability and fault-tolerance analysis for N-modular redundancy (NMR)
//! and K-of-M distributed minority and majority voting redundancy (DMMR).
//!
//! The crate is organised around a single operability predicate
//! ([`Scheme::is_operational`]) that every other analysis agrees with:
//!
//! - [`reliability`] derives exact system-reliability polynomials, both in
//!   closed form and by exhaustive enumeration of fault patterns.
//! - [`monte_carlo`] estimates the same quantity by seeded fault injection.
//! - [`gate_sim`] votes the outputs of replicated 4x4 multipliers bit by bit
//!   under stuck-at faults.
//! - [`metrics`] hosts power/delay/area data and the figure of merit built
//!   on it, and joins everything into a tradeoff report.

pub mod error;
pub mod gate_sim;
pub mod metrics;
pub mod monte_carlo;
pub mod numeric;
pub mod reliability;
pub mod scheme;

pub use error::{Error, Result};
pub use gate_sim::{Composition, Polarity, StuckFault, VotedRun};
pub use metrics::{DesignMetrics, FomRecord, MetricsTable, TradeoffRow};
pub use monte_carlo::{SimConfig, SimReport};
pub use numeric::Probability;
pub use reliability::{ReliabilityExpr, ReliabilityPoint};
pub use scheme::{FaultPattern, Scheme, SchemeKind, ToleranceProfile, ENUMERATION_LIMIT};
