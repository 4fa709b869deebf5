//! Agent-based simulation of a cascaded electricity market.
//!
//! Each simulated day runs three stages in order:
//!
//! 1. **Day-ahead**: utilities bid forecast demand (one profile under
//!    real-time pricing, an exclusive group of shifted profiles when
//!    flexibility is market-integrated). The market clears 24 hourly
//!    merit orders and, for exclusive groups, searches the joint
//!    selection with simulated annealing.
//! 2. **Balancing**: realized minute demand is compared against the
//!    scheduled production, imbalances are summed per 15-minute slot and
//!    covered from producer up/down offers.
//! 3. **Settlement**: spot, activation and imbalance payments are booked
//!    into a zero-sum ledger and passed on to users.
//!
//! [`engine::run_simulation`] drives a whole scenario; the
//! [`report`] module loads scenario files, runs sweeps and writes result
//! files.

pub mod agents;
pub mod balancing;
pub mod day_ahead;
pub mod engine;
pub mod error;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod settlement;
pub mod time;

pub use engine::{run_simulation, DayResult, SimulationReport};
pub use error::{Error, Result};
pub use scenario::{Regime, Scenario};

/// Price cap of the exchange; also the value assigned to served demand.
pub const PRICE_CAP: f64 = 3000.0;
