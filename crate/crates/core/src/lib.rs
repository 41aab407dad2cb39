//! Mission-operations model of a 6U LEO CubeSat carrying a dual-SDR,
//! four front-end RF payload and a laser terminal.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the pure
//! models: scenario parameters, orbit geometry and pass prediction, RF and
//! optical link assessment, battery bookkeeping, the payload device state
//! machine, experiment scheduling and the time-stepped simulator. File
//! formats and the command-line front end live in the `starlab` crate.
//!
//! All internal quantities are SI: seconds, hertz, bits, watts and
//! watt-hours. Distances use kilometres because every geometry input
//! (altitude, slant range, optical range window) is quoted in km.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod energy;
pub mod error;
pub mod link;
pub mod orbit;
pub mod payload;
pub mod scenario;
pub mod schedule;
pub mod sim;
mod window;

pub use error::{DomainError, LinkError, PayloadError, SimError};
pub use scenario::{default_scenario, demo_scenario, validate_scenario, Band, Scenario};
