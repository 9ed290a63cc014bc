//! Finite-blocklength achievability and converse bounds on the secrecy rate of
//! wiretap channels.
//!
//! Internal units are nats throughout; conversion to bits happens only where a
//! [`bound::BoundPoint`] is reported.

pub mod achievability;
pub mod asymptotics;
pub mod bound;
pub mod channels;
pub mod converse;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod probkit;
pub mod smallscale;

pub use error::{Error, Result};
pub use exec::Exec;
