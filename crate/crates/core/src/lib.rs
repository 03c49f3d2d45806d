//! Discrete-event simulation of QoS-aware geographic routing in wireless
//! sensor networks.
//!
//! Packets travel hop by hop toward a single sink. At every hop the holder
//! scores its allowed neighbors by predicted queueing delay, residual energy
//! and link reception rate, forwards to the cheapest one, and drops packets
//! that can no longer meet their deadline. Relays serve real-time traffic
//! ahead of non-real-time traffic without preemption.

pub mod config;
pub mod energy;
pub mod engine;
pub mod geometry;
pub mod link;
pub mod node;
pub mod queueing;
pub mod report;
pub mod routing;

pub use config::{ConfigError, ScenarioConfig};
pub use engine::{run, DropCause, Metrics, Simulation};
