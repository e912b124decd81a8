//! Congestion-control identification toolkit.
//!
//! The crate is organised the way the data flows:
//!
//! * [`sim`] produces labelled flow traces from a fluid model of Reno, Cubic,
//!   Vegas and BBRv1 over a droptail bottleneck.
//! * [`features`] turns trace CSVs into balanced, windowed, normalised
//!   train/validation/test sets.
//! * [`nn`] is a bidirectional multi-layer GRU with additive attention pooling
//!   and a four-way classifier head, with a hand-written backward pass.
//! * [`train`] runs Adam with plateau learning-rate reduction and evaluates
//!   checkpoints.

mod binio;
pub mod error;
pub mod features;
pub mod label;
pub mod nn;
pub mod seed;
pub mod sim;
pub mod trace;
pub mod train;

pub use error::{Error, Result};
pub use label::ProtocolLabel;
