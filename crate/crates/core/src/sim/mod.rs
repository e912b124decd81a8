//! Fluid-model simulation of Reno, Cubic, Vegas and BBRv1 over a single
//! droptail bottleneck.

pub mod bbr;
pub mod cubic;
mod flow;
pub mod link;
pub mod reno;
pub mod vegas;

pub use bbr::{step_bbr, BbrConfig, BbrPhase, BbrState};
pub use cubic::{cubic_window, step_cubic, CubicState};
pub use flow::{simulate_flow, simulate_flow_with, ProtocolConfig, DEFAULT_SAMPLE_INTERVAL_S};
pub use link::{LinkConfig, PathParams};
pub use reno::{step_reno, RenoPhase, RenoState};
pub use vegas::{step_vegas, VegasState};
