//! Link-level simulator and per-block optimizer for RIS-assisted multi-path
//! uplink transmission.
//!
//! The crate models an uplink network of `N` single-antenna UEs served by `M`
//! multi-antenna base stations, with one passive reconfigurable intelligent
//! surface (RIS) reflecting towards the scene. Every 50 ms block the engine
//! redraws channels, traffic and backhaul capacities, then optimizes traffic
//! splitting ratios, transmit powers, receive combiners and RIS phase shifts
//! to minimize the summed worst-path end-to-end latency of all (UE, traffic)
//! flows. Four schemes are provided: the joint optimizer (`mp_ris`), the same
//! optimizer with the RIS cascade disabled (`mp`), per-block best-path
//! selection (`ps`) and a static single path (`sp`).
//!
//! All numeric code is generic over the scalar type through [`Scalar`];
//! `f64` is the default precision and the one the shipped tolerances are
//! calibrated for. Concrete aliases for the common entry points live at the
//! crate root.

pub mod channel;
pub mod numerics;
pub mod optimizer;
pub mod phy;
mod scalar;
pub mod simulator;
pub mod traffic;

pub use scalar::{cpolar, cscale, CMatrix, CVector, Scalar};

/// Default scalar precision used by the CLI and the shipped tolerances.
pub type DefaultScalar = f64;

// TODO: restore concrete aliases as the modules land
// pub type ChannelSet64 = channel::ChannelSet<f64>;
