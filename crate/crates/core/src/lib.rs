//! Desk-scale simulator of in-memory baseband processing on resistive
//! crossbar arrays for MIMO-OFDM links.
//!
//! The crate models single analogue memory cells ([`device`]), differential
//! conductance pairs performing one-step matrix-vector products
//! ([`crossbar`]), the OFDM transform stage ([`ofdm`]), the feedback circuit
//! computing L-MMSE/ZF detection ([`detector`]), pilot-based channel
//! estimation ([`channel_est`]), and an end-to-end link with fading, noise
//! and quality metrics ([`link`]). Every analog event is accounted in an
//! energy/latency ledger ([`ledger`]) from which throughput and efficiency
//! figures derive. All randomness flows through named, reproducible streams
//! ([`rng`]).

pub mod channel;
pub mod channel_est;
pub mod complex_map;
pub mod config;
pub mod crossbar;
pub mod detector;
pub mod device;
pub mod error;
pub mod ledger;
pub mod link;
pub mod ofdm;
pub mod pgm;
pub mod qam;
pub mod rng;

pub use error::{Error, Result};
