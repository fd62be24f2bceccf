//! Simulation and closed-form analysis of an amplify-and-forward relay
//! network sharing spectrum with primary receivers under average
//! interference caps.
//!
//! The crate is organised by stage:
//!
//! * [`config`] and [`channel`]: scenario parameters and seeded fading draws.
//! * [`relay`]: eligibility, power budget, clustering and phase alignment.
//! * [`rate`]: instantaneous log-det rate and the large-n closed forms.
//! * [`optimize`]: threshold and source power design.
//! * [`arp`]: the alternating relay protocol.
//! * [`sim`], [`figures`], [`report`] and [`table`]: Monte Carlo runs and
//!   tabular output.
//!
//! With the default `parallel` feature, trials run on rayon's pool; results
//! are identical to a sequential run.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arp;
pub mod channel;
pub mod config;
pub mod error;
pub mod exec;
pub mod figures;
pub mod optimize;
pub mod rate;
pub mod relay;
pub mod report;
pub mod sim;
pub mod stats;
pub mod table;

pub use nalgebra::Complex;

/// Complex double used for all channel coefficients.
pub type Complex64 = Complex<f64>;

pub use config::{ClusteringMode, LogBase, NetworkConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use sim::{run_trials, RateReport};
