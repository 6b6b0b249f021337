//! Behavioral sleep (BS) / waking state (WS) detection in multichannel
//! rodent ECoG.
//!
//! The pipeline normalizes each channel, summarizes it with a trailing-window
//! mean and deviation, normalizes those feature sequences again, and feeds
//! them to a single sigmoid neuron. A wavelet band-energy markup produces
//! reference labels for training, and [`synth`] generates recordings with a
//! known schedule for testing.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
pub use ingest::{Hypnogram, Recording, BS, WS};
pub use model::{ChannelSet, PerceptronModel};
