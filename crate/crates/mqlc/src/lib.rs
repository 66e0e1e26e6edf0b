//! Multi-agent highway lane-changing laboratory.
//!
//! The crate is organised in layers:
//!
//! - [`sim`] — deterministic multi-lane highway world with scripted
//!   human-driven traffic and discrete meta-action control for agents.
//! - [`obs`] — per-agent kinematic observations, the stacked global state
//!   and trajectory histories.
//! - [`nn`] — a small 64-bit tape-based autodiff core (dense tensors,
//!   fully connected / graph convolution / gated recurrent layers, Adam,
//!   gradient checking, checkpoints).
//! - [`intent`] — the trajectory predictor that turns histories into
//!   per-vehicle future positions fused into observations.
//! - [`decision`] — individual and global Q-networks, urgency-gated
//!   candidate selection and joint-action arbitration.
//! - [`learn`] — replay buffers and the combined individual/global/
//!   consistency update.
//! - [`harness`] — experiment orchestration: training, evaluation,
//!   baselines, ablations, sweeps and CSV emission.

pub mod decision;
pub mod harness;
pub mod intent;
pub mod learn;
pub mod nn;
pub mod obs;
pub mod seeds;
pub mod sim;
