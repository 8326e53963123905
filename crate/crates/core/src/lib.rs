//! World-model laboratory on a synthetic dodge-the-fireball environment.
//!
//! The crate is organized as a pipeline:
//!
//! - [`numcore`] — f64 tensors, a tape-based reverse-mode autodiff engine,
//!   numerically stable primitives, Adam, and a seeded RNG.
//! - [`minicover`] — the MiniCover environment: a 32x32 grayscale room where
//!   monsters appear, launch fireballs, fireballs explode near the player,
//!   and walls enter view at the room's edges.
//! - [`vae`] — MLP variational autoencoder compressing frames to latents.
//! - [`mdrnn`] — single-layer LSTM with a mixture-density head modeling the
//!   next latent given the current latent and action.
//! - [`dreamer`] — closed-loop rollouts that feed sampled predictions back
//!   as inputs, recording mixture weights per step.
//! - [`analysis`] — frame event detectors, per-dream main-component
//!   statistics, and the Mann-Whitney U test behind the attribution report.
//! - [`persist`] — manifest + binary-blob file formats for datasets,
//!   checkpoints, latent datasets, and dream traces.

pub mod analysis;
pub mod dreamer;
mod error;
pub mod mdrnn;
pub mod minicover;
pub mod numcore;
pub mod persist;
pub mod vae;

pub use error::{Error, Result};
