//! Numerical substrate: tensors, tape autodiff, stable primitives, Adam,
//! and the seeded RNG every other module draws from.
//!
//! Everything is 64-bit and deterministic: same seed and inputs, same bits,
//! on every platform. Tensors and tapes are single-writer values with no
//! shared mutable state; they can be sent across threads freely.

pub mod adam;
mod fdcheck;
pub mod kernels;
mod rng;
mod stable;
pub mod tape;
mod tensor;

pub use adam::Adam;
pub use fdcheck::finite_difference_check;
pub use rng::{gaussian_sample, Rng};
pub use stable::{argmax, logsumexp, softmax};
pub use tape::{Gradients, NodeId, Tape};
pub use tensor::Tensor;
