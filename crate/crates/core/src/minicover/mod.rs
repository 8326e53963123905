//! MiniCover: a deterministic, seeded dodge-the-fireball room.
//!
//! The player moves along the bottom of a 32x32 grayscale room facing four
//! monster lanes on the opposite wall. Monsters appear at random and never
//! leave; each monster occasionally launches a fireball that falls toward
//! the player and drifts sideways. A fireball that reaches the bottom near
//! the player turns into a growing explosion that ends the episode; walls
//! slide into view when the player hugs either edge of the room. Rendering
//! is a pure function of state, and every random decision comes from the
//! episode's seeded stream, so replaying a seed and action sequence
//! reproduces each frame bit-exactly.

mod state;

pub use state::{
    collect_episodes, ground_truth, render, replay_episode, replay_frames, step, Action, EnvConfig,
    EpisodeLog, Explosion, Fireball, WorldState, LANE_COLS,
};

use crate::{Error, Result};

/// 32x32 grayscale frame with pixels in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pixels: Vec<f64>,
}

impl Frame {
    pub const WIDTH: usize = 32;
    pub const HEIGHT: usize = 32;

    pub fn blank() -> Self {
        Frame { pixels: vec![0.0; Self::WIDTH * Self::HEIGHT] }
    }

    pub fn from_pixels(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != Self::WIDTH * Self::HEIGHT {
            return Err(Error::Parameter(format!(
                "frame needs {} pixels, got {}",
                Self::WIDTH * Self::HEIGHT,
                pixels.len()
            )));
        }
        if !pixels.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p)) {
            return Err(Error::Parameter("frame pixels must lie in [0, 1]".into()));
        }
        Ok(Frame { pixels })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * Self::WIDTH + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * Self::WIDTH + col] = value;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Quantize to bytes as stored in dataset files: round(pixel * 255).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().map(|p| (p * 255.0).round() as u8).collect()
    }

    /// Inverse of [`Frame::to_bytes`]; re-encoding reproduces `bytes` exactly.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::WIDTH * Self::HEIGHT {
            return Err(Error::Format(format!(
                "frame blob needs {} bytes, got {}",
                Self::WIDTH * Self::HEIGHT,
                bytes.len()
            )));
        }
        Ok(Frame { pixels: bytes.iter().map(|&b| b as f64 / 255.0).collect() })
    }
}
