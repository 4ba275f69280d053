//! Software model of a real-time video enhancement and inference system.
//!
//! Frames travel from a source through a chain of enhancement stages
//! (histogram equalization being the reference stage), into an inference
//! backend, and out to a sink. Three scheduling modes are provided
//! (asynchronous, synchronous and four-stage pipelined) along with the
//! evaluation harness used to measure how enhancement recovers accuracy on
//! darkened input.

pub mod cli;
pub mod error;
pub mod eval;
pub mod histeq;
pub mod inference;
pub mod scheduler;
pub mod vep;
pub mod video;

pub use error::{LeapError, Result};
pub use video::{luma, Frame, FrameRing, Pixel, StreamToken};
