//! Raster types, still-image I/O, resizing and the shared frame ring.

mod frame;
pub mod ppm;
mod resize;
mod ring;
pub mod sequence;
mod stream;

pub use frame::{luma, Frame, Pixel, MAX_DIMENSION};
pub use resize::resize_nearest;
pub use ring::{FrameRing, DEFAULT_RING_CAPACITY};
pub use stream::{detokenize, tokenize, StreamToken};
