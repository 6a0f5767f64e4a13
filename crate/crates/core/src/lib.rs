//! Regularized residual quantization (RRQ) of whole grayscale images.
//!
//! A set of similar-looking images is decorrelated globally
//! ([`preprocess`]), then quantized by a stack of layers whose random
//! codebooks are shaped by reverse water-filling on the residual variance
//! profile ([`waterfill`], [`rrq`]). The stack compresses at any depth
//! ([`codec`]) and, because it only knows clean-image statistics, also acts
//! as a denoiser when truncated before it starts reproducing noise
//! ([`eval`]).
//!
//! Runnable walkthroughs live in the crate's `examples/` directory:
//!
//! ```text
//! cargo run --release --example waterfill
//! cargo run --release --example preprocess
//! cargo run --release --example compress
//! cargo run --release --example rate_distortion
//! cargo run --release --example denoise
//! cargo run --release --example kmeans_baseline
//! cargo run --release --example synth
//! ```
//!
//! The `rrq` binary wraps the same pipeline for image directories.

pub mod cli;
pub mod codec;
pub mod error;
pub mod eval;
pub mod image;
pub mod normal;
pub mod pgm;
pub mod preprocess;
pub mod rrq;
pub mod waterfill;

pub use error::{Error, Result};
pub use image::ImageGray;
pub use preprocess::PreprocessModel;
pub use rrq::{IndexCode, ResidualQuantizer, RrqModel, TrainConfig};
pub use waterfill::{VarianceProfile, WaterfillSolution};
