//! Sequence tagging with stacked bidirectional LSTMs and skip connections
//! between layers `l-2` and `l`, trained by online SGD with hand-derived
//! backpropagation through time.

pub mod error;
pub mod features;
pub mod numerics;
pub mod recurrent;
pub mod tagger;
pub mod toolkit;
pub mod training;

pub use error::{Error, Result};
