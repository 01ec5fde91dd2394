//! Full tagger: token features, the bidirectional stack and a softmax output layer.
mod config;
mod model;

pub use config::TaggerConfig;
pub use model::{nll_loss, ForwardPass, TaggerModel, TrainingMeta};
