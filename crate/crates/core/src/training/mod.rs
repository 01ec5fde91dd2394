//! Initialization, online SGD with dev-set model selection, and accuracy.
mod init;
mod sgd;
mod train;

pub use init::init_model;
pub use sgd::{apply_update, sgd_step};
pub use train::{evaluate, train, EpochRecord, TrainConfig, TrainReport};

#[cfg(test)]
mod tests;
