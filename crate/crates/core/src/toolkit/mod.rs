//! File formats, checkpoints, configuration and experiment harnesses behind the CLI.
mod checkpoint;
mod config;
mod formats;
mod gradcheck;
mod harness;
mod reference;
mod toy;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, model_from_bytes, save_checkpoint, MAGIC, VERSION,
};
pub use config::{load_config, parse_config, tagger_config_text, CONFIG_KEYS};
pub use formats::{
    load_embeddings, parse_corpus, read_corpus, read_embeddings, write_corpus, write_corpus_to,
};
pub use gradcheck::{build_case, check_case, GradCheckCase, GRAD_CHECK_TOLERANCE};
pub use harness::{compare_variants, depth_sweep, run_experiment, write_rows, HarnessRow, Splits};
pub use reference::{reference_loss, reference_loss_after, reference_state, Part, ReferenceState};
pub use toy::{toy_corpus, toy_splits, toy_tag, TOY_WORDS};
