//! Token normalization, vocabularies and the word/character/capitalization
//! input representation.

mod embed;
mod normalize;
mod pretrained;
mod vocab;

pub use embed::{embed_backward, embed_token, EmbedCache, EmbedDims, EmbeddingTables};
pub use normalize::normalize;
pub use pretrained::Pretrained;
pub use vocab::{
    build_vocab, TaggedSentence, TokenFeatures, Vocab, AFFIX_LEN, PAD, PAD_CHAR, PAD_WORD, RARE,
    RARE_TAG, RARE_TAG_NAME, RARE_WORD, UNK_CHAR,
};
