use std::collections::HashMap;

use super::{normalize, Vocab};
use crate::error::{Error, Result};

/// Pre-trained word vectors keyed by canonical word, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pretrained {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl Pretrained {
    pub fn new(dim: usize) -> Self {
        Pretrained {
            dim,
            ..Pretrained::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Canonical words in first-insertion order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Adds a vector under the canonical form of `token`. Returns `true` when
    /// an earlier vector for the same word was replaced.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::EmbeddingDim {
                token: token.to_string(),
                got: vector.len(),
                expected: self.dim,
            });
        }
        let (word, _) = normalize(token);
        if let Some(&i) = self.index.get(&word) {
            self.vectors[i] = vector;
            return Ok(true);
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.push(vector);
        Ok(false)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }

    /// Number of pretrained words with no entry in `vocab`.
    pub fn absent_from(&self, vocab: &Vocab) -> usize {
        self.words
            .iter()
            .filter(|w| vocab.word_id(w) == super::RARE && w.as_str() != super::RARE_WORD)
            .count()
    }
}
