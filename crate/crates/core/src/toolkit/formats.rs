use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{Pretrained, TaggedSentence};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a two-column corpus: `word<TAB>tag` per line, blank lines between
/// sentences, lines starting with `#` skipped.
pub fn parse_corpus(path: &Path) -> Result<Vec<TaggedSentence>> {
    read_corpus(open(path)?, path)
}

/// [`parse_corpus`] over any reader; `path` only labels errors.
pub fn read_corpus<R: BufRead>(reader: R, path: &Path) -> Result<Vec<TaggedSentence>> {
    let mut sentences = Vec::new();
    let mut current = TaggedSentence {
        words: Vec::new(),
        tags: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::replace(
                    &mut current,
                    TaggedSentence {
                        words: Vec::new(),
                        tags: Vec::new(),
                    },
                ));
            }
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(word), Some(tag), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_error(
                path,
                i + 1,
                "expected exactly one tab: `word<TAB>tag`",
            ));
        };
        if word.is_empty() || tag.is_empty() {
            return Err(parse_error(path, i + 1, "empty word or tag"));
        }
        current.words.push(word.to_string());
        current.tags.push(tag.to_string());
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    Ok(sentences)
}

/// Inverse of [`read_corpus`] for corpora it can represent.
pub fn write_corpus_to<W: Write>(mut out: W, sentences: &[TaggedSentence]) -> std::io::Result<()> {
    for s in sentences {
        let fine = |f: &str| !f.is_empty() && !f.contains(['\t', '\n', '\r']);
        let ok = !s.is_empty()
            && s.words.len() == s.tags.len()
            && s.words
                .iter()
                .all(|w| fine(w) && !w.starts_with('#') && !w.trim().is_empty())
            && s.tags.iter().all(|t| fine(t));
        if !ok {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!(
                    "sentence not representable in the corpus format: {:?}",
                    s.words
                ),
            ));
        }
        for (w, t) in s.words.iter().zip(&s.tags) {
            writeln!(out, "{w}\t{t}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_corpus(path: &Path, sentences: &[TaggedSentence]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus_to(BufWriter::new(file), sentences).map_err(|e| Error::io(path, e))
}

/// Reads `token v1 ... vD` lines into canonical-word vectors. Every line must
/// have `expected_dim` values; a later duplicate replaces an earlier one.
pub fn load_embeddings(path: &Path, expected_dim: usize) -> Result<Pretrained> {
    read_embeddings(open(path)?, path, expected_dim)
}

pub fn read_embeddings<R: BufRead>(
    reader: R,
    path: &Path,
    expected_dim: usize,
) -> Result<Pretrained> {
    let mut table = Pretrained::new(expected_dim);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let values = fields
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_error(path, i + 1, format!("`{token}`: {e}")))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(
                path,
                i + 1,
                format!("`{token}`: non-finite value"),
            ));
        }
        if table.insert(token, values)? {
            log::warn!(
                "{}:{}: duplicate embedding for `{token}`, keeping the later one",
                path.display(),
                i + 1
            );
        }
    }
    Ok(table)
}
