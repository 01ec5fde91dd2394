use std::collections::HashMap;

use super::normalize;
use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const RARE: usize = 1;
pub const PAD_CHAR: usize = 0;
pub const UNK_CHAR: usize = 1;
pub const RARE_TAG: usize = 0;

pub const PAD_WORD: &str = "<pad>";
pub const RARE_WORD: &str = "<rare>";
pub const RARE_TAG_NAME: &str = "<RARE>";

/// Number of leading and trailing characters embedded per word.
pub const AFFIX_LEN: usize = 5;

/// A sentence of raw tokens with their gold tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedSentence {
    pub words: Vec<String>,
    pub tags: Vec<String>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Inputs for one token position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenFeatures {
    pub word_id: usize,
    /// `d` word ids centred on the token, `PAD` past the sentence edges.
    pub window_ids: Vec<usize>,
    pub prefix_ids: [usize; AFFIX_LEN],
    pub suffix_ids: [usize; AFFIX_LEN],
    pub cap: bool,
}

/// Dense id maps for words, characters and tags. Reserved entries come first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    word_ids: HashMap<String, usize>,
    chars: Vec<char>,
    char_ids: HashMap<char, usize>,
    tags: Vec<String>,
    tag_ids: HashMap<String, usize>,
}

fn index<K: Clone + std::hash::Hash + Eq>(items: &[K]) -> HashMap<K, usize> {
    items
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect()
}

impl Vocab {
    /// Rebuilds a vocabulary from its non-reserved entries, in id order.
    pub fn from_parts(words: Vec<String>, chars: Vec<char>, tags: Vec<String>) -> Result<Self> {
        let mut all_words = vec![PAD_WORD.to_string(), RARE_WORD.to_string()];
        all_words.extend(words);
        // PAD_CHAR and UNK_CHAR occupy slots 0 and 1; the placeholders never match input
        let mut all_chars = vec!['\u{0}', '\u{1}'];
        all_chars.extend(chars);
        let mut all_tags = vec![RARE_TAG_NAME.to_string()];
        all_tags.extend(tags);
        let vocab = Vocab {
            word_ids: index(&all_words),
            char_ids: index(&all_chars),
            tag_ids: index(&all_tags),
            words: all_words,
            chars: all_chars,
            tags: all_tags,
        };
        if vocab.word_ids.len() != vocab.words.len()
            || vocab.char_ids.len() != vocab.chars.len()
            || vocab.tag_ids.len() != vocab.tags.len()
        {
            return Err(Error::Corrupt("duplicate vocabulary entry".into()));
        }
        Ok(vocab)
    }

    /// Non-reserved words, characters and tags in id order.
    pub fn parts(&self) -> (&[String], &[char], &[String]) {
        (&self.words[2..], &self.chars[2..], &self.tags[1..])
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn num_chars(&self) -> usize {
        self.chars.len()
    }

    /// Output dimension: training tags plus the rare tag.
    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn tag(&self, id: usize) -> &str {
        &self.tags[id]
    }

    /// Id of a canonical word, `RARE` when unknown.
    pub fn word_id(&self, canonical: &str) -> usize {
        self.word_ids.get(canonical).copied().unwrap_or(RARE)
    }

    pub fn char_id(&self, c: char) -> usize {
        match c {
            '\u{0}' | '\u{1}' => UNK_CHAR,
            _ => self.char_ids.get(&c).copied().unwrap_or(UNK_CHAR),
        }
    }

    /// Id of a tag, `RARE_TAG` when unseen in training.
    pub fn tag_id(&self, tag: &str) -> usize {
        self.tag_ids.get(tag).copied().unwrap_or(RARE_TAG)
    }

    /// First five characters right-padded and last five left-padded with `PAD_CHAR`.
    pub fn extract_char_ids(&self, canonical: &str) -> ([usize; AFFIX_LEN], [usize; AFFIX_LEN]) {
        let ids: Vec<usize> = canonical.chars().map(|c| self.char_id(c)).collect();
        let mut prefix = [PAD_CHAR; AFFIX_LEN];
        let mut suffix = [PAD_CHAR; AFFIX_LEN];
        for (slot, &id) in prefix.iter_mut().zip(&ids) {
            *slot = id;
        }
        for (slot, &id) in suffix.iter_mut().rev().zip(ids.iter().rev()) {
            *slot = id;
        }
        (prefix, suffix)
    }

    /// Features for every token of a raw sentence with an odd window width.
    pub fn featurize(&self, raw_words: &[String], window: usize) -> Vec<TokenFeatures> {
        let normalized: Vec<(String, bool)> = raw_words.iter().map(|w| normalize(w)).collect();
        let ids: Vec<usize> = normalized.iter().map(|(c, _)| self.word_id(c)).collect();
        let half = window / 2;
        normalized
            .iter()
            .enumerate()
            .map(|(t, (canonical, cap))| {
                let window_ids = (0..window)
                    .map(|k| {
                        (t + k)
                            .checked_sub(half)
                            .and_then(|pos| ids.get(pos).copied())
                            .unwrap_or(PAD)
                    })
                    .collect();
                let (prefix_ids, suffix_ids) = self.extract_char_ids(canonical);
                TokenFeatures {
                    word_id: ids[t],
                    window_ids,
                    prefix_ids,
                    suffix_ids,
                    cap: *cap,
                }
            })
            .collect()
    }

    pub fn tag_ids(&self, tags: &[String]) -> Vec<usize> {
        tags.iter().map(|t| self.tag_id(t)).collect()
    }
}

/// Builds word, character and tag inventories from a training corpus, in order
/// of first appearance. Words seen fewer than `min_count` times stay out of
/// the vocabulary (and so map to `RARE`) unless listed in `pretrained`.
pub fn build_vocab(
    corpus: &[TaggedSentence],
    min_count: usize,
    pretrained: Option<&[String]>,
) -> Result<Vocab> {
    if corpus.iter().all(TaggedSentence::is_empty) {
        return Err(Error::Empty("training corpus"));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut chars = Vec::new();
    let mut seen_chars = std::collections::HashSet::new();
    let mut tags = Vec::new();
    let mut seen_tags = std::collections::HashSet::new();
    for sentence in corpus {
        for (raw, tag) in sentence.words.iter().zip(&sentence.tags) {
            let (canonical, _) = normalize(raw);
            for c in canonical.chars() {
                if c > '\u{1}' && seen_chars.insert(c) {
                    chars.push(c);
                }
            }
            let count = counts.entry(canonical.clone()).or_insert(0);
            if *count == 0 {
                order.push(canonical);
            }
            *count += 1;
            if tag != RARE_TAG_NAME && seen_tags.insert(tag.clone()) {
                tags.push(tag.clone());
            }
        }
    }
    let forced: std::collections::HashSet<&str> = pretrained
        .unwrap_or(&[])
        .iter()
        .map(String::as_str)
        .collect();
    let reserved = [PAD_WORD, RARE_WORD];
    let mut words: Vec<String> = order
        .into_iter()
        .filter(|w| counts[w] >= min_count.max(1) || forced.contains(w.as_str()))
        .filter(|w| !reserved.contains(&w.as_str()))
        .collect();
    if let Some(extra) = pretrained {
        let mut present: std::collections::HashSet<String> = words.iter().cloned().collect();
        for w in extra {
            if !reserved.contains(&w.as_str()) && present.insert(w.clone()) {
                words.push(w.clone());
            }
        }
    }
    Vocab::from_parts(words, chars, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(pairs: &[(&str, &str)]) -> TaggedSentence {
        TaggedSentence {
            words: pairs.iter().map(|p| p.0.to_string()).collect(),
            tags: pairs.iter().map(|p| p.1.to_string()).collect(),
        }
    }

    fn toy() -> Vec<TaggedSentence> {
        vec![
            sentence(&[("The", "DT"), ("cat", "NN"), ("sat", "VBD")]),
            sentence(&[("the", "DT"), ("representation", "NN"), ("nine!", "NN")]),
        ]
    }

    #[test]
    fn affixes() {
        let v = build_vocab(&toy(), 1, None).unwrap();
        let ids = |s: &str| s.chars().map(|c| v.char_id(c)).collect::<Vec<_>>();
        let (p, s) = v.extract_char_ids("representation");
        assert_eq!(p.to_vec(), ids("repre"));
        assert_eq!(s.to_vec(), ids("ation"));
        let (p, s) = v.extract_char_ids("cat");
        let cat = ids("cat");
        assert_eq!(p.to_vec(), [cat.clone(), vec![PAD_CHAR, PAD_CHAR]].concat());
        assert_eq!(s.to_vec(), [vec![PAD_CHAR, PAD_CHAR], cat].concat());
        let (p, s) = v.extract_char_ids("nine!");
        assert_eq!(p, s);
        let (p, _) = v.extract_char_ids("zq");
        assert_eq!(&p[..2], &[UNK_CHAR, UNK_CHAR]);
    }

    #[test]
    fn min_count_threshold() {
        let all = build_vocab(&toy(), 1, None).unwrap();
        for w in ["the", "cat", "sat", "representation", "nine!"] {
            assert_ne!(all.word_id(w), RARE, "{w}");
        }
        let frequent = build_vocab(&toy(), 2, None).unwrap();
        assert_ne!(frequent.word_id("the"), RARE);
        assert_eq!(frequent.word_id("cat"), RARE);
        let forced = build_vocab(&toy(), 2, Some(&["cat".to_string(), "dog".to_string()])).unwrap();
        assert_ne!(forced.word_id("cat"), RARE);
        assert_ne!(forced.word_id("dog"), RARE);
    }

    #[test]
    fn tag_inventory_has_rare_slot() {
        let v = build_vocab(&toy(), 1, None).unwrap();
        assert_eq!(v.num_tags(), 3 + 1);
        assert_eq!(v.tag_id("VBZ"), RARE_TAG);
        assert_eq!(v.tag(v.tag_id("NN")), "NN");
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(build_vocab(&[], 1, None).is_err());
    }

    #[test]
    fn window_padding() {
        let v = build_vocab(&toy(), 1, None).unwrap();
        let words: Vec<String> = ["The", "cat", "Sat"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let f = v.featurize(&words, 3);
        let (the, cat, sat) = (v.word_id("the"), v.word_id("cat"), v.word_id("sat"));
        assert_eq!(f[0].window_ids, vec![PAD, the, cat]);
        assert_eq!(f[1].window_ids, vec![the, cat, sat]);
        assert_eq!(f[2].window_ids, vec![cat, sat, PAD]);
        assert!(f[0].cap && !f[1].cap && f[2].cap);
        let f5 = v.featurize(&words, 5);
        assert_eq!(f5[0].window_ids, vec![PAD, PAD, the, cat, sat]);
    }

    #[test]
    fn parts_round_trip() {
        let v = build_vocab(&toy(), 1, None).unwrap();
        let (w, c, t) = v.parts();
        let rebuilt = Vocab::from_parts(w.to_vec(), c.to_vec(), t.to_vec()).unwrap();
        assert_eq!(rebuilt, v);
    }

    proptest::proptest! {
        #[test]
        fn always_five_and_five(w in "[a-z!]{1,20}") {
            let v = build_vocab(&toy(), 1, None).unwrap();
            let (p, s) = v.extract_char_ids(&w);
            let n = w.chars().count();
            proptest::prop_assert_eq!(p.len() + s.len(), 10);
            if n >= 5 {
                proptest::prop_assert!(!p.contains(&PAD_CHAR) && !s.contains(&PAD_CHAR));
            } else {
                proptest::prop_assert_eq!(p.iter().filter(|&&i| i == PAD_CHAR).count(), 5 - n);
            }
            if n == 5 {
                proptest::prop_assert_eq!(p, s);
            }
        }
    }
}
