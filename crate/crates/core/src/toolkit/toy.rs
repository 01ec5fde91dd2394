use crate::features::TaggedSentence;
use crate::numerics::Rng;

/// Word inventory of the toy task. Word `i` belongs to class `i % 4`.
pub const TOY_WORDS: [&str; 20] = [
    "ant", "bee", "cow", "doe", "eel", "fox", "gnu", "hen", "ibis", "jay", "kiwi", "lark", "mole",
    "newt", "owl", "pig", "quail", "ram", "seal", "toad",
];

const CLASSES: [&str; 4] = ["A", "B", "C", "D"];

/// Tag of word `word` after word `left` (`None` at the sentence start): the
/// word's class joined with its left neighbour's class, or `S` at the start.
pub fn toy_tag(word: usize, left: Option<usize>) -> String {
    let l = left.map_or("S", |l| CLASSES[l % 4]);
    format!("{}{}", CLASSES[word % 4], l)
}

/// `count` sentences of 5 to 15 uniformly drawn toy words, deterministically
/// from `seed`. Some words start with a capital letter, which does not
/// change their tag.
pub fn toy_corpus(count: usize, seed: u64) -> Vec<TaggedSentence> {
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|_| {
            let len = 5 + rng.below(11);
            let ids: Vec<usize> = (0..len).map(|_| rng.below(TOY_WORDS.len())).collect();
            let words = ids
                .iter()
                .map(|&i| {
                    let w = TOY_WORDS[i];
                    if rng.below(5) == 0 {
                        w[..1].to_uppercase() + &w[1..]
                    } else {
                        w.to_string()
                    }
                })
                .collect();
            let tags = ids
                .iter()
                .enumerate()
                .map(|(t, &i)| toy_tag(i, t.checked_sub(1).map(|p| ids[p])))
                .collect();
            TaggedSentence { words, tags }
        })
        .collect()
}

/// Train, dev and test splits of 200, 50 and 50 sentences from one seed.
pub fn toy_splits(
    seed: u64,
) -> (
    Vec<TaggedSentence>,
    Vec<TaggedSentence>,
    Vec<TaggedSentence>,
) {
    let mut all = toy_corpus(300, seed);
    let test = all.split_off(250);
    let dev = all.split_off(200);
    (all, dev, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let (train, dev, test) = toy_splits(3);
        assert_eq!((train.len(), dev.len(), test.len()), (200, 50, 50));
        for s in train.iter().chain(&dev).chain(&test) {
            assert!((5..=15).contains(&s.len()));
            assert_eq!(s.words.len(), s.tags.len());
            assert!(s.tags[0].ends_with('S'));
        }
        assert_eq!(toy_splits(3).0, train);
        assert_ne!(toy_splits(4).0, train);
    }

    #[test]
    fn tag_depends_on_word_and_left_neighbour() {
        assert_eq!(toy_tag(0, None), "AS");
        assert_eq!(toy_tag(5, Some(2)), "BC");
        assert_eq!(toy_tag(9, Some(2)), "BC");
        assert_ne!(toy_tag(5, Some(3)), toy_tag(5, Some(2)));
    }
}
