use proptest::prelude::*;

use skiptag::features::{build_vocab, embed_token, TaggedSentence};
use skiptag::numerics::{orthogonal_init, orthogonality_defect, Mat, Mode, Rng};
use skiptag::recurrent::{GateInputs, SkipVariant};
use skiptag::tagger::{TaggerConfig, TaggerModel};
use skiptag::toolkit::{
    checkpoint_bytes, model_from_bytes, parse_config, read_corpus, tagger_config_text, toy_corpus,
    write_corpus_to,
};
use skiptag::training::{init_model, train, TrainConfig};
use std::path::Path;

fn variant() -> impl Strategy<Value = SkipVariant> {
    (0usize..7).prop_map(|i| SkipVariant::ALL[i])
}

fn small_config(variant: SkipVariant, layers: usize, hidden: usize, seed: u64) -> TaggerConfig {
    TaggerConfig {
        layers,
        hidden,
        variant,
        word_dim: 3,
        char_dim: 2,
        cap_dim: 2,
        seed,
        ..TaggerConfig::default()
    }
}

fn model(config: TaggerConfig, corpus: &[TaggedSentence]) -> TaggerModel {
    let seed = config.seed;
    let vocab = build_vocab(corpus, 1, None).unwrap();
    let mut m = init_model(config, vocab, None, &mut Rng::new(seed)).unwrap();
    // larger than the default init so outputs are not all near uniform
    m.randomize(0.4, &mut Rng::new(seed + 1));
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orthogonal_init_is_orthonormal(rows in 1usize..20, cols in 1usize..20, seed in 0u64..1000) {
        let q = orthogonal_init(rows, cols, &mut Rng::new(seed)).unwrap();
        let q = if rows >= cols { q } else { q.transpose() };
        prop_assert!(orthogonality_defect(&q) < 1e-6);
    }

    #[test]
    fn distributions_are_valid_and_eval_is_deterministic(
        v in variant(), layers in 1usize..5, hidden in 1usize..5, seed in 0u64..100,
    ) {
        let corpus = toy_corpus(3, seed);
        let m = model(small_config(v, layers, hidden, seed), &corpus);
        let feats = m.vocab.featurize(&corpus[0].words, 3);
        for mode in [Mode::Train, Mode::Eval] {
            let pass = m.forward(&feats, mode, &mut Rng::new(seed)).unwrap();
            for y in &pass.distributions {
                prop_assert!((y.sum() - 1.0).abs() < 1e-12);
                prop_assert!(y.data().iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
        let a = m.forward(&feats, Mode::Eval, &mut Rng::new(1)).unwrap();
        let b = m.forward(&feats, Mode::Eval, &mut Rng::new(2)).unwrap();
        let bits = |pass: &skiptag::tagger::ForwardPass| {
            pass.logits.iter().flat_map(|z| z.data().iter().map(|v| v.to_bits())).collect::<Vec<_>>()
        };
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn predictions_survive_monotone_maps_of_the_logits(
        v in variant(), seed in 0u64..100, shift in -50.0f64..50.0, gain in 0.01f64..100.0,
    ) {
        let corpus = toy_corpus(2, seed);
        let m = model(small_config(v, 3, 3, seed), &corpus);
        let feats = m.vocab.featurize(&corpus[1].words, 3);
        let predicted = m.predict(&feats).unwrap();
        let pass = m.forward(&feats, Mode::Eval, &mut Rng::new(0)).unwrap();
        for (z, &p) in pass.logits.iter().zip(&predicted) {
            let mapped: Mat = z.map(|x| (gain * x + shift).powi(3));
            prop_assert_eq!(mapped.argmax(), p);
            prop_assert_eq!(z.map(f64::exp).argmax(), p);
        }
    }

    #[test]
    fn window_gates_stay_inside_the_unit_interval(seed in 0u64..200, scale in 0.1f64..20.0) {
        let corpus = toy_corpus(2, seed);
        let mut m = model(small_config(SkipVariant::NoSkip, 1, 2, seed), &corpus);
        m.embed.gate_w.value = m.embed.gate_w.value.scale(scale);
        for token in m.vocab.featurize(&corpus[0].words, 3) {
            let (_, cache) = embed_token(&token, &m.embed, None).unwrap();
            prop_assert!(cache.gates.iter().all(|&r| r > 0.0 && r < 1.0));
        }
    }

    #[test]
    fn corpus_write_then_parse_is_identity(
        sentences in prop::collection::vec(
            prop::collection::vec(("[A-Za-z0-9.,'-]{1,8}", "[A-Z$]{1,4}"), 1..8),
            1..6,
        ),
    ) {
        let corpus: Vec<TaggedSentence> = sentences
            .into_iter()
            .map(|pairs| TaggedSentence {
                words: pairs.iter().map(|p| p.0.clone()).collect(),
                tags: pairs.iter().map(|p| p.1.clone()).collect(),
            })
            .collect();
        let mut buf = Vec::new();
        write_corpus_to(&mut buf, &corpus).unwrap();
        prop_assert_eq!(read_corpus(buf.as_slice(), Path::new("mem")).unwrap(), corpus);
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly(
        v in variant(), layers in 1usize..5, hidden in 1usize..4, gate_bias: bool, seed in 0u64..100,
        gate_below: bool,
    ) {
        let config = TaggerConfig {
            gate_bias,
            gate_inputs: if gate_below { GateInputs::BelowAndPrev } else { GateInputs::PrevAndSkip },
            ..small_config(v, layers, hidden, seed)
        };
        let m = model(config, &toy_corpus(4, seed));
        let bytes = checkpoint_bytes(&m);
        let back = model_from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(checkpoint_bytes(&back), bytes);
    }

    #[test]
    fn architecture_config_text_round_trips(
        v in variant(), layers in 1usize..10, hidden in 1usize..600, window in 0usize..4,
        forget_bias in -10.0f64..10.0, dropout in 0.0f64..1.0, seed: u64,
    ) {
        let config = TaggerConfig {
            window: 2 * window + 1,
            forget_bias,
            dropout_hidden: dropout,
            ..small_config(v, layers, hidden, seed)
        };
        let (back, _) = parse_config(&tagger_config_text(&config), Path::new("mem")).unwrap();
        prop_assert_eq!(back, config);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn training_is_online_and_deterministic(
        v in variant(), epochs in 1u32..4, seed in 0u64..50, sentences in 1usize..6,
    ) {
        let corpus = toy_corpus(sentences, seed);
        let config = small_config(v, 3, 3, seed);
        let tcfg = TrainConfig { epochs, seed, ..TrainConfig::toy() };
        let run = || train(model(config.clone(), &corpus), &corpus, &corpus, &tcfg).unwrap();
        let (a, ra) = run();
        let (b, rb) = run();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(ra.updates, epochs as u64 * sentences as u64);
        let curve = |r: &skiptag::training::TrainReport| {
            r.epochs.iter().map(|e| (e.train_loss.to_bits(), e.dev_accuracy)).collect::<Vec<_>>()
        };
        prop_assert_eq!(curve(&ra), curve(&rb));
        let best = ra.epochs.iter().filter_map(|e| e.dev_accuracy).fold(f64::MIN, f64::max);
        prop_assert_eq!(ra.best_dev_accuracy, best);
    }
}
