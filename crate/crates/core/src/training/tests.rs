use super::*;
use crate::features::{build_vocab, TaggedSentence, Vocab, RARE_TAG};
use crate::numerics::Rng;
use crate::recurrent::SkipVariant;
use crate::tagger::{TaggerConfig, TaggerModel};

fn sentence(pairs: &[(&str, &str)]) -> TaggedSentence {
    TaggedSentence {
        words: pairs.iter().map(|p| p.0.to_string()).collect(),
        tags: pairs.iter().map(|p| p.1.to_string()).collect(),
    }
}

fn toy_config(variant: SkipVariant, layers: usize, hidden: usize) -> TaggerConfig {
    TaggerConfig {
        layers,
        hidden,
        variant,
        word_dim: 8,
        char_dim: 3,
        cap_dim: 2,
        ..TaggerConfig::default()
    }
}

fn corpus() -> Vec<TaggedSentence> {
    vec![
        sentence(&[
            ("The", "D"),
            ("old", "J"),
            ("cat", "N"),
            ("sat", "V"),
            ("down", "R"),
        ]),
        sentence(&[("a", "D"), ("dog", "N"), ("ran", "V")]),
        sentence(&[("the", "D"), ("dog", "N"), ("sat", "V"), ("down", "R")]),
    ]
}

fn model(config: TaggerConfig, vocab: Vocab, seed: u64) -> TaggerModel {
    init_model(config, vocab, None, &mut Rng::new(seed)).unwrap()
}

#[test]
fn overfits_a_single_sentence() {
    let data = vec![corpus()[0].clone()];
    let vocab = build_vocab(&data, 1, None).unwrap();
    let config = toy_config(SkipVariant::NoSkip, 2, 8).without_dropout();
    let tcfg = TrainConfig {
        learning_rate: 0.5,
        epochs: 1500,
        eval_every: 100,
        ..TrainConfig::default()
    };
    let (best, report) = train(model(config, vocab, 4), &data, &data, &tcfg).unwrap();
    let losses: Vec<f64> = report.epochs.iter().map(|r| r.train_loss).collect();
    let tenth = losses.len() / 10;
    let early: f64 = losses[..tenth].iter().sum::<f64>() / tenth as f64;
    let late: f64 = losses[losses.len() - tenth..].iter().sum::<f64>() / tenth as f64;
    assert!(late < 0.1 * early, "loss {early} -> {late}");
    let decreasing = losses.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(decreasing as f64 >= 0.9 * (losses.len() - 1) as f64);
    assert_eq!(evaluate(&best, &data).unwrap(), 1.0);
    assert_eq!(best.tag_words(&data[0].words).unwrap(), data[0].tags);
}

#[test]
fn zero_learning_rate_freezes_the_model() {
    let data = corpus();
    let vocab = build_vocab(&data, 1, None).unwrap();
    let start = model(toy_config(SkipVariant::ToOutputGated, 3, 4), vocab, 2);
    let tcfg = TrainConfig {
        learning_rate: 0.0,
        epochs: 3,
        ..TrainConfig::default()
    };
    let (best, report) = train(start.clone(), &data, &data, &tcfg).unwrap();
    for (a, b) in best.params().iter().zip(start.params()) {
        assert_eq!(a.value, b.value);
    }
    assert_eq!(report.updates, 3 * data.len() as u64);
    assert!(TrainConfig {
        learning_rate: 0.0,
        ..tcfg
    }
    .validate()
    .is_err());
}

#[test]
fn one_update_per_sentence_and_best_epoch_is_selected() {
    let data = corpus();
    let vocab = build_vocab(&data, 1, None).unwrap();
    let tcfg = TrainConfig {
        epochs: 6,
        eval_every: 2,
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    let start = model(toy_config(SkipVariant::ToInternal, 3, 4), vocab, 7);
    let (best, report) = train(start, &data, &data[1..], &tcfg).unwrap();
    assert_eq!(report.updates, 6 * data.len() as u64);
    assert_eq!(
        best.meta.updates,
        best.meta.best_epoch as u64 * data.len() as u64
    );
    let seen: Vec<(u32, f64)> = report
        .epochs
        .iter()
        .filter_map(|r| r.dev_accuracy.map(|a| (r.epoch, a)))
        .collect();
    assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), vec![2, 4, 6]);
    let max = seen.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    assert_eq!(report.best_dev_accuracy, max);
    assert_eq!(evaluate(&best, &data[1..]).unwrap(), max);
    let first = seen.iter().find(|s| s.1 == max).unwrap().0;
    assert_eq!(report.best_epoch, first);
}

#[test]
fn identical_seeds_give_identical_runs() {
    let data = corpus();
    let vocab = build_vocab(&data, 1, None).unwrap();
    let config = toy_config(SkipVariant::ToOutputGatedSigmoidMap, 3, 4);
    let tcfg = TrainConfig {
        epochs: 2,
        ..TrainConfig::default()
    };
    let run = || train(model(config.clone(), vocab.clone(), 5), &data, &data, &tcfg).unwrap();
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(a, b);
    let strip = |r: &TrainReport| {
        r.epochs
            .iter()
            .map(|e| {
                (
                    e.epoch,
                    e.train_loss.to_bits(),
                    e.dev_accuracy.map(f64::to_bits),
                )
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&ra), strip(&rb));
    let other = TrainConfig {
        seed: 2,
        ..tcfg.clone()
    };
    let (c, _) = train(model(config, vocab, 5), &data, &data, &other).unwrap();
    assert_ne!(a, c);
}

#[test]
fn report_csv_has_one_row_per_epoch() {
    let report = TrainReport {
        epochs: vec![
            EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                dev_accuracy: None,
                seconds: 0.25,
            },
            EpochRecord {
                epoch: 2,
                train_loss: 0.25,
                dev_accuracy: Some(0.75),
                seconds: 0.5,
            },
        ],
        best_epoch: 2,
        best_dev_accuracy: 0.75,
        updates: 4,
        seconds: 0.75,
    };
    assert_eq!(
        report.to_csv(),
        "epoch,train_loss,dev_acc,seconds\n1,0.5,,0.250\n2,0.25,0.75,0.500\n"
    );
}

#[test]
fn training_rejects_empty_inputs() {
    let data = corpus();
    let vocab = build_vocab(&data, 1, None).unwrap();
    let m = model(toy_config(SkipVariant::NoSkip, 1, 2), vocab, 1);
    let tcfg = TrainConfig::default();
    assert!(train(m.clone(), &[], &data, &tcfg).is_err());
    assert!(train(m.clone(), &data, &[], &tcfg).is_err());
    let with_empty = vec![data[0].clone(), sentence(&[])];
    assert!(train(m, &with_empty, &data, &tcfg).is_err());
}

/// A model that always predicts `tag`.
fn constant_model(vocab: &Vocab, tag: &str) -> TaggerModel {
    let mut m = TaggerModel::zeros(toy_config(SkipVariant::NoSkip, 1, 2), vocab.clone()).unwrap();
    m.out_b.value.data_mut()[vocab.tag_id(tag)] = 1.0;
    m
}

#[test]
fn accuracy_hand_cases() {
    let vocab = build_vocab(&[sentence(&[("a", "X"), ("b", "Y")])], 1, None).unwrap();
    let all_x = [sentence(&[("a", "X"), ("b", "X")]), sentence(&[("c", "X")])];
    assert_eq!(evaluate(&constant_model(&vocab, "X"), &all_x).unwrap(), 1.0);
    assert_eq!(evaluate(&constant_model(&vocab, "Y"), &all_x).unwrap(), 0.0);
    let mixed = [sentence(&[("a", "X"), ("b", "X"), ("a", "Y"), ("b", "X")])];
    assert_eq!(
        evaluate(&constant_model(&vocab, "X"), &mixed).unwrap(),
        0.75
    );
    assert!(evaluate(&constant_model(&vocab, "X"), &[]).is_err());
}

#[test]
fn unseen_gold_tags_count_as_rare() {
    let vocab = build_vocab(&[sentence(&[("a", "X")])], 1, None).unwrap();
    let unseen = [sentence(&[("a", "NEW"), ("b", "X")])];
    assert_eq!(
        evaluate(&constant_model(&vocab, "X"), &unseen).unwrap(),
        0.5
    );
    let mut rare = TaggerModel::zeros(toy_config(SkipVariant::NoSkip, 1, 2), vocab).unwrap();
    rare.out_b.value.data_mut()[RARE_TAG] = 1.0;
    assert_eq!(evaluate(&rare, &unseen).unwrap(), 0.5);
}
