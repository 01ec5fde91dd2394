use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::sgd_step;
use crate::error::{Error, Result};
use crate::features::{TaggedSentence, TokenFeatures};
use crate::numerics::{Mode, Rng};
use crate::tagger::{nll_loss, TaggerModel};

/// Online SGD settings. There is no learning-rate schedule and no clipping.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    /// Seeds both the per-epoch shuffles and the dropout masks.
    pub seed: u64,
    /// Dev accuracy is measured every this many epochs and after the last one.
    pub eval_every: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.02,
            epochs: 20,
            seed: 1,
            eval_every: 1,
        }
    }
}

impl TrainConfig {
    /// Settings for the toy task. With random embeddings at toy scale the
    /// default rate of 0.02 barely leaves the initial plateau in 50 epochs.
    pub fn toy() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 50,
            ..TrainConfig::default()
        }
    }

    /// Settings accepted from a configuration file. [`train`] itself also
    /// takes a zero rate, which freezes the model.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.eval_every == 0 {
            return Err(Error::Config("epochs and eval_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: u32,
    /// Mean over sentences of the per-sentence mean NLL, under dropout.
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: u32,
    pub best_dev_accuracy: f64,
    /// Parameter updates over the whole run.
    pub updates: u64,
    pub seconds: f64,
}

impl TrainReport {
    /// `epoch,train_loss,dev_acc,seconds`, one row per epoch. Floats use the
    /// shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "train_loss", "dev_acc", "seconds"])?;
        for r in &self.epochs {
            let dev = r.dev_accuracy.map(|a| a.to_string()).unwrap_or_default();
            w.write_record([
                r.epoch.to_string(),
                r.train_loss.to_string(),
                dev,
                format!("{:.3}", r.seconds),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn prepare(
    model: &TaggerModel,
    corpus: &[TaggedSentence],
) -> Vec<(Vec<TokenFeatures>, Vec<usize>)> {
    corpus
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            (
                model.vocab.featurize(&s.words, model.config.window),
                model.vocab.tag_ids(&s.tags),
            )
        })
        .collect()
}

/// Trains online: every epoch visits the sentences in a fresh seeded order
/// and makes one update per sentence. Returns the model from the epoch with
/// the best dev accuracy (the earliest on ties) and the learning curve.
pub fn train(
    mut model: TaggerModel,
    train_corpus: &[TaggedSentence],
    dev_corpus: &[TaggedSentence],
    tcfg: &TrainConfig,
) -> Result<(TaggerModel, TrainReport)> {
    if tcfg.epochs == 0 || tcfg.eval_every == 0 {
        return Err(Error::Config("epochs and eval_every must be >= 1".into()));
    }
    if train_corpus.iter().any(TaggedSentence::is_empty) || train_corpus.is_empty() {
        return Err(Error::Empty("training sentence"));
    }
    if dev_corpus.iter().all(TaggedSentence::is_empty) {
        return Err(Error::Empty("dev corpus"));
    }
    let data = prepare(&model, train_corpus);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle = Rng::derive(tcfg.seed, 0);
    let mut dropout = Rng::derive(tcfg.seed, 1);
    let start = Instant::now();
    let mut records = Vec::with_capacity(tcfg.epochs as usize);
    let mut best: Option<TaggerModel> = None;
    let first_epoch = model.meta.epochs + 1;

    for epoch in first_epoch..first_epoch + tcfg.epochs {
        let t0 = Instant::now();
        shuffle.shuffle(&mut order);
        let mut total = 0.0;
        for &i in &order {
            let (features, gold) = &data[i];
            let pass = model.forward(features, Mode::Train, &mut dropout)?;
            total += nll_loss(&pass.distributions, gold)?;
            model.backward(&pass, gold)?;
            sgd_step(&mut model, tcfg.learning_rate)?;
        }
        model.meta.epochs = epoch;
        let train_loss = total / data.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        let last = epoch + 1 == first_epoch + tcfg.epochs;
        let dev_accuracy = if (epoch - first_epoch + 1).is_multiple_of(tcfg.eval_every) || last {
            Some(evaluate(&model, dev_corpus)?)
        } else {
            None
        };
        if let Some(acc) = dev_accuracy {
            if best.as_ref().is_none_or(|b| acc > b.meta.best_dev_accuracy) {
                model.meta.best_epoch = epoch;
                model.meta.best_dev_accuracy = acc;
                best = Some(model.clone());
            }
        }
        let seconds = t0.elapsed().as_secs_f64();
        log::info!(
            "epoch {epoch} loss {train_loss:.6} dev {} ({seconds:.2}s)",
            dev_accuracy.map_or("-".to_string(), |a| format!("{a:.4}"))
        );
        records.push(EpochRecord {
            epoch,
            train_loss,
            dev_accuracy,
            seconds,
        });
    }

    let best = best.expect("the last epoch is always evaluated");
    let report = TrainReport {
        epochs: records,
        best_epoch: best.meta.best_epoch,
        best_dev_accuracy: best.meta.best_dev_accuracy,
        updates: model.meta.updates,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((best, report))
}

/// Fraction of tokens whose eval-mode argmax equals the gold tag. Gold tags
/// unknown to the model map to the rare tag. Sentences are tagged in parallel.
pub fn evaluate(model: &TaggerModel, corpus: &[TaggedSentence]) -> Result<f64> {
    let data = prepare(model, corpus);
    let counts = data
        .par_iter()
        .map(|(features, gold)| {
            let predicted = model.predict(features)?;
            let correct = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
            Ok((correct, gold.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (correct, total) = counts
        .iter()
        .fold((0, 0), |(c, t), &(ci, ti)| (c + ci, t + ti));
    if total == 0 {
        return Err(Error::Empty("evaluation corpus"));
    }
    Ok(correct as f64 / total as f64)
}
