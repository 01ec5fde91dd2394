use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::features::{build_vocab, Pretrained, TaggedSentence};
use crate::numerics::Rng;
use crate::recurrent::SkipVariant;
use crate::tagger::{TaggerConfig, TaggerModel};
use crate::training::{evaluate, init_model, train, TrainConfig};

/// Train, dev and test sentences for one experiment.
#[derive(Clone, Copy, Debug)]
pub struct Splits<'a> {
    pub train: &'a [TaggedSentence],
    pub dev: &'a [TaggedSentence],
    pub test: &'a [TaggedSentence],
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnessRow {
    /// Variant name or layer count.
    pub label: String,
    pub dev_accuracy: f64,
    pub test_accuracy: f64,
}

/// Builds the vocabulary, initializes from `config.seed`, trains and scores
/// the best-dev model on dev and test.
pub fn run_experiment(
    config: TaggerConfig,
    tcfg: &TrainConfig,
    data: Splits<'_>,
    pretrained: Option<&Pretrained>,
) -> Result<TaggerModel> {
    let words = pretrained.map(Pretrained::words);
    let vocab = build_vocab(data.train, config.min_count, words)?;
    let seed = config.seed;
    let model = init_model(config, vocab, pretrained, &mut Rng::new(seed))?;
    Ok(train(model, data.train, data.dev, tcfg)?.0)
}

fn score(label: String, model: &TaggerModel, data: Splits<'_>) -> Result<HarnessRow> {
    Ok(HarnessRow {
        label,
        dev_accuracy: evaluate(model, data.dev)?,
        test_accuracy: evaluate(model, data.test)?,
    })
}

/// One row per skip variant, every run sharing `base` (including its seed).
pub fn compare_variants(
    base: &TaggerConfig,
    tcfg: &TrainConfig,
    data: Splits<'_>,
    pretrained: Option<&Pretrained>,
) -> Result<Vec<HarnessRow>> {
    SkipVariant::ALL
        .par_iter()
        .map(|&variant| {
            let config = TaggerConfig {
                variant,
                ..base.clone()
            };
            let model = run_experiment(config, tcfg, data, pretrained)?;
            log::info!("{variant} done");
            score(variant.to_string(), &model, data)
        })
        .collect()
}

/// One row per entry of `layers`, in the given order.
pub fn depth_sweep(
    base: &TaggerConfig,
    layers: &[usize],
    tcfg: &TrainConfig,
    data: Splits<'_>,
    pretrained: Option<&Pretrained>,
) -> Result<Vec<HarnessRow>> {
    layers
        .par_iter()
        .map(|&l| {
            let config = TaggerConfig {
                layers: l,
                ..base.clone()
            };
            let model = run_experiment(config, tcfg, data, pretrained)?;
            log::info!("{l} layers done");
            score(l.to_string(), &model, data)
        })
        .collect()
}

/// `header,dev_acc,test_acc` followed by one line per row.
pub fn write_rows<W: Write>(out: W, header: &str, rows: &[HarnessRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([header, "dev_acc", "test_acc"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.dev_accuracy.to_string(),
            r.test_accuracy.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::toy_splits;

    #[test]
    fn one_row_per_variant_and_depth() {
        let (train, dev, test) = toy_splits(2);
        let data = Splits {
            train: &train[..10],
            dev: &dev[..5],
            test: &test[..5],
        };
        let base = TaggerConfig {
            hidden: 3,
            word_dim: 3,
            ..TaggerConfig::toy()
        };
        let tcfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::toy()
        };
        let rows = compare_variants(&base, &tcfg, data, None).unwrap();
        let names: Vec<_> = rows.iter().map(|r| r.label.clone()).collect();
        assert_eq!(names, SkipVariant::ALL.map(|v| v.to_string()));
        let sweep = depth_sweep(&base, &[1, 4, 2], &tcfg, data, None).unwrap();
        assert_eq!(
            sweep.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(),
            ["1", "4", "2"]
        );

        let mut csv = Vec::new();
        write_rows(&mut csv, "layers", &sweep).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("layers,dev_acc,test_acc\n1,"));
    }
}
