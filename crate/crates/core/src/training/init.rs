use crate::error::{Error, Result};
use crate::features::{EmbeddingTables, Pretrained, Vocab};
use crate::numerics::{gaussian_init, Mat, Param, Rng};
use crate::recurrent::{LayerInit, LayerParams, StackParams};
use crate::tagger::{TaggerConfig, TaggerModel};

/// Fresh model for `config` and `vocab`. Recurrent blocks are orthogonal,
/// every other weight matrix is drawn from the scaled Gaussian, the forget
/// bias is `config.forget_bias` and other biases start at zero. Word rows
/// found in `pretrained` are copied in.
///
/// Draws happen in a fixed order (embeddings, forward layers, backward
/// layers, output layer), so equal seeds give bitwise equal models.
pub fn init_model(
    config: TaggerConfig,
    vocab: Vocab,
    pretrained: Option<&Pretrained>,
    rng: &mut Rng,
) -> Result<TaggerModel> {
    config.validate()?;
    if let Some(p) = pretrained {
        if p.dim() != config.word_dim {
            return Err(Error::Config(format!(
                "pretrained vectors have dimension {}, word_dim is {}",
                p.dim(),
                config.word_dim
            )));
        }
    }
    let dims = config.embed_dims();
    let mut embed = EmbeddingTables::initialized(
        dims,
        vocab.num_words(),
        vocab.num_chars(),
        config.init_scale,
        rng,
    )?;
    if let Some(p) = pretrained {
        let mut copied = 0;
        for id in 0..vocab.num_words() {
            if let Some(v) = p.get(vocab.word(id)) {
                embed.words.value.row_mut(id).copy_from_slice(v);
                copied += 1;
            }
        }
        log::info!(
            "pretrained: {copied} rows copied, {} vectors not in the vocabulary",
            p.absent_from(&vocab)
        );
    }

    let n = config.hidden;
    let direction = |rng: &mut Rng| -> Result<Vec<LayerParams>> {
        (1..=config.layers)
            .map(|l| {
                let init = LayerInit {
                    input_width: if l == 1 { dims.width() } else { n },
                    hidden: n,
                    with_gate: LayerParams::needs_gate(config.variant, l),
                    gate_bias: config.gate_bias,
                    gate_inputs: config.gate_inputs,
                    forget_bias: config.forget_bias,
                    scale: config.init_scale,
                };
                LayerParams::initialized(init, rng)
            })
            .collect()
    };
    let forward = direction(rng)?;
    let backward = direction(rng)?;

    let k = vocab.num_tags();
    let out_w = gaussian_init(k, 2 * n, 2 * n, config.init_scale, rng)?;
    let mut model = TaggerModel::zeros(config, vocab)?;
    model.embed = embed;
    model.stack = StackParams { forward, backward };
    model.out_w = Param::new(out_w);
    model.out_b = Param::new(Mat::zeros(k, 1));
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_vocab, TaggedSentence};
    use crate::numerics::orthogonality_defect;
    use crate::recurrent::SkipVariant;

    fn vocab() -> Vocab {
        let corpus = [TaggedSentence {
            words: ["The", "cat", "sat"].map(String::from).to_vec(),
            tags: ["D", "N", "V"].map(String::from).to_vec(),
        }];
        build_vocab(&corpus, 1, None).unwrap()
    }

    fn config() -> TaggerConfig {
        TaggerConfig {
            layers: 4,
            hidden: 6,
            word_dim: 4,
            forget_bias: 5.0,
            variant: SkipVariant::ToInternalGated,
            ..TaggerConfig::default()
        }
    }

    #[test]
    fn recurrent_blocks_are_orthogonal_and_forget_bias_is_exact() {
        let model = init_model(config(), vocab(), None, &mut Rng::new(3)).unwrap();
        for layer in model.stack.forward.iter().chain(&model.stack.backward) {
            for k in 0..4 {
                assert!(orthogonality_defect(&layer.recurrent_block(k)) < 1e-6);
            }
            assert!(layer.forget_bias_block().iter().all(|&b| b == 5.0));
            let b = layer.b.value.data();
            assert!(b[..6].iter().chain(&b[12..]).all(|&v| v == 0.0));
        }
        assert!(model.out_b.value.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_gives_the_same_model() {
        let a = init_model(config(), vocab(), None, &mut Rng::new(9)).unwrap();
        let b = init_model(config(), vocab(), None, &mut Rng::new(9)).unwrap();
        let c = init_model(config(), vocab(), None, &mut Rng::new(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pretrained_rows_are_copied() {
        let v = vocab();
        let mut p = Pretrained::new(4);
        p.insert("cat", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        p.insert("zebra", vec![0.0; 4]).unwrap();
        let model = init_model(config(), v.clone(), Some(&p), &mut Rng::new(1)).unwrap();
        assert_eq!(
            model.embed.words.value.row(v.word_id("cat")),
            &[1.0, 2.0, 3.0, 4.0]
        );
        assert_ne!(model.embed.words.value.row(v.word_id("sat")), &[0.0; 4]);

        let wrong = Pretrained::new(3);
        assert!(init_model(config(), v, Some(&wrong), &mut Rng::new(1)).is_err());
    }
}
