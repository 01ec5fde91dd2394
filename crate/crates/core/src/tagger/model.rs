use super::TaggerConfig;
use crate::error::{Error, Result};
use crate::features::{
    embed_backward, embed_token, EmbedCache, EmbeddingTables, TokenFeatures, Vocab,
};
use crate::numerics::{softmax, Dropout, Mat, Mode, Param, ParamSet, Rng};
use crate::recurrent::{stack_backward, stack_forward, LayerParams, StackParams, StackRun};

/// Bookkeeping carried along with trained parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingMeta {
    pub epochs: u32,
    pub best_epoch: u32,
    pub best_dev_accuracy: f64,
    pub updates: u64,
}

/// Embeddings, two directional LSTM stacks and a softmax output layer over
/// `[h_fwd; h_bwd]` of the top layer.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    pub config: TaggerConfig,
    pub vocab: Vocab,
    pub embed: EmbeddingTables,
    pub stack: StackParams,
    /// `K x 2n`
    pub out_w: Param,
    /// `K x 1`
    pub out_b: Param,
    pub meta: TrainingMeta,
    generation: u64,
}

/// Everything a train-mode (or eval-mode) forward pass records for `backward`.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    pub distributions: Vec<Mat>,
    pub logits: Vec<Mat>,
    pub features: Vec<TokenFeatures>,
    pub embed_caches: Vec<EmbedCache>,
    pub stack: StackRun,
    /// `[h_fwd; h_bwd]` after dropout, per token.
    pub top: Vec<Mat>,
    pub mode: Mode,
    generation: u64,
}

impl TaggerModel {
    /// All-zero parameters of the right shapes for `config` and `vocab`.
    pub fn zeros(config: TaggerConfig, vocab: Vocab) -> Result<Self> {
        config.validate()?;
        let dims = config.embed_dims();
        let n = config.hidden;
        let build = || {
            (1..=config.layers)
                .map(|l| {
                    let m = if l == 1 { dims.width() } else { n };
                    LayerParams::zeros(
                        m,
                        n,
                        LayerParams::needs_gate(config.variant, l),
                        config.gate_bias,
                    )
                })
                .collect::<Vec<_>>()
        };
        let k = vocab.num_tags();
        Ok(TaggerModel {
            embed: EmbeddingTables::zeros(dims, vocab.num_words(), vocab.num_chars()),
            stack: StackParams {
                forward: build(),
                backward: build(),
            },
            out_w: Param::new(Mat::zeros(k, 2 * n)),
            out_b: Param::new(Mat::zeros(k, 1)),
            meta: TrainingMeta::default(),
            generation: 0,
            config,
            vocab,
        })
    }

    /// Overwrites every parameter with `N(0, std^2)` draws. Gradient checks use
    /// this so that no entry sits in a degenerate all-zero regime.
    pub fn randomize(&mut self, std: f64, rng: &mut Rng) {
        for p in self.params_mut() {
            p.value
                .data_mut()
                .iter_mut()
                .for_each(|v| *v = std * rng.normal());
        }
    }

    pub fn num_tags(&self) -> usize {
        self.vocab.num_tags()
    }

    /// Incremented by every parameter update; forward caches from an older
    /// generation are rejected by [`TaggerModel::backward`].
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub(crate) fn bump_generation(&mut self) {
        self.generation += 1;
    }

    /// Every parameter in a fixed order: embeddings, forward stack, backward
    /// stack, output layer.
    pub fn params(&self) -> Vec<&Param> {
        let mut out = self.embed.params();
        out.extend(self.stack.params());
        out.push(&self.out_w);
        out.push(&self.out_b);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = self.embed.params_mut();
        out.extend(self.stack.params_mut());
        out.push(&mut self.out_w);
        out.push(&mut self.out_b);
        out
    }

    pub fn gradients(&self) -> Vec<Mat> {
        self.params().into_iter().map(|p| p.grad.clone()).collect()
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// Closed form of [`TaggerModel::param_count`]:
    /// embeddings `V e_w + C e_c + 2 e_cap + d e_w + d`, per direction
    /// `4n(m+n) + 4n` for layer 1 and `8n^2 + 4n` above it, plus `2n^2`
    /// (and `n` with a gate bias) for each gated layer `l >= 3`, and the
    /// output layer `2nK + K`.
    pub fn expected_param_count(config: &TaggerConfig, vocab: &Vocab) -> usize {
        let dims = config.embed_dims();
        let (n, d) = (config.hidden, config.window);
        let embed = vocab.num_words() * dims.word_dim
            + vocab.num_chars() * dims.char_dim
            + 2 * dims.cap_dim
            + d * dims.word_dim
            + d;
        let mut per_direction = 0;
        for l in 1..=config.layers {
            let m = if l == 1 { dims.width() } else { n };
            per_direction += 4 * n * (m + n) + 4 * n;
            if LayerParams::needs_gate(config.variant, l) {
                per_direction += 2 * n * n + if config.gate_bias { n } else { 0 };
            }
        }
        let k = vocab.num_tags();
        embed + 2 * per_direction + 2 * n * k + k
    }

    /// Runs the full network over one sentence. In train mode fresh dropout
    /// masks are drawn from `rng`; in eval mode dropped activations are
    /// scaled by their keep probability and `rng` is untouched.
    pub fn forward(
        &self,
        sentence: &[TokenFeatures],
        mode: Mode,
        rng: &mut Rng,
    ) -> Result<ForwardPass> {
        if sentence.is_empty() {
            return Err(Error::Empty("sentence"));
        }
        let embed_dropout = Dropout::new(self.config.dropout_embed);
        let mut embedded = Vec::with_capacity(sentence.len());
        let mut embed_caches = Vec::with_capacity(sentence.len());
        for token in sentence {
            let mask = embed_dropout.mask(self.config.window, mode, rng);
            let (x, cache) = embed_token(token, &self.embed, Some(&mask))?;
            embedded.push(x);
            embed_caches.push(cache);
        }
        let run = stack_forward(
            &embedded,
            &self.stack,
            self.config.cell(),
            Dropout::new(self.config.dropout_hidden),
            mode,
            rng,
        )?;
        let mut top = Vec::with_capacity(sentence.len());
        let mut logits = Vec::with_capacity(sentence.len());
        let mut distributions = Vec::with_capacity(sentence.len());
        for (hf, hb) in run.top_fwd().iter().zip(run.top_bwd()) {
            let h = Mat::vstack(&[hf, hb])?;
            let mut z = self.out_w.value.matmul(&h)?;
            z.add_assign(&self.out_b.value)?;
            distributions.push(softmax(&z));
            logits.push(z);
            top.push(h);
        }
        Ok(ForwardPass {
            distributions,
            logits,
            features: sentence.to_vec(),
            embed_caches,
            stack: run,
            top,
            mode,
            generation: self.generation,
        })
    }

    /// Accumulates the gradient of the sentence NLL into every parameter buffer.
    pub fn backward(&mut self, pass: &ForwardPass, gold: &[usize]) -> Result<()> {
        self.backward_scaled(pass, gold, 1.0)
    }

    /// Same as [`TaggerModel::backward`] for the loss `scale * NLL`.
    pub fn backward_scaled(
        &mut self,
        pass: &ForwardPass,
        gold: &[usize],
        scale: f64,
    ) -> Result<()> {
        if pass.generation != self.generation {
            return Err(Error::StaleCache {
                cache: pass.generation,
                model: self.generation,
            });
        }
        let len = pass.distributions.len();
        if gold.len() != len {
            return Err(Error::Length {
                what: "gold tags",
                got: gold.len(),
                expected: len,
            });
        }
        let k = self.num_tags();
        let n = self.config.hidden;
        let mut d_fwd = Vec::with_capacity(len);
        let mut d_bwd = Vec::with_capacity(len);
        for ((y, h), &g) in pass.distributions.iter().zip(&pass.top).zip(gold) {
            if g >= k {
                return Err(Error::IdOutOfRange {
                    table: "tags",
                    id: g,
                    size: k,
                });
            }
            let mut d_logit = y.scale(scale / len as f64);
            d_logit.data_mut()[g] -= scale / len as f64;
            self.out_w.grad.add_outer(&d_logit, h)?;
            self.out_b.grad.add_assign(&d_logit)?;
            let d_top = self.out_w.value.t_matmul(&d_logit)?;
            d_fwd.push(d_top.rows_slice(0, n));
            d_bwd.push(d_top.rows_slice(n, n));
        }
        let cell = self.config.cell();
        let d_embedded = stack_backward(&d_fwd, &d_bwd, &pass.stack, &mut self.stack, cell)?;
        for ((d, features), cache) in d_embedded
            .iter()
            .zip(&pass.features)
            .zip(&pass.embed_caches)
        {
            embed_backward(d, features, &mut self.embed, cache)?;
        }
        Ok(())
    }

    /// Per-token argmax of the eval-mode distributions; ties go to the lowest id.
    pub fn predict(&self, sentence: &[TokenFeatures]) -> Result<Vec<usize>> {
        let pass = self.forward(sentence, Mode::Eval, &mut Rng::new(0))?;
        Ok(pass.distributions.iter().map(Mat::argmax).collect())
    }

    /// Tags a raw, untokenized-by-us sentence through the training normalization.
    pub fn tag_words(&self, raw_words: &[String]) -> Result<Vec<String>> {
        let features = self.vocab.featurize(raw_words, self.config.window);
        Ok(self
            .predict(&features)?
            .into_iter()
            .map(|id| self.vocab.tag(id).to_string())
            .collect())
    }
}

impl ParamSet for TaggerModel {
    fn tensors(&self) -> Vec<&Mat> {
        self.params().into_iter().map(|p| &p.value).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        self.params_mut()
            .into_iter()
            .map(|p| &mut p.value)
            .collect()
    }
}

/// Mean negative log-likelihood of the gold tags, with probabilities clamped
/// at `1e-300` before the log.
pub fn nll_loss(distributions: &[Mat], gold: &[usize]) -> Result<f64> {
    if distributions.len() != gold.len() {
        return Err(Error::Length {
            what: "gold tags",
            got: gold.len(),
            expected: distributions.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Empty("sentence"));
    }
    let mut total = 0.0;
    for (y, &g) in distributions.iter().zip(gold) {
        if g >= y.len() {
            return Err(Error::IdOutOfRange {
                table: "tags",
                id: g,
                size: y.len(),
            });
        }
        total -= y.data()[g].max(1e-300).ln();
    }
    Ok(total / gold.len() as f64)
}
