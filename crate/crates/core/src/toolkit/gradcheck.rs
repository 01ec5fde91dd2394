use super::reference::{reference_loss_after, reference_state, Part, ReferenceState};
use crate::error::Result;
use crate::features::{build_vocab, TaggedSentence, TokenFeatures};
use crate::numerics::{grad_check_by_tensor, Dd, GradCheckReport, Mode, Real, Rng, DEFAULT_EPS};
use crate::recurrent::{GateInputs, SkipVariant};
use crate::tagger::{TaggerConfig, TaggerModel};

/// Threshold on the maximum relative error for a gradient check to pass.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

/// One finite-difference check of a whole tagger on a random sentence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckCase {
    pub variant: SkipVariant,
    pub gate_inputs: GateInputs,
    pub layers: usize,
    pub hidden: usize,
    pub len: usize,
    pub seed: u64,
    /// Every parameter is drawn from `N(0, weight_std^2)`.
    pub weight_std: f64,
}

impl GradCheckCase {
    pub fn new(variant: SkipVariant, layers: usize, hidden: usize, len: usize, seed: u64) -> Self {
        GradCheckCase {
            variant,
            gate_inputs: GateInputs::default(),
            layers,
            hidden,
            len,
            seed,
            weight_std: 0.5,
        }
    }
}

const WORDS: [&str; 6] = ["Ab", "cd", "ef9", "Gh", "ij", "klm"];
const TAGS: [&str; 3] = ["X", "Y", "Z"];

/// Compares the analytic gradient of every parameter (tables, window gate,
/// both stacks, output layer) against central differences of the mean NLL.
/// Dropout is disabled. The differenced losses are evaluated in double-double
/// arithmetic by [`reference_loss_after`], so round-off in the loss stays far below
/// the `1e-8` floor of the relative error.
pub fn check_case(case: &GradCheckCase) -> Result<GradCheckReport> {
    let (mut model, features, gold) = build_case(case)?;
    let pass = model.forward(&features, Mode::Eval, &mut Rng::new(0))?;
    model.backward(&pass, &gold)?;
    let analytic = model.gradients();
    model.zero_grad();
    let state: ReferenceState<Dd> = reference_state(&model, &features)?;
    let parts = Part::of_params(&model);
    let base = reference_loss_after(&model, &features, &gold, &state, Part::Output);
    let loss = |m: &TaggerModel, tensor: usize| {
        (reference_loss_after(m, &features, &gold, &state, parts[tensor]) - base).to_f64()
    };
    grad_check_by_tensor(&mut model, loss, &analytic, DEFAULT_EPS)
}

/// Random model, sentence and gold tags for `case`.
pub fn build_case(case: &GradCheckCase) -> Result<(TaggerModel, Vec<TokenFeatures>, Vec<usize>)> {
    let mut rng = Rng::new(case.seed);
    let words: Vec<String> = (0..case.len)
        .map(|_| WORDS[rng.below(WORDS.len())].to_string())
        .collect();
    let tags: Vec<String> = (0..case.len)
        .map(|_| TAGS[rng.below(TAGS.len())].to_string())
        .collect();
    let lexicon = TaggedSentence {
        words: WORDS.iter().map(|w| w.to_string()).collect(),
        tags: (0..WORDS.len())
            .map(|i| TAGS[i % TAGS.len()].to_string())
            .collect(),
    };
    let vocab = build_vocab(&[lexicon], 1, None)?;
    let config = TaggerConfig {
        layers: case.layers,
        hidden: case.hidden,
        variant: case.variant,
        gate_inputs: case.gate_inputs,
        word_dim: 2,
        char_dim: 1,
        cap_dim: 1,
        seed: case.seed,
        ..TaggerConfig::default()
    }
    .without_dropout();
    let mut model = TaggerModel::zeros(config, vocab)?;
    model.randomize(case.weight_std, &mut rng);
    let features = model.vocab.featurize(&words, model.config.window);
    let gold = model.vocab.tag_ids(&tags);
    Ok((model, features, gold))
}
