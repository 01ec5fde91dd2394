use crate::error::{Error, Result};
use crate::features::TokenFeatures;
use crate::numerics::{Mat, Real};
use crate::recurrent::{GateInputs, LayerParams, SkipVariant};
use crate::tagger::TaggerModel;

fn lift<R: Real>(v: &[f64]) -> Vec<R> {
    v.iter().map(|&x| R::from_f64(x)).collect()
}

/// `m * v` for an `f64` matrix and an `R` vector.
fn matvec<R: Real>(m: &Mat, v: &[R]) -> Vec<R> {
    (0..m.rows()).map(|r| R::dot(m.row(r), v)).collect()
}

fn embed<R: Real>(model: &TaggerModel, token: &TokenFeatures) -> Vec<R> {
    let t = &model.embed;
    let center: Vec<R> = lift(t.words.value.row(token.word_id));
    let gates = matvec(&t.gate_w.value, &center);
    let mut x = Vec::with_capacity(t.dims.width());
    for (j, &id) in token.window_ids.iter().enumerate() {
        let r = (gates[j] + R::from_f64(t.gate_b.value.data()[j])).sigmoid();
        x.extend(t.words.value.row(id).iter().map(|&v| r.mul_f64(v)));
    }
    for &id in token.prefix_ids.iter().chain(&token.suffix_ids) {
        x.extend(lift::<R>(t.chars.value.row(id)));
    }
    x.extend(lift::<R>(t.caps.value.row(token.cap as usize)));
    x
}

fn step<R: Real>(
    layer: &LayerParams,
    variant: SkipVariant,
    gate_inputs: GateInputs,
    x: &[R],
    h: &[R],
    c: &[R],
    skip: Option<&[R]>,
) -> (Vec<R>, Vec<R>) {
    let n = layer.hidden;
    let xh: Vec<R> = x.iter().chain(h).copied().collect();
    let mut z = matvec(&layer.w.value, &xh);
    for (zr, &b) in z.iter_mut().zip(layer.b.value.data()) {
        *zr = *zr + R::from_f64(b);
    }
    if let (SkipVariant::ToGates, Some(sk)) = (variant, skip) {
        for (r, zr) in z.iter_mut().enumerate() {
            *zr = *zr + sk[r % n];
        }
    }
    let gate = match (skip, &layer.gate) {
        (Some(sk), Some(gp)) if variant.is_gated() => {
            let (a, b) = match gate_inputs {
                GateInputs::PrevAndSkip => (h, sk),
                GateInputs::BelowAndPrev => (x, h),
            };
            let wa = matvec(&gp.wg.value, a);
            let ub = matvec(&gp.ug.value, b);
            Some(
                (0..n)
                    .map(|j| {
                        let bias = gp.bias.as_ref().map_or(0.0, |p| p.value.data()[j]);
                        (wa[j] + ub[j] + R::from_f64(bias)).sigmoid()
                    })
                    .collect::<Vec<R>>(),
            )
        }
        _ => None,
    };
    let mut c_new = Vec::with_capacity(n);
    let mut h_new = Vec::with_capacity(n);
    for j in 0..n {
        let (i, f, o, s) = (
            z[j].sigmoid(),
            z[n + j].sigmoid(),
            z[2 * n + j].sigmoid(),
            z[3 * n + j].tanh(),
        );
        let mut cj = f * c[j] + i * s;
        if let Some(sk) = skip {
            match variant {
                SkipVariant::ToInternal => cj = cj + sk[j],
                SkipVariant::ToInternalGated => cj = cj + gate.as_ref().expect("gated")[j] * sk[j],
                _ => {}
            }
        }
        let mut hj = o * cj.tanh();
        if let Some(sk) = skip {
            match variant {
                SkipVariant::ToOutput => hj = hj + sk[j],
                SkipVariant::ToOutputGated => hj = hj + gate.as_ref().expect("gated")[j] * sk[j],
                SkipVariant::ToOutputGatedSigmoidMap => {
                    hj = hj + gate.as_ref().expect("gated")[j] * sk[j].sigmoid()
                }
                _ => {}
            }
        }
        c_new.push(cj);
        h_new.push(hj);
    }
    (h_new, c_new)
}

/// Which part of the network a probed parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Embedding,
    Layer { backward: bool, index: usize },
    Output,
}

impl Part {
    /// Part of every tensor in [`TaggerModel::params`] order.
    pub fn of_params(model: &TaggerModel) -> Vec<Part> {
        let mut parts = vec![Part::Embedding; model.embed.params().len()];
        for (backward, layers) in [(false, &model.stack.forward), (true, &model.stack.backward)] {
            for (index, layer) in layers.iter().enumerate() {
                parts.extend(std::iter::repeat_n(
                    Part::Layer { backward, index },
                    layer.params().len(),
                ));
            }
        }
        parts.extend([Part::Output, Part::Output]);
        parts
    }
}

/// Embedded inputs and every layer's outputs per direction, per position.
#[derive(Clone, Debug)]
pub struct ReferenceState<R> {
    inputs: Vec<Vec<R>>,
    layers: [Vec<Vec<Vec<R>>>; 2],
}

/// Runs layers `from..` of one direction, taking layers below `from` from `below`.
fn run_layers<R: Real>(
    model: &TaggerModel,
    layers: &[LayerParams],
    inputs: &[Vec<R>],
    below: &[Vec<Vec<R>>],
    from: usize,
    reverse: bool,
) -> Vec<Vec<Vec<R>>> {
    let len = inputs.len();
    let cfg = model.config.cell();
    let mut fresh: Vec<Vec<Vec<R>>> = Vec::with_capacity(layers.len() - from);
    for (idx, layer) in layers.iter().enumerate().skip(from) {
        let get = |i: usize| {
            if i < from {
                &below[i]
            } else {
                &fresh[i - from]
            }
        };
        let n = layer.hidden;
        let mut out = vec![Vec::new(); len];
        let (mut h, mut c) = (vec![R::zero(); n], vec![R::zero(); n]);
        for k in 0..len {
            let t = if reverse { len - 1 - k } else { k };
            let x = if idx == 0 {
                &inputs[t]
            } else {
                &get(idx - 1)[t]
            };
            let skip = (idx >= 2 && cfg.variant.has_skip()).then(|| get(idx - 2)[t].as_slice());
            (h, c) = step(layer, cfg.variant, cfg.gate_inputs, x, &h, &c, skip);
            out[t] = h.clone();
        }
        fresh.push(out);
    }
    fresh
}

fn validate(model: &TaggerModel, sentence: &[TokenFeatures], gold: &[usize]) -> Result<()> {
    if model.config.dropout_embed != 0.0 || model.config.dropout_hidden != 0.0 {
        return Err(Error::Config(
            "reference loss requires dropout to be disabled".into(),
        ));
    }
    if sentence.is_empty() {
        return Err(Error::Empty("sentence"));
    }
    if gold.len() != sentence.len() {
        return Err(Error::Length {
            what: "gold tags",
            got: gold.len(),
            expected: sentence.len(),
        });
    }
    let k = model.num_tags();
    if let Some(&g) = gold.iter().find(|&&g| g >= k) {
        return Err(Error::IdOutOfRange {
            table: "tags",
            id: g,
            size: k,
        });
    }
    sentence
        .iter()
        .try_for_each(|token| model.embed.check(token))
}

fn nll<R: Real>(model: &TaggerModel, fwd: &[Vec<R>], bwd: &[Vec<R>], gold: &[usize]) -> R {
    let mut total = R::zero();
    for ((hf, hb), &g) in fwd.iter().zip(bwd).zip(gold) {
        let h: Vec<R> = hf.iter().chain(hb).copied().collect();
        let z: Vec<R> = matvec(&model.out_w.value, &h)
            .into_iter()
            .zip(model.out_b.value.data())
            .map(|(v, &b)| v + R::from_f64(b))
            .collect();
        let m = z.iter().copied().fold(z[0], R::max);
        let sum = z.iter().fold(R::zero(), |acc, &v| acc + (v - m).exp());
        total = total + m + sum.ln() - z[g];
    }
    total / R::from_f64(gold.len() as f64)
}

/// Full reference evaluation of `sentence`.
pub fn reference_state<R: Real>(
    model: &TaggerModel,
    sentence: &[TokenFeatures],
) -> Result<ReferenceState<R>> {
    validate(model, sentence, &vec![0; sentence.len()])?;
    let inputs: Vec<Vec<R>> = sentence.iter().map(|t| embed(model, t)).collect();
    let fwd = run_layers(model, &model.stack.forward, &inputs, &[], 0, false);
    let bwd = run_layers(model, &model.stack.backward, &inputs, &[], 0, true);
    Ok(ReferenceState {
        inputs,
        layers: [fwd, bwd],
    })
}

/// Mean NLL after a change confined to `part`, recomputing only what depends
/// on it and reading everything else from `base`, which must describe the
/// same model before the change.
pub fn reference_loss_after<R: Real>(
    model: &TaggerModel,
    sentence: &[TokenFeatures],
    gold: &[usize],
    base: &ReferenceState<R>,
    part: Part,
) -> R {
    let top = |layers: &[Vec<Vec<R>>]| layers.last().cloned().unwrap_or_default();
    match part {
        Part::Embedding => {
            let inputs: Vec<Vec<R>> = sentence.iter().map(|t| embed(model, t)).collect();
            let same = inputs
                .iter()
                .flatten()
                .zip(base.inputs.iter().flatten())
                .all(|(a, b)| a == b);
            if same {
                // rows no token reads
                return nll(model, &top(&base.layers[0]), &top(&base.layers[1]), gold);
            }
            let fwd = run_layers(model, &model.stack.forward, &inputs, &[], 0, false);
            let bwd = run_layers(model, &model.stack.backward, &inputs, &[], 0, true);
            nll(model, &top(&fwd), &top(&bwd), gold)
        }
        Part::Layer { backward, index } => {
            let (layers, d) = if backward {
                (&model.stack.backward, 1)
            } else {
                (&model.stack.forward, 0)
            };
            let fresh = run_layers(
                model,
                layers,
                &base.inputs,
                &base.layers[d],
                index,
                backward,
            );
            let other = top(&base.layers[1 - d]);
            let changed = top(&fresh);
            if backward {
                nll(model, &other, &changed, gold)
            } else {
                nll(model, &changed, &other, gold)
            }
        }
        Part::Output => nll(model, &top(&base.layers[0]), &top(&base.layers[1]), gold),
    }
}

/// Mean sentence NLL recomputed with scalar loops in `R`, independently of
/// the matrix code used for training. Only defined without dropout.
pub fn reference_loss<R: Real>(
    model: &TaggerModel,
    sentence: &[TokenFeatures],
    gold: &[usize],
) -> Result<R> {
    validate(model, sentence, gold)?;
    let state = reference_state(model, sentence)?;
    Ok(reference_loss_after(
        model,
        sentence,
        gold,
        &state,
        Part::Output,
    ))
}
