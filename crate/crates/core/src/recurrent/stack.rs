use super::{
    directional_layer_backward, directional_layer_forward, CellConfig, Direction, LayerParams,
    LayerRun,
};
use crate::error::{Error, Result};
use crate::numerics::{Dropout, Mat, Mode, Param, Rng};

/// Two independent directional stacks of `L` layers each.
#[derive(Clone, Debug, PartialEq)]
pub struct StackParams {
    pub forward: Vec<LayerParams>,
    pub backward: Vec<LayerParams>,
}

impl StackParams {
    pub fn layers(&self) -> usize {
        self.forward.len()
    }

    pub fn direction(&self, d: Direction) -> &[LayerParams] {
        match d {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }

    /// Every trainable tensor, forward stack first, bottom layer first.
    pub fn params(&self) -> Vec<&Param> {
        self.forward
            .iter()
            .chain(&self.backward)
            .flat_map(|l| l.params())
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.forward
            .iter_mut()
            .chain(&mut self.backward)
            .flat_map(|l| l.params_mut())
            .collect()
    }

    fn direction_mut(&mut self, d: Direction) -> &mut [LayerParams] {
        match d {
            Direction::Forward => &mut self.forward,
            Direction::Backward => &mut self.backward,
        }
    }

    /// Checks that widths chain correctly and that skip-gate weights are
    /// present exactly where the variant needs them.
    pub fn validate(&self, input_width: usize, cfg: CellConfig) -> Result<()> {
        if self.forward.is_empty() {
            return Err(Error::Config("stack needs at least one layer".into()));
        }
        if self.forward.len() != self.backward.len() {
            return Err(Error::Length {
                what: "backward stack",
                got: self.backward.len(),
                expected: self.forward.len(),
            });
        }
        let n = self.forward[0].hidden;
        for layers in [&self.forward, &self.backward] {
            for (idx, layer) in layers.iter().enumerate() {
                let want_in = if idx == 0 { input_width } else { n };
                if layer.input_width != want_in || layer.hidden != n {
                    return Err(Error::Shape {
                        op: "stack layer",
                        left: (want_in, n),
                        right: (layer.input_width, layer.hidden),
                    });
                }
                if layer.w.value.shape() != (4 * n, want_in + n)
                    || layer.b.value.shape() != (4 * n, 1)
                {
                    return Err(Error::Shape {
                        op: "stack layer weights",
                        left: (4 * n, want_in + n),
                        right: layer.w.value.shape(),
                    });
                }
                if LayerParams::needs_gate(cfg.variant, idx + 1) && layer.gate.is_none() {
                    return Err(Error::Config(format!(
                        "layer {} lacks skip-gate weights required by {}",
                        idx + 1,
                        cfg.variant
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Forward record of one directional stack.
#[derive(Clone, Debug)]
pub struct DirectionRun {
    pub layers: Vec<LayerRun>,
    /// Dropout masks per layer (first and last hidden layer only), per position.
    pub masks: Vec<Option<Vec<Mat>>>,
    /// Top-layer outputs after dropout.
    pub top: Vec<Mat>,
}

#[derive(Clone, Debug)]
pub struct StackRun {
    pub forward: DirectionRun,
    pub backward: DirectionRun,
}

impl StackRun {
    pub fn top_fwd(&self) -> &[Mat] {
        &self.forward.top
    }

    pub fn top_bwd(&self) -> &[Mat] {
        &self.backward.top
    }
}

fn is_dropout_layer(idx: usize, layers: usize) -> bool {
    idx == 0 || idx + 1 == layers
}

fn run_direction(
    embedded: &[Mat],
    layers: &[LayerParams],
    cfg: CellConfig,
    direction: Direction,
    dropout: Dropout,
    mode: Mode,
    rng: &mut Rng,
) -> Result<DirectionRun> {
    let depth = layers.len();
    let mut outputs: Vec<Vec<Mat>> = Vec::with_capacity(depth);
    let mut runs = Vec::with_capacity(depth);
    let mut masks = Vec::with_capacity(depth);
    for (idx, params) in layers.iter().enumerate() {
        let input = if idx == 0 {
            embedded
        } else {
            &outputs[idx - 1]
        };
        let skip = (idx >= 2 && cfg.variant.has_skip()).then(|| outputs[idx - 2].as_slice());
        let run = directional_layer_forward(input, skip, params, cfg, direction)?;
        let mut out = run.outputs();
        if is_dropout_layer(idx, depth) {
            let layer_masks: Vec<Mat> = (0..out.len())
                .map(|_| dropout.mask(params.hidden, mode, rng))
                .collect();
            for (h, mask) in out.iter_mut().zip(&layer_masks) {
                *h = h.hadamard(mask)?;
            }
            masks.push(Some(layer_masks));
        } else {
            masks.push(None);
        }
        outputs.push(out);
        runs.push(run);
    }
    Ok(DirectionRun {
        layers: runs,
        masks,
        top: outputs.pop().expect("at least one layer"),
    })
}

/// Runs both directional stacks. Layer `l >= 3` receives `h^{l-2}` of its own
/// direction as skip input; dropout applies to the outputs of the first and
/// last layer wherever they are consumed.
pub fn stack_forward(
    embedded: &[Mat],
    stack: &StackParams,
    cfg: CellConfig,
    dropout: Dropout,
    mode: Mode,
    rng: &mut Rng,
) -> Result<StackRun> {
    let width = embedded
        .first()
        .ok_or(Error::Empty("embedded sequence"))?
        .rows();
    stack.validate(width, cfg)?;
    let forward = run_direction(
        embedded,
        &stack.forward,
        cfg,
        Direction::Forward,
        dropout,
        mode,
        rng,
    )?;
    let backward = run_direction(
        embedded,
        &stack.backward,
        cfg,
        Direction::Backward,
        dropout,
        mode,
        rng,
    )?;
    Ok(StackRun { forward, backward })
}

fn backprop_direction(
    d_top: &[Mat],
    run: &DirectionRun,
    layers: &mut [LayerParams],
    cfg: CellConfig,
) -> Result<Vec<Mat>> {
    let depth = layers.len();
    if run.layers.len() != depth {
        return Err(Error::Length {
            what: "layer caches",
            got: run.layers.len(),
            expected: depth,
        });
    }
    let len = d_top.len();
    if run.layers[0].len() != len {
        return Err(Error::Length {
            what: "top gradients",
            got: len,
            expected: run.layers[0].len(),
        });
    }
    let n = layers[0].hidden;
    let mut d_out: Vec<Vec<Mat>> = vec![vec![Mat::zeros(n, 1); len]; depth];
    d_out[depth - 1] = d_top.to_vec();
    let mut d_embedded = Vec::new();
    for idx in (0..depth).rev() {
        let mut d_raw = std::mem::take(&mut d_out[idx]);
        if let Some(masks) = &run.masks[idx] {
            for (d, mask) in d_raw.iter_mut().zip(masks) {
                *d = d.hadamard(mask)?;
            }
        }
        let grads = directional_layer_backward(&d_raw, &run.layers[idx], &mut layers[idx], cfg)?;
        if idx == 0 {
            d_embedded = grads.d_inputs;
        } else {
            for (acc, d) in d_out[idx - 1].iter_mut().zip(&grads.d_inputs) {
                acc.add_assign(d)?;
            }
        }
        if let Some(d_skips) = grads.d_skips {
            for (acc, d) in d_out[idx - 2].iter_mut().zip(&d_skips) {
                acc.add_assign(d)?;
            }
        }
    }
    Ok(d_embedded)
}

/// Reverse of [`stack_forward`]; accumulates every layer's parameter gradients
/// and returns the gradient for each embedded input, summed over directions.
pub fn stack_backward(
    d_top_fwd: &[Mat],
    d_top_bwd: &[Mat],
    run: &StackRun,
    stack: &mut StackParams,
    cfg: CellConfig,
) -> Result<Vec<Mat>> {
    let mut d_embedded = backprop_direction(
        d_top_fwd,
        &run.forward,
        stack.direction_mut(Direction::Forward),
        cfg,
    )?;
    let d_bwd = backprop_direction(
        d_top_bwd,
        &run.backward,
        stack.direction_mut(Direction::Backward),
        cfg,
    )?;
    for (acc, d) in d_embedded.iter_mut().zip(&d_bwd) {
        acc.add_assign(d)?;
    }
    Ok(d_embedded)
}
