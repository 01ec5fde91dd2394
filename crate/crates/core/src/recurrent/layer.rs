use super::{cell_backward, cell_forward, CellConfig, LayerParams, StepCache};
use crate::error::{Error, Result};
use crate::numerics::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Processes `t = 1..T`.
    Forward,
    /// Processes `t = T..1`.
    Backward,
}

impl Direction {
    /// Positions in processing order.
    pub fn order(self, len: usize) -> Box<dyn Iterator<Item = usize>> {
        match self {
            Direction::Forward => Box::new(0..len),
            Direction::Backward => Box::new((0..len).rev()),
        }
    }
}

/// Outputs and caches of one directional layer, indexed by sentence position.
#[derive(Clone, Debug)]
pub struct LayerRun {
    pub direction: Direction,
    pub caches: Vec<StepCache>,
}

impl LayerRun {
    pub fn outputs(&self) -> Vec<Mat> {
        self.caches.iter().map(|c| c.h.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.caches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.caches.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub d_inputs: Vec<Mat>,
    pub d_skips: Option<Vec<Mat>>,
}

/// Runs one LSTM layer over a sentence from zero initial state.
pub fn directional_layer_forward(
    inputs: &[Mat],
    skips: Option<&[Mat]>,
    params: &LayerParams,
    cfg: CellConfig,
    direction: Direction,
) -> Result<LayerRun> {
    let len = inputs.len();
    if len == 0 {
        return Err(Error::Empty("input sequence"));
    }
    if let Some(sk) = skips {
        if sk.len() != len {
            return Err(Error::Length {
                what: "skip inputs",
                got: sk.len(),
                expected: len,
            });
        }
    }
    let n = params.hidden;
    let mut h = Mat::zeros(n, 1);
    let mut c = Mat::zeros(n, 1);
    let mut slots: Vec<Option<StepCache>> = vec![None; len];
    for t in direction.order(len) {
        let cache = cell_forward(&inputs[t], &h, &c, skips.map(|s| &s[t]), params, cfg)?;
        h = cache.h.clone();
        c = cache.c.clone();
        slots[t] = Some(cache);
    }
    Ok(LayerRun {
        direction,
        caches: slots
            .into_iter()
            .map(|c| c.expect("every position visited"))
            .collect(),
    })
}

/// Backpropagation through time for one directional layer. `d_outputs[t]` is
/// the gradient reaching `h_t` from outside the recurrence.
pub fn directional_layer_backward(
    d_outputs: &[Mat],
    run: &LayerRun,
    params: &mut LayerParams,
    cfg: CellConfig,
) -> Result<LayerGrads> {
    let len = run.len();
    if d_outputs.len() != len {
        return Err(Error::Length {
            what: "output gradients",
            got: d_outputs.len(),
            expected: len,
        });
    }
    let n = params.hidden;
    let has_skip = run.caches.first().is_some_and(|c| c.skip.is_some());
    let mut d_inputs = vec![Mat::zeros(params.input_width, 1); len];
    let mut d_skips = has_skip.then(|| vec![Mat::zeros(n, 1); len]);
    let mut dh_next = Mat::zeros(n, 1);
    let mut dc_next = Mat::zeros(n, 1);
    let order: Vec<usize> = run.direction.order(len).collect();
    for &t in order.iter().rev() {
        let d_h = d_outputs[t].add(&dh_next)?;
        let grads = cell_backward(&d_h, &dc_next, &run.caches[t], params, cfg)?;
        d_inputs[t] = grads.d_x;
        if let (Some(ds), Some(g)) = (d_skips.as_mut(), grads.d_skip) {
            ds[t] = g;
        }
        dh_next = grads.d_h_prev;
        dc_next = grads.d_c_prev;
    }
    Ok(LayerGrads { d_inputs, d_skips })
}
