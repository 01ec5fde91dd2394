use super::{GateInputs, SkipVariant};
use crate::error::{Error, Result};
use crate::numerics::{gaussian_init, orthogonal_init, GaussianScale, Mat, Param, Rng};

/// Weights of the exclusive skip gate `g = sigmoid(Wg a + Ug b [+ bias])`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkipGateParams {
    pub wg: Param,
    pub ug: Param,
    pub bias: Option<Param>,
}

/// One LSTM layer in one direction.
///
/// `w` is the fused `4n x (m + n)` matrix acting on `[x; h_prev]`; its row
/// blocks are, in order, the input gate, forget gate, output gate and the
/// candidate state. Columns `m..m+n` are the recurrent part.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub input_width: usize,
    pub hidden: usize,
    pub w: Param,
    pub b: Param,
    pub gate: Option<SkipGateParams>,
}

/// Shape and initialization options for [`LayerParams::initialized`].
#[derive(Clone, Copy, Debug)]
pub struct LayerInit {
    pub input_width: usize,
    pub hidden: usize,
    pub with_gate: bool,
    pub gate_bias: bool,
    pub gate_inputs: GateInputs,
    pub forget_bias: f64,
    pub scale: GaussianScale,
}

impl LayerParams {
    pub fn zeros(input_width: usize, hidden: usize, with_gate: bool, gate_bias: bool) -> Self {
        let n = hidden;
        let gate = with_gate.then(|| SkipGateParams {
            wg: Param::new(Mat::zeros(n, n)),
            ug: Param::new(Mat::zeros(n, n)),
            bias: gate_bias.then(|| Param::new(Mat::zeros(n, 1))),
        });
        LayerParams {
            input_width,
            hidden,
            w: Param::new(Mat::zeros(4 * n, input_width + n)),
            b: Param::new(Mat::zeros(4 * n, 1)),
            gate,
        }
    }

    /// Input weights Gaussian, each `n x n` recurrent block orthogonal, forget
    /// bias block set to `forget_bias`, all other biases zero. Of the two
    /// skip-gate matrices, the one applied to `h_{t-1}` is recurrent.
    pub fn initialized(init: LayerInit, rng: &mut Rng) -> Result<Self> {
        let (m, n) = (init.input_width, init.hidden);
        if m == 0 || n == 0 {
            return Err(Error::Config("layer widths must be >= 1".into()));
        }
        let mut layer = LayerParams::zeros(m, n, init.with_gate, init.gate_bias);
        let input = gaussian_init(4 * n, m, m, init.scale, rng)?;
        for r in 0..4 * n {
            layer.w.value.row_mut(r)[..m].copy_from_slice(input.row(r));
        }
        for block in 0..4 {
            let q = orthogonal_init(n, n, rng)?;
            for r in 0..n {
                layer.w.value.row_mut(block * n + r)[m..].copy_from_slice(q.row(r));
            }
        }
        for r in n..2 * n {
            layer.b.value.data_mut()[r] = init.forget_bias;
        }
        if let Some(gate) = layer.gate.as_mut() {
            let recurrent = orthogonal_init(n, n, rng)?;
            let other = gaussian_init(n, n, n, init.scale, rng)?;
            match init.gate_inputs {
                GateInputs::PrevAndSkip => {
                    gate.wg.value = recurrent;
                    gate.ug.value = other;
                }
                GateInputs::BelowAndPrev => {
                    gate.wg.value = other;
                    gate.ug.value = recurrent;
                }
            }
        }
        Ok(layer)
    }

    /// The `n x n` recurrent block of gate `k` (0 = input, 1 = forget, 2 = output, 3 = candidate).
    pub fn recurrent_block(&self, k: usize) -> Mat {
        let (m, n) = (self.input_width, self.hidden);
        let mut q = Mat::zeros(n, n);
        for r in 0..n {
            q.row_mut(r)
                .copy_from_slice(&self.w.value.row(k * n + r)[m..]);
        }
        q
    }

    pub fn forget_bias_block(&self) -> &[f64] {
        &self.b.value.data()[self.hidden..2 * self.hidden]
    }

    /// Whether this layer must carry skip-gate weights for `variant` at 1-based depth `layer`.
    pub fn needs_gate(variant: SkipVariant, layer: usize) -> bool {
        variant.is_gated() && layer >= 3
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut out = vec![&self.w, &self.b];
        if let Some(g) = &self.gate {
            out.push(&g.wg);
            out.push(&g.ug);
            if let Some(b) = &g.bias {
                out.push(b);
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = vec![&mut self.w, &mut self.b];
        if let Some(g) = &mut self.gate {
            out.push(&mut g.wg);
            out.push(&mut g.ug);
            if let Some(b) = &mut g.bias {
                out.push(b);
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::orthogonality_defect;

    fn init(with_gate: bool, forget_bias: f64) -> LayerInit {
        LayerInit {
            input_width: 5,
            hidden: 3,
            with_gate,
            gate_bias: false,
            gate_inputs: GateInputs::PrevAndSkip,
            forget_bias,
            scale: GaussianScale::Variance,
        }
    }

    #[test]
    fn shapes_and_counts() {
        let p = LayerParams::initialized(init(true, 0.0), &mut Rng::new(1)).unwrap();
        assert_eq!(p.w.value.shape(), (12, 8));
        assert_eq!(p.b.value.shape(), (12, 1));
        let plain = LayerParams::zeros(5, 3, false, false).param_count();
        assert_eq!(p.param_count(), plain + 2 * 9);
        assert_eq!(
            LayerParams::zeros(5, 3, true, true).param_count(),
            plain + 2 * 9 + 3
        );
    }

    #[test]
    fn recurrent_blocks_orthogonal_and_forget_bias_set() {
        let p = LayerParams::initialized(init(true, 5.0), &mut Rng::new(4)).unwrap();
        for k in 0..4 {
            assert!(orthogonality_defect(&p.recurrent_block(k)) < 1e-6);
        }
        assert!(orthogonality_defect(&p.gate.as_ref().unwrap().wg.value) < 1e-6);
        assert!(p.forget_bias_block().iter().all(|&v| v == 5.0));
        let others: Vec<f64> =
            p.b.value
                .data()
                .iter()
                .enumerate()
                .filter(|(i, _)| !(3..6).contains(i))
                .map(|(_, v)| *v)
                .collect();
        assert!(others.iter().all(|&v| v == 0.0));
    }
}
