use super::{TokenFeatures, AFFIX_LEN};
use crate::error::{Error, Result};
use crate::numerics::{gaussian_init, sigmoid, GaussianScale, Mat, Param, Rng};

/// Widths of the three input blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedDims {
    pub window: usize,
    pub word_dim: usize,
    pub char_dim: usize,
    pub cap_dim: usize,
}

impl EmbedDims {
    pub fn window_width(&self) -> usize {
        self.window * self.word_dim
    }

    /// `d * e_w + 10 * e_c + e_cap`
    pub fn width(&self) -> usize {
        self.window_width() + 2 * AFFIX_LEN * self.char_dim + self.cap_dim
    }
}

/// Trainable lookup tables plus the context-window gate `r = sigmoid(W_r w_center + b_r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTables {
    pub dims: EmbedDims,
    pub words: Param,
    pub chars: Param,
    pub caps: Param,
    pub gate_w: Param,
    pub gate_b: Param,
}

/// Per-token values needed by [`embed_backward`].
#[derive(Clone, Debug)]
pub struct EmbedCache {
    /// One gate value per window position.
    pub gates: Vec<f64>,
    /// Window dropout mask, one entry per window position.
    pub mask: Vec<f64>,
}

impl EmbeddingTables {
    pub fn zeros(dims: EmbedDims, num_words: usize, num_chars: usize) -> Self {
        EmbeddingTables {
            dims,
            words: Param::new(Mat::zeros(num_words, dims.word_dim)),
            chars: Param::new(Mat::zeros(num_chars, dims.char_dim)),
            caps: Param::new(Mat::zeros(2, dims.cap_dim)),
            gate_w: Param::new(Mat::zeros(dims.window, dims.word_dim)),
            gate_b: Param::new(Mat::zeros(dims.window, 1)),
        }
    }

    /// Lookup tables draw from the scaled Gaussian with unit fan-in; the
    /// window gate uses fan-in `e_w`; the gate bias starts at zero.
    pub fn initialized(
        dims: EmbedDims,
        num_words: usize,
        num_chars: usize,
        scale: GaussianScale,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut t = EmbeddingTables::zeros(dims, num_words, num_chars);
        t.words.value = gaussian_init(num_words, dims.word_dim, 1, scale, rng)?;
        t.chars.value = gaussian_init(num_chars, dims.char_dim, 1, scale, rng)?;
        t.caps.value = gaussian_init(2, dims.cap_dim, 1, scale, rng)?;
        t.gate_w.value = gaussian_init(dims.window, dims.word_dim, dims.word_dim, scale, rng)?;
        Ok(t)
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![
            &self.words,
            &self.chars,
            &self.caps,
            &self.gate_w,
            &self.gate_b,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![
            &mut self.words,
            &mut self.chars,
            &mut self.caps,
            &mut self.gate_w,
            &mut self.gate_b,
        ]
    }

    pub(crate) fn check(&self, features: &TokenFeatures) -> Result<()> {
        let words = self.words.value.rows();
        let chars = self.chars.value.rows();
        if features.window_ids.len() != self.dims.window {
            return Err(Error::Length {
                what: "context window",
                got: features.window_ids.len(),
                expected: self.dims.window,
            });
        }
        for &id in features
            .window_ids
            .iter()
            .chain(std::iter::once(&features.word_id))
        {
            if id >= words {
                return Err(Error::IdOutOfRange {
                    table: "word embeddings",
                    id,
                    size: words,
                });
            }
        }
        for &id in features.prefix_ids.iter().chain(&features.suffix_ids) {
            if id >= chars {
                return Err(Error::IdOutOfRange {
                    table: "char embeddings",
                    id,
                    size: chars,
                });
            }
        }
        Ok(())
    }
}

/// Concatenates the gated (and optionally masked) window embeddings, the ten
/// affix character embeddings and the capitalization embedding.
pub fn embed_token(
    features: &TokenFeatures,
    tables: &EmbeddingTables,
    dropout_mask: Option<&Mat>,
) -> Result<(Mat, EmbedCache)> {
    tables.check(features)?;
    let dims = tables.dims;
    let mask = match dropout_mask {
        Some(m) if m.len() != dims.window => {
            return Err(Error::Length {
                what: "window dropout mask",
                got: m.len(),
                expected: dims.window,
            })
        }
        Some(m) => m.data().to_vec(),
        None => vec![1.0; dims.window],
    };
    let center = tables.words.value.row(features.word_id);
    let gates: Vec<f64> = (0..dims.window)
        .map(|j| {
            let pre = tables
                .gate_w
                .value
                .row(j)
                .iter()
                .zip(center)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + tables.gate_b.value.data()[j];
            sigmoid(pre)
        })
        .collect();

    let mut out = Vec::with_capacity(dims.width());
    for (j, &id) in features.window_ids.iter().enumerate() {
        let scale = mask[j] * gates[j];
        out.extend(tables.words.value.row(id).iter().map(|v| scale * v));
    }
    for &id in features.prefix_ids.iter().chain(&features.suffix_ids) {
        out.extend_from_slice(tables.chars.value.row(id));
    }
    out.extend_from_slice(tables.caps.value.row(features.cap as usize));
    Ok((Mat::column(&out), EmbedCache { gates, mask }))
}

/// Accumulates table and window-gate gradients for one token into `tables`.
/// Only rows referenced by `features` are touched.
pub fn embed_backward(
    d_output: &Mat,
    features: &TokenFeatures,
    tables: &mut EmbeddingTables,
    cache: &EmbedCache,
) -> Result<()> {
    let dims = tables.dims;
    if d_output.len() != dims.width() {
        return Err(Error::Shape {
            op: "embed_backward",
            left: (dims.width(), 1),
            right: d_output.shape(),
        });
    }
    tables.check(features)?;
    let d = d_output.data();
    let ew = dims.word_dim;
    let mut d_gate_pre = vec![0.0; dims.window];
    for (j, &id) in features.window_ids.iter().enumerate() {
        let slice = &d[j * ew..(j + 1) * ew];
        let scale = cache.mask[j] * cache.gates[j];
        let row = tables.words.value.row(id);
        let d_gate = cache.mask[j] * row.iter().zip(slice).map(|(a, b)| a * b).sum::<f64>();
        d_gate_pre[j] = d_gate * cache.gates[j] * (1.0 - cache.gates[j]);
        for (g, v) in tables.words.grad.row_mut(id).iter_mut().zip(slice) {
            *g += scale * v;
        }
    }
    let center = tables.words.value.row(features.word_id).to_vec();
    let mut d_center = vec![0.0; ew];
    for (j, &dp) in d_gate_pre.iter().enumerate() {
        if dp == 0.0 {
            continue;
        }
        tables.gate_b.grad.data_mut()[j] += dp;
        for (k, g) in tables.gate_w.grad.row_mut(j).iter_mut().enumerate() {
            *g += dp * center[k];
        }
        for (k, dc) in d_center.iter_mut().enumerate() {
            *dc += dp * tables.gate_w.value.get(j, k);
        }
    }
    for (g, v) in tables
        .words
        .grad
        .row_mut(features.word_id)
        .iter_mut()
        .zip(&d_center)
    {
        *g += v;
    }

    let ec = dims.char_dim;
    let mut offset = dims.window_width();
    for &id in features.prefix_ids.iter().chain(&features.suffix_ids) {
        for (g, v) in tables
            .chars
            .grad
            .row_mut(id)
            .iter_mut()
            .zip(&d[offset..offset + ec])
        {
            *g += v;
        }
        offset += ec;
    }
    for (g, v) in tables
        .caps
        .grad
        .row_mut(features.cap as usize)
        .iter_mut()
        .zip(&d[offset..])
    {
        *g += v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{PAD, PAD_CHAR};
    use crate::numerics::{grad_check, ParamSet};

    fn dims() -> EmbedDims {
        EmbedDims {
            window: 3,
            word_dim: 4,
            char_dim: 2,
            cap_dim: 3,
        }
    }

    fn random_tables(rng: &mut Rng) -> EmbeddingTables {
        let mut t = EmbeddingTables::zeros(dims(), 5, 6);
        for p in t.params_mut() {
            let (r, c) = p.value.shape();
            p.value = Mat::from_vec(r, c, (0..r * c).map(|_| rng.normal()).collect()).unwrap();
        }
        t
    }

    fn token() -> TokenFeatures {
        TokenFeatures {
            word_id: 3,
            window_ids: vec![2, 3, 3],
            prefix_ids: [2, 3, 4, PAD_CHAR, PAD_CHAR],
            suffix_ids: [PAD_CHAR, PAD_CHAR, 2, 3, 5],
            cap: true,
        }
    }

    #[test]
    fn default_widths() {
        let d = EmbedDims {
            window: 3,
            word_dim: 200,
            char_dim: 5,
            cap_dim: 5,
        };
        assert_eq!(d.window_width(), 600);
        assert_eq!(d.width(), 655);
    }

    #[test]
    fn zero_gate_weights_halve_the_window() {
        let mut t = random_tables(&mut Rng::new(1));
        t.gate_w.value.fill(0.0);
        t.gate_b.value.fill(0.0);
        let (out, cache) = embed_token(&token(), &t, None).unwrap();
        assert_eq!(cache.gates, vec![0.5; 3]);
        for (j, &id) in token().window_ids.iter().enumerate() {
            for k in 0..4 {
                assert_eq!(out.data()[j * 4 + k], 0.5 * t.words.value.get(id, k));
            }
        }
        assert_eq!(out.len(), dims().width());
    }

    #[test]
    fn out_of_range_id() {
        let t = random_tables(&mut Rng::new(1));
        let mut f = token();
        f.window_ids[0] = 5;
        assert!(matches!(
            embed_token(&f, &t, None),
            Err(Error::IdOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_upstream_leaves_gradients_zero() {
        let mut t = random_tables(&mut Rng::new(2));
        let (_, cache) = embed_token(&token(), &t, None).unwrap();
        embed_backward(&Mat::zeros(dims().width(), 1), &token(), &mut t, &cache).unwrap();
        assert!(t.params().iter().all(|p| p.grad.max_abs() == 0.0));
    }

    struct Probe(EmbeddingTables);

    impl ParamSet for Probe {
        fn tensors(&self) -> Vec<&Mat> {
            self.0.params().into_iter().map(|p| &p.value).collect()
        }
        fn tensors_mut(&mut self) -> Vec<&mut Mat> {
            self.0
                .params_mut()
                .into_iter()
                .map(|p| &mut p.value)
                .collect()
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(3);
        for (f, mask) in [
            (token(), None),
            (
                TokenFeatures {
                    word_id: 1,
                    window_ids: vec![PAD, 1, 4],
                    ..token()
                },
                Some(Mat::column(&[1.0, 0.0, 1.0])),
            ),
        ] {
            let tables = random_tables(&mut rng);
            let weights = Mat::from_vec(
                dims().width(),
                1,
                (0..dims().width()).map(|_| rng.normal()).collect(),
            )
            .unwrap();
            let loss = |p: &Probe| {
                embed_token(&f, &p.0, mask.as_ref())
                    .unwrap()
                    .0
                    .hadamard(&weights)
                    .unwrap()
                    .sum()
            };
            let mut grads = tables.clone();
            let (_, cache) = embed_token(&f, &grads, mask.as_ref()).unwrap();
            embed_backward(&weights, &f, &mut grads, &cache).unwrap();
            let analytic: Vec<Mat> = grads.params().iter().map(|p| p.grad.clone()).collect();
            let report = grad_check(&mut Probe(tables), loss, &analytic, 1e-5).unwrap();
            assert!(report.max_rel_err < 1e-6, "{report:?}");
        }
    }

    #[test]
    fn repeated_window_word_sums_contributions() {
        let mut t = random_tables(&mut Rng::new(4));
        t.gate_w.value.fill(0.0);
        let f = TokenFeatures {
            word_id: 1,
            window_ids: vec![2, 1, 2],
            ..token()
        };
        let (_, cache) = embed_token(&f, &t, None).unwrap();
        let mut d = vec![0.0; dims().width()];
        d[0] = 1.0; // window slot 0, dim 0
        d[8] = 1.0; // window slot 2, dim 0
        embed_backward(&Mat::column(&d), &f, &mut t, &cache).unwrap();
        let want = cache.gates[0] + cache.gates[2];
        assert!((t.words.grad.get(2, 0) - want).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn width_is_function_of_config(window in 0usize..4, word_dim in 1usize..6, char_dim in 1usize..4, cap_dim in 1usize..4) {
            let dims = EmbedDims { window: 2 * window + 1, word_dim, char_dim, cap_dim };
            let t = EmbeddingTables::initialized(dims, 4, 3, GaussianScale::Variance, &mut Rng::new(0)).unwrap();
            let f = TokenFeatures {
                word_id: 2,
                window_ids: vec![3; dims.window],
                prefix_ids: [2; AFFIX_LEN],
                suffix_ids: [1; AFFIX_LEN],
                cap: false,
            };
            let (out, cache) = embed_token(&f, &t, None).unwrap();
            proptest::prop_assert_eq!(out.len(), dims.window * word_dim + 10 * char_dim + cap_dim);
            proptest::prop_assert!(cache.gates.iter().all(|&g| g > 0.0 && g < 1.0));
        }
    }
}
