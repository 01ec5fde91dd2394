use crate::error::{Error, Result};
use crate::features::EmbedDims;
use crate::numerics::GaussianScale;
use crate::recurrent::{CellConfig, GateInputs, SkipVariant};

/// Architecture and regularization settings of a tagger.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerConfig {
    pub layers: usize,
    pub hidden: usize,
    pub variant: SkipVariant,
    pub gate_inputs: GateInputs,
    /// Adds a trainable bias (initialized to zero) inside the skip gate.
    pub gate_bias: bool,
    pub window: usize,
    pub word_dim: usize,
    pub char_dim: usize,
    pub cap_dim: usize,
    pub forget_bias: f64,
    pub dropout_embed: f64,
    pub dropout_hidden: f64,
    pub init_scale: GaussianScale,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            layers: 7,
            hidden: 512,
            variant: SkipVariant::ToOutputGated,
            gate_inputs: GateInputs::PrevAndSkip,
            gate_bias: false,
            window: 3,
            word_dim: 200,
            char_dim: 5,
            cap_dim: 5,
            forget_bias: 0.0,
            dropout_embed: 0.25,
            dropout_hidden: 0.5,
            init_scale: GaussianScale::Variance,
            min_count: 1,
            seed: 1,
        }
    }
}

impl TaggerConfig {
    /// Small network for the synthetic toy task: three layers (the smallest
    /// depth with skip connections), 16 units, 16-wide word vectors and no
    /// dropout, since the toy labels are noise-free.
    pub fn toy() -> Self {
        TaggerConfig {
            layers: 3,
            hidden: 16,
            word_dim: 16,
            ..TaggerConfig::default()
        }
        .without_dropout()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.layers == 0 {
            return fail("layers must be >= 1");
        }
        if self.hidden == 0 {
            return fail("hidden must be >= 1");
        }
        if self.window.is_multiple_of(2) {
            return fail("window must be odd");
        }
        if self.word_dim == 0 || self.char_dim == 0 || self.cap_dim == 0 {
            return fail("embedding widths must be >= 1");
        }
        for (name, p) in [
            ("dropout_embed", self.dropout_embed),
            ("dropout_hidden", self.dropout_hidden),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {p}")));
            }
        }
        if !self.forget_bias.is_finite() {
            return fail("forget_bias must be finite");
        }
        Ok(())
    }

    pub fn cell(&self) -> CellConfig {
        CellConfig {
            variant: self.variant,
            gate_inputs: self.gate_inputs,
        }
    }

    pub fn embed_dims(&self) -> EmbedDims {
        EmbedDims {
            window: self.window,
            word_dim: self.word_dim,
            char_dim: self.char_dim,
            cap_dim: self.cap_dim,
        }
    }

    /// Same architecture with every dropout rate set to zero.
    pub fn without_dropout(&self) -> Self {
        TaggerConfig {
            dropout_embed: 0.0,
            dropout_hidden: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TaggerConfig::default().validate().unwrap();
        assert_eq!(TaggerConfig::default().embed_dims().width(), 655);
        let bad = TaggerConfig {
            window: 4,
            ..TaggerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TaggerConfig {
            layers: 0,
            ..TaggerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
