use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Where (and how) the output of layer `l-2` enters layer `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SkipVariant {
    /// Plain stacked LSTM.
    NoSkip,
    /// Identity skip added to every gate preactivation.
    ToGates,
    /// Identity skip added to the internal state `c`.
    ToInternal,
    /// Gated skip added to the internal state `c`.
    ToInternalGated,
    /// Identity skip added to the cell output `h`.
    ToOutput,
    /// Gated skip added to the cell output `h`.
    ToOutputGated,
    /// Gated skip of `sigmoid(h^{l-2})` added to the cell output `h`.
    ToOutputGatedSigmoidMap,
}

impl SkipVariant {
    pub const ALL: [SkipVariant; 7] = [
        SkipVariant::NoSkip,
        SkipVariant::ToGates,
        SkipVariant::ToInternal,
        SkipVariant::ToInternalGated,
        SkipVariant::ToOutput,
        SkipVariant::ToOutputGated,
        SkipVariant::ToOutputGatedSigmoidMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SkipVariant::NoSkip => "NoSkip",
            SkipVariant::ToGates => "ToGates",
            SkipVariant::ToInternal => "ToInternal",
            SkipVariant::ToInternalGated => "ToInternalGated",
            SkipVariant::ToOutput => "ToOutput",
            SkipVariant::ToOutputGated => "ToOutputGated",
            SkipVariant::ToOutputGatedSigmoidMap => "ToOutputGatedSigmoidMap",
        }
    }

    pub fn has_skip(self) -> bool {
        self != SkipVariant::NoSkip
    }

    /// Whether the variant owns an exclusive skip gate.
    pub fn is_gated(self) -> bool {
        matches!(
            self,
            SkipVariant::ToInternalGated
                | SkipVariant::ToOutputGated
                | SkipVariant::ToOutputGatedSigmoidMap
        )
    }
}

impl fmt::Display for SkipVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SkipVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SkipVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown skip variant `{s}`")))
    }
}

/// Which activations feed the skip gate `g = sigmoid(Wg a + Ug b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GateInputs {
    /// `a = h_{t-1}^l`, `b = h_t^{l-2}`.
    #[default]
    PrevAndSkip,
    /// `a = h_t^{l-1}`, `b = h_{t-1}^l`.
    BelowAndPrev,
}

impl GateInputs {
    pub fn name(self) -> &'static str {
        match self {
            GateInputs::PrevAndSkip => "prev_and_skip",
            GateInputs::BelowAndPrev => "below_and_prev",
        }
    }
}

impl FromStr for GateInputs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prev_and_skip" => Ok(GateInputs::PrevAndSkip),
            "below_and_prev" => Ok(GateInputs::BelowAndPrev),
            _ => Err(Error::Config(format!("unknown gate inputs `{s}`"))),
        }
    }
}

/// Model-wide cell wiring shared by every layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellConfig {
    pub variant: SkipVariant,
    pub gate_inputs: GateInputs,
}

impl CellConfig {
    pub fn new(variant: SkipVariant) -> Self {
        CellConfig {
            variant,
            gate_inputs: GateInputs::default(),
        }
    }
}
