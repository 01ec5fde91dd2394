//! LSTM cells with every skip-connection wiring, directional layers and the
//! stacked bidirectional assembly, each with a hand-written backward pass.

mod cell;
mod layer;
mod params;
mod stack;
mod variant;


pub use cell::{cell_backward, cell_forward, CellGrads, StepCache};
pub use layer::{
    directional_layer_backward, directional_layer_forward, Direction, LayerGrads, LayerRun,
};
pub use params::{LayerInit, LayerParams, SkipGateParams};
pub use stack::{stack_backward, stack_forward, DirectionRun, StackParams, StackRun};
pub use variant::{CellConfig, GateInputs, SkipVariant};
