//! LSTM networks with hand-derived backpropagation through time.
//!
//! Two architectures share one parameter container ([`NetworkParams`]):
//!
//! - **Stacked many-to-one**: `stack_depth` layers, each fed the full hidden
//!   sequence of the layer below; the top layer's final hidden state goes
//!   through an affine head producing `forward_look` values.
//! - **Encoder-decoder**: the stack encodes the history and hands its final
//!   `(h, c)` to a one-layer decoder. The decoder runs `forward_look` steps;
//!   step `k` emits `dense_weights[k] · h_k + dense_bias[k]`. Its first input
//!   is the last observed price; later inputs are either the true previous
//!   targets (teacher forcing, used for training) or its own previous outputs.

mod cell;
mod network;

pub use cell::{lstm_cell_forward, GateParams, GateRecord, LayerCache, LstmLayerParams, LstmState};
pub use network::{
    Architecture, DecoderInput, EncDecCache, ForwardCache, Gradients, Network, NetworkParams,
    NetworkSpec,
};
