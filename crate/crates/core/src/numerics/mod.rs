//! Dense networks, exact reverse-mode gradients and the Adam optimizer.
//!
//! Everything that trains in this crate goes through [`MlpParams`]: the
//! branch and trunk halves of the operator network, the cutting network and
//! the baseline. Batched passes are plain GEMMs over row-major `(n, width)`
//! activations; the scalar [`MlpParams::forward`] path exists for one-off
//! queries and as the reference the batched path is tested against.

mod adam;
mod mlp;

pub use adam::{AdamConfig, AdamState};
pub use mlp::{Activation, Batch, ForwardCache, Gradients, Loss, MlpParams};
