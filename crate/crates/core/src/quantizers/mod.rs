//! Finite scalar quantization, the vector-quantization baseline, token index
//! packing and codebook utilization statistics.

mod fsq;
mod levels;
mod stats;
mod vq;

pub use fsq::{
    decoder_input, digit_values, fsq_bound_tensor, fsq_quantize, fsq_quantize_tensor,
    level_latent, round_ste, FsqCode,
};
pub use levels::{digits_to_index, index_to_digits, LevelSpec};
pub use stats::{report_from_histogram, utilization, TokenStream, UtilizationReport};
pub use vq::{vq_losses, vq_quantize, vq_quantize_tensor, Codebook};
