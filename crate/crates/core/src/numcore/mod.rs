//! Minimal reverse-mode differentiable tensor core.
//!
//! Only what the motion VAEs and the fitting optimizer use: broadcasting
//! elementwise ops, matmul, same-padded dilated `conv1d`, gather/concat,
//! nearest upsampling, custom-gradient nodes, Adam, and a warm-up + cosine
//! learning-rate schedule. Everything is `f64` and single-threaded per graph.

mod conv;
mod fd;
mod ops;
mod optim;
mod schedule;
mod tensor;

pub use conv::conv_output_len;
pub use fd::{finite_difference_gradient, grads_close};
pub use ops::{elementwise, mse, Elementwise};
pub use optim::{adam_step, AdamState, Parameter};
pub use schedule::{cosine_lr, CosineSchedule};
pub use tensor::{ParentGrads, Tensor};

#[cfg(test)]
mod tests;
