//! Trainable kernel activation functions with multiple-kernel mixtures.
//!
//! Each neuron's nonlinearity is a kernel expansion over a fixed, shared
//! dictionary, `g(s) = Σᵢ αᵢ Σₘ μₘ κₘ(s, dᵢ)`, with the expansion weights `α`
//! and the kernel mixture `μ` learned by backpropagation alongside the rest of
//! the network. The crate provides:
//!
//! - [`kernels`]: Gaussian, rational-quadratic and quadratic-polynomial base
//!   kernels, their derivatives, Gram matrices and PSD checks.
//! - [`kaf`]: dictionaries, the (multi-)KAF forward/backward pass, and the ridge
//!   regression initialization towards ELU.
//! - [`nn`]: dense, conv, pooling, batch-norm, dropout and activation layers,
//!   all with hand-written backward passes, plus network assembly.
//! - [`train`]: Adam, minibatching, validation with patience-based early stopping.
//! - [`data`]: the ICRD image container, CSV ingestion and synthetic generators.
//! - [`gradcheck`]: the finite-difference audit of every backward pass.
//!
//! ```
//! use std::sync::Arc;
//! use kafforge::kaf::{init_multikaf, elu, KafConfig};
//!
//! let cfg = KafConfig::multikaf();
//! let dict = Arc::new(cfg.dictionary()?);
//! let layer = init_multikaf(4, dict.clone(), cfg.kernel_specs(&dict)?)?;
//! for &d in dict.points() {
//!     assert!((layer.eval(0, d) - elu(d)).abs() < 1e-3);
//! }
//! # Ok::<(), kafforge::Error>(())
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod kaf;
pub mod kernels;
pub mod linalg;
pub mod nn;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
