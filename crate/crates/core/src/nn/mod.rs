//! Layers with hand-derived reverse-mode gradients, and networks built from them.

pub mod activation;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod loss;
pub mod network;
pub mod pool;
pub mod spec;

pub use network::{Layer, Mode, Network, Param};
pub use spec::{build_icr_cnn, ActivationSpec, ArchSpec, LayerSpec, NetworkSpec, Variant};
