//! Minimal numerical core: dense tensors, named parameters, a reverse-mode
//! tape over the handful of ops the models need, plain SGD, inverted dropout,
//! and the checkpoint format.

pub mod checkpoint;
mod params;
mod tape;
mod tensor;

pub use params::{ParamId, ParamStore, Parameter};
pub use tape::{argmax, NodeId, Tape};
pub use tensor::{matvec_into, Scalar, Shape, Tensor};
