//! Quaternion tensor algebra under the Einstein product, and solvers for
//! Sylvester-type systems of quaternion tensor equations.

pub mod error;
pub mod ginverse;
pub mod matrix;
pub mod quaternion;
pub mod solvers;
pub mod tensor;
pub mod toolkit;

pub use error::{Error, Result};
pub use matrix::QMatrix;
pub use quaternion::Quaternion;
pub use tensor::{QTensor, TensorShape};
