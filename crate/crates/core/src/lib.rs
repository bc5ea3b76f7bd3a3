//! Auxiliary counting problems for systems of cubic forms.

pub mod error;
pub mod forms;
pub mod formfile;
pub mod matrix;
pub mod counting;
pub mod minors;
pub mod scalar;
pub mod davenport;
pub mod circle;

pub use error::{Error, Result};
pub use forms::{BetaVector, CubicForm, SymMatrix};
pub use matrix::Matrix;
pub use scalar::{Backend, Rational, Scalar};
