//! Exact computation of slice, Schmidt and analytic ranks of multilinear
//! forms over finite fields, together with the matrix-pencil and
//! point-counting machinery used to check the inequalities relating them.

pub mod error;
pub mod forms;
pub mod gfq;
pub mod lab;
pub mod linalg;
pub mod pencils;
pub mod ranks;

pub use error::{Error, Result};
pub use forms::{MultilinearForm, PolynomialFn};
pub use gfq::{FieldCtx, FieldDescriptor, FieldElem};
pub use linalg::{Matrix, Subspace};
