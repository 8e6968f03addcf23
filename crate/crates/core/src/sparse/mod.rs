//! Sparse and dense matrix storage.
//!
//! The finest, unstructured operator is kept in [`CsrMatrix`]. Every
//! structured coarse operator is a 9-point [`EllMatrix`] with the diagonal
//! in slot 0. The coarsest operator is densified into a [`DenseMatrix`]
//! and LU-factored.

mod csr;
mod dense;
mod ell;
mod mtx;

pub use csr::CsrMatrix;
pub use dense::{DenseMatrix, LuFactors};
pub use ell::{EllMatrix, PAD};
pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
