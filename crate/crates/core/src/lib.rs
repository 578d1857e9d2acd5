// `!(x > 0.0)` is used throughout so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod graph;
pub mod growth;
pub mod io;
pub mod quadrature;
pub mod spectrum;
pub mod svg;
pub mod trees;

pub use error::{Error, Result};
