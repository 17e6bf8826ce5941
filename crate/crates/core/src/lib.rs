// Negated comparisons are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod autodiff;
pub mod data;
pub mod eeg;
pub mod error;
pub mod model;
pub mod signal;
pub mod train;

pub use error::{Error, Result};
