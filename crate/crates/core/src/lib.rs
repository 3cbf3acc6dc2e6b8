//! Online group feature selection.
//!
//! Features arrive in groups over a fixed labeled sample set. Each group is
//! screened feature by feature with a spectral between/within-class scatter
//! criterion ([`intra`]); the survivors are merged with the running selection
//! and refined by an L1-regularized regression ([`lasso`], [`ogfs`]).
//! Alpha-investing and Grafting ([`baselines`]) consume the same stream one
//! feature at a time, and [`eval`] holds the k-NN evaluation harness.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod intra;
pub mod lasso;
pub mod ogfs;
pub mod spectral;

pub use error::{Error, Result};
