//! Single-feature streaming baselines: Alpha-investing and Grafting.
//!
//! Both consume the same group stream as the main selector, flattened to
//! one feature at a time, and report the same [`SelectionResult`] shape.
//!
//! [`SelectionResult`]: crate::ogfs::SelectionResult

mod alpha;
mod grafting;
mod pvalue;

pub use alpha::{alpha_investing_run, replay_wealth, AlphaConfig, AlphaOutcome, WealthState, WealthStep};
pub use grafting::{bnll_gradient, grafting_run, FitReport, GraftingConfig, GraftingModel, GraftingOutcome};
pub use pvalue::p_value;
