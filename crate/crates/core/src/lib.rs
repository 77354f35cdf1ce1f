//! Evaluation and data-construction toolkit for automatic term extraction.
//!
//! - [`corpus`]: documents, gold annotations, predictions and their file
//!   formats (JSONL, TSV term lists, IOB).
//! - [`consistency`]: document- and corpus-level consistency expansion of
//!   predicted terms.
//! - [`metrics`]: corpus- and document-level precision/recall/F1, term
//!   statistics and Cohen's kappa.
//! - [`overlap`]: k-nearest-neighbour overlap between embedded datasets.
//! - [`distill`]: prompt rendering, entity-type filtering and conversation
//!   datasets built against a completion endpoint.

pub mod consistency;
pub mod corpus;
pub mod distill;
pub mod error;
pub mod metrics;
pub mod overlap;
mod par;

pub use error::{Error, Result};
