//! Granular analysis of rock-mass permeability data: crisp granulation with
//! a self-organizing map, fuzzy granulation with a TSK neuro-fuzzy system
//! trained in a close-open balancing loop, and rough-set rule extraction.
//!
//! The top-level entry points are [`pipeline::run_close_open`] for the
//! balancing procedure and [`pipeline::run_rst_branch`] for the symbolic
//! branch; `data`, `som`, `nfis` and `rst` expose the underlying pieces.

pub mod data;
pub mod error;
pub mod fixtures;
pub mod nfis;
pub mod pipeline;
pub mod rst;
pub mod som;

pub use error::{Error, Result};
