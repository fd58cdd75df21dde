// Matrix and table code indexes several arrays by the same loop variable on purpose.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod caps;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod functors;
pub mod groups;
pub mod linalg;
pub mod lmgraph;
pub mod report;
pub mod strat;
pub mod verify;

pub use error::{Error, Result};
