//! File formats, rendering, the benchmark corpus and the command-line front
//! end for [`stackplan_core`].

pub mod cli;
pub mod corpus;
pub mod format;
pub mod render;
