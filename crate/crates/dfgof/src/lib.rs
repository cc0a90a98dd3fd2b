//! Command-line front end for the `dfgof-core` goodness-of-fit library:
//! file formats, the null-table cache, multi-threaded Monte Carlo runners
//! and the `transform`, `test`, `simulate` and `fit` subcommands.

pub mod cache;
pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
