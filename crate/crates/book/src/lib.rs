//! The guide under `book/`, compiled so its snippets run as doc-tests.
//!
//! mdbook cannot link external crates when testing, so each chapter is
//! pulled in here as a module and `cargo test` does the work.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/toeplitz.md")]
pub mod toeplitz {}

#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}

#[doc = include_str!("../../../book/src/log-coordinates.md")]
pub mod log_coordinates {}

#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}

#[doc = include_str!("../../../book/src/orbits.md")]
pub mod orbits {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
