//! The book, compiled.
//!
//! Each chapter of `book/` is attached verbatim as the documentation of an
//! empty module here, so every `rust` fence in the guide is a doctest of
//! this crate. `cargo test -p guide-tests` is the statement "the guide is
//! true of the current API": a chapter that drifts from the library fails
//! the build instead of rotting quietly on the shelf.
//!
//! The crate deliberately ships no code. If you add a chapter to
//! `book/src/SUMMARY.md`, add a module for it below.

#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hyperbolic-space.md")]
pub mod hyperbolic_space {}

#[doc = include_str!("../../../book/src/group-presentations.md")]
pub mod group_presentations {}

#[doc = include_str!("../../../book/src/orbit-enumeration.md")]
pub mod orbit_enumeration {}

#[doc = include_str!("../../../book/src/growth-regimes.md")]
pub mod growth_regimes {}

#[doc = include_str!("../../../book/src/sum-level-sets.md")]
pub mod sum_level_sets {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
