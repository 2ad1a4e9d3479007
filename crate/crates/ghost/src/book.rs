//! Doctest anchors for the guide under `book/`. Each chapter is included
//! as module documentation so its code samples compile and run with
//! `cargo test --doc`, keeping the book and the crate in lockstep. The
//! module only exists while rustdoc collects doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}

#[doc = include_str!("../../../book/src/passage.md")]
pub mod passage {}

#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}

#[doc = include_str!("../../../book/src/pendulum.md")]
pub mod pendulum {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
