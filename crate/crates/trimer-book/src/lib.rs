//! The guide chapters under `book/src` embedded as module docs, so
//! `cargo test --doc` compiles and runs every code listing in the book.
//! mdBook itself does not execute listings; this crate is what keeps the
//! guide honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/averaging.md")]
pub mod averaging {}

#[doc = include_str!("../../../book/src/planning.md")]
pub mod planning {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
