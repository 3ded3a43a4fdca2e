//! Compiles the guide's code snippets as doctests so the book in `book/`
//! cannot drift from the library. Each chapter becomes one module; a failing
//! snippet points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/graphs.md")]
mod graphs {}

#[doc = include_str!("../../../book/src/masks.md")]
mod masks {}

#[doc = include_str!("../../../book/src/dynamics.md")]
mod dynamics {}

#[doc = include_str!("../../../book/src/analysis.md")]
mod analysis {}

#[doc = include_str!("../../../book/src/adversary.md")]
mod adversary {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
