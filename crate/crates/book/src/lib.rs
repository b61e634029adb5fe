//! Compiles the chapters of the guide under `book/` so every Rust snippet
//! runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/geometric-tensor.md")]
pub mod geometric_tensor {}

#[doc = include_str!("../../../book/src/weak-drive.md")]
pub mod weak_drive {}

#[doc = include_str!("../../../book/src/chern-numbers.md")]
pub mod chern_numbers {}

#[doc = include_str!("../../../book/src/circuit.md")]
pub mod circuit {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
