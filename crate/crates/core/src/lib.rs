// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod numkit;
pub mod qgt;
pub mod topology;

pub use error::{Error, Result};
