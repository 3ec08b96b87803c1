#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem1d;
pub mod harness;
pub mod integrators;
pub mod numkit;
pub mod stability;

pub use error::{Error, Result};
