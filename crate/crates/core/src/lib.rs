//! Data-driven reduced order models for acoustic array data and the
//! Data-to-Born transform built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtb;
pub mod error;
pub mod forward;
pub mod gram;
pub mod inversion;
pub mod linalg;
pub mod mimo_rom;
pub mod siso_rom;

pub use error::{Error, Result};
