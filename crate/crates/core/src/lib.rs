#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod numfmt;
pub mod optimize;
pub mod quadrature;
pub mod sensitivity;
pub mod spline;
pub mod sweep;

pub use error::{Error, Result};
