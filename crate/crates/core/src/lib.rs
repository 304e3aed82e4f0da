//! Solution flows of rough differential equations `dphi = F X(dt)` built by
//! sewing log-ODE approximate flows, with diagnostics for the associated
//! convergence estimates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod ode;
pub mod poly;
pub mod rough_path;
pub mod selfcheck;
pub mod tensor;
pub mod vector_fields;

pub use error::{Error, Result};
