#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod descent;
pub mod error;
pub mod goldstein;
pub mod harness;
pub mod ledger;
pub mod minnorm;
pub mod objectives;
pub mod selftest;
pub mod trace;

pub use error::{Error, Result};
pub use objectives::{InstanceSpec, Objective, ObjectiveKind, Point, Radial};
