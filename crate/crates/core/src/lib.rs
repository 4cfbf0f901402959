#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod coeffs;
pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod fields;
pub mod io;
pub mod mms;
pub mod picard;
pub mod scalar;
pub mod stepper;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Field64 = fields::Field<f64>;
pub type State64 = fields::State<f64>;
pub type Grid64 = fields::Grid<f64>;
pub type Params64 = fields::Params<f64>;
pub type Field32 = fields::Field<f32>;
pub type State32 = fields::State<f32>;
pub type Grid32 = fields::Grid<f32>;
pub type Params32 = fields::Params<f32>;
