// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gridfn;
pub mod inference;
pub mod interval;
pub mod io;
pub mod mixing;
pub mod psb;
pub mod quad;
pub mod rates;
pub mod units;
