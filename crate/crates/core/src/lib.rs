// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod fieldlab;
pub mod liesym;
pub mod model;
pub mod reduced;
pub mod symcore;
