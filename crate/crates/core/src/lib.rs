// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod existence;
pub mod itm;
pub mod ode;
pub mod problems;
pub mod report;
pub mod scaling;
