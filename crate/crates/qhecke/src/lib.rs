//! Numerics for one-level densities of quadratic Hecke L-functions over ℚ(i).

// `!(x > a)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod cli;
pub mod empirical;
pub mod expansion;
pub mod quad;
pub mod ratios;
pub mod transforms;
pub mod specfun;
pub mod sum;
pub mod zint;
