//! Jacobi multipliers, Lagrangian synthesis and non-local symmetries for
//! autonomous second-order ODEs `x'' = F(x, v)`.

pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod geometry;
pub mod lagrangian;
pub mod multiplier;
pub mod nonlocal;
