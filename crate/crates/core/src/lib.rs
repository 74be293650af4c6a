//! Exact evaluation of local polynomials attached to binary quadratic forms,
//! and the vanishing test for twisted central L-values built on them.

pub mod arith;
pub mod cli;
pub mod gamma0;
pub mod genus;
pub mod localpoly;
pub mod maassnum;
pub mod qforms;
pub mod vanish;

pub use arith::{Discriminant, Rational};
pub use qforms::{GL2Matrix, LevelFormSet, QuadForm};
