//! Generalized Kähler–Ricci solitons on toric 4-orbifolds.
//!
//! The moment polytope of the orbifold is classified as a parallelogram,
//! trapezoid or generic quadrilateral (or a labelled triangle), mapped to a
//! canonical model, and the soliton equation is reduced to one-variable
//! problems solved in closed form by [`expquad`]. [`verify`] re-checks every
//! solution with finite differences that never touch the closed forms.

mod error;
pub mod expquad;
pub mod polytope;
pub mod roots;
pub mod sasaki;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
