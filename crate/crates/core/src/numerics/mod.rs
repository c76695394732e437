//! Scalar numerical routines shared by the mechanism models: adaptive
//! quadrature, bracketed root finding and one-dimensional maximisation.

mod optimize;
mod quad;
mod roots;

pub use optimize::{golden_section_max, grid_then_golden_max};
pub use quad::{integrate, integrate_pieces, QuadOptions, QuadResult};
pub use roots::{brent, RootOptions};
