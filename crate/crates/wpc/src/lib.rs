//! Numerical toolkit for curves whose welding homeomorphisms have
//! p-integrable logarithmic derivative: fractional seminorms and weight
//! diagnostics on line and circle samples, conjugate-function transforms,
//! curve reconstruction from boundary data, the welding fixed point and its
//! decomposition, power-series norms on the disk, and dilatation fields on
//! the upper half-plane.

pub mod analytic;
pub mod beltrami;
pub mod curve;
pub mod error;
pub mod family;
pub mod grid;
pub mod io;
pub mod parallel;
pub mod spaces;
pub mod welding;

pub use error::{Result, WpcError};
pub use grid::{CircleGrid, Grid, LineGrid, MonotoneMap, SampledFunction};
pub use spaces::{NormMethod, NormReport};
