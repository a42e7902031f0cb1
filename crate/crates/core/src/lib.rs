//! Misiurewicz parameters of the quadratic family, surgery sequences of
//! postcritically finite maps converging to them, the skinning map of the
//! real critically periodic family, and Hausdorff-distance checks of the
//! asymptotic self-similarity of Julia and Mandelbrot sets.

pub mod backward;
pub mod cli;
pub mod complex;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod misiurewicz;
pub mod similarity;
pub mod skinning;
pub mod surgery;

pub use complex::{BigComplex, Precision};
pub use error::{Error, Result};
