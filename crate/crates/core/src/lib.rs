//! Exceptional-zero computations for elliptic curves with split
//! multiplicative reduction: p-adic numbers, finite-level Iwasawa algebra
//! measures, Tate curves, modular symbols and the p-adic L-function.

pub mod curve;
pub mod iwasawa;
pub mod lpfunc;
pub mod modsym;
pub mod padic;

pub use padic::{PadicError, PadicNumber, Prime};
