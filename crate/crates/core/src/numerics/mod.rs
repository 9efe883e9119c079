//! Numerical building blocks: quadrature, root finding, interpolation, normal tails.

pub mod normal;
pub mod pchip;
pub mod quadrature;
pub mod roots;

pub use pchip::MonotoneCubic;
pub use quadrature::{integrate, integrate_to_infinity, Integral, Tolerance};
pub use roots::{brent, RootTolerance};
