//! Rigorous enclosures and certificate checks for annulus maps.

pub mod boxes;
pub mod certify;
pub mod geometry;
pub mod hexfloat;
pub mod interval;
pub mod maps;
pub mod ode;

pub use boxes::{Axis, Box2};
pub use interval::{Interval, IntervalError};
