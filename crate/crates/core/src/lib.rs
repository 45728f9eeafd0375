//! Heterochaos baker maps, the Dyck shift and the inducing machinery behind them.
//!
//! Exact computations use arbitrary-precision rationals throughout; Monte Carlo
//! estimation lives in [`stats`] and is the only place floats appear.

pub mod alphabet;
pub mod diagram;
pub mod dyck;
pub mod error;
pub mod inducing;
pub mod maps;
pub mod numerics;
pub mod stats;
pub mod tower;

pub use alphabet::{Class, Symbol};
pub use error::{Error, Result};
pub use maps::{BakerMap, MapParams};
pub use numerics::{Interval, Point2, Point3, Rational, Rect2, Block3};
