//! Numerical companion to the fast escaping set of genus-zero entire
//! functions `f(z) = c z^q Π(1 + z/aₙ)`: maximum modulus, the size and
//! sector inequalities, island construction, orbit classification and
//! dimension estimates.
//!
//! Everything is generic over the scalar ([`Real`], i.e. `f32` or `f64`);
//! the aliases below fix `f64`.

// `!(x > 0)` is how NaN gets rejected along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod dynamics;
pub mod error;
pub mod ext;
pub mod frame;
pub mod function;
pub mod hurwitz;
pub mod io;
pub mod islands;
pub mod lattice;
pub mod logmag;
pub mod modulus;
pub mod nesting;
pub mod scalar;
pub mod thresholds;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use ext::Ext;
pub use logmag::LogMag;
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;
pub type Function = function::GenusZeroFunction<f64>;
pub type Frame = frame::SectorFrame<f64>;
pub type Mag = LogMag<f64>;
pub type Island = islands::IslandRecord<f64>;
pub type Orbit = dynamics::OrbitRecord<f64>;
pub type Level = dimension::NestingLevel<f64>;
