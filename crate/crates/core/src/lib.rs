//! Boolean and free convolution transform calculus for probability measures on the
//! real line, with numerical checks of heavy-tail asymptotics.
//!
//! Measures are encoded by their Cauchy transform `G`. Boolean additive and
//! multiplicative convolutions, Boolean and free additive powers and the
//! Belinschi–Nica semigroup are all built as lazily evaluated [`TransformHandle`]
//! trees; [`inversion`] turns any handle back into densities, atoms and tails.

pub mod asymptotics;
pub mod boolean_conv;
pub mod boolean_max;
pub mod cli;
pub mod error;
pub mod free_additive;
pub mod inversion;
pub mod measure;
pub mod quadrature;
pub mod real;
pub mod transforms;

pub use boolean_conv::{bool_add, bool_add_power, bool_mult, validate_mult_args, TransformHandle};
pub use error::{Error, Result};
pub use measure::{Measure, MomentCount, MomentInfo};
pub use real::Precision;
pub use transforms::{ComplexPoint, HalfPlane, RemainderKind, RemainderValue};
