//! Modulus-approximation certificates and weighted function modules over the
//! disk algebra, computed on a uniform discretization of the unit circle.

pub mod algebra;
pub mod circle;
pub mod config;
pub mod error;
pub mod certificates;
pub mod gleason;
pub mod hardy;
pub mod modules;
pub mod report;

pub use error::{Error, Result};
