//! Exact minimum-distance profiles of shortened CRC codes and exhaustive
//! ranking of CRC generator polynomials by cumulative distance.

pub mod checkpoint;
pub mod cli;
pub mod distance;
pub mod error;
pub mod gf2poly;
pub mod profile;
pub mod search;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
pub use gf2poly::Gf2Poly;
