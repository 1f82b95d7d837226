//! Exact engine for 2-ray games of index-2, codimension-4 Fano 3-folds.

pub mod blowup;
pub mod chamber;
pub mod corpus;
pub mod error;
pub mod exactmath;
pub mod fano;
pub mod format;
pub mod game;
pub mod polyring;
#[cfg(test)]
mod properties;
pub mod verify;

pub use error::{Error, Result};
