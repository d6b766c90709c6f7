//! Normalization-free classification of non-negative volumetric images.
//!
//! Images that differ by a positive factor are the same half-ray. This crate holds the
//! half-ray geometry ([`geometry`]), preprocessing masks ([`masks`]), a synthetic
//! cohort generator ([`phantom`]), sparse linear classifiers with their evaluation
//! protocol ([`classifiers`]), statistics and weight analysis ([`analysis`]) and the
//! on-disk formats ([`io`]).

pub mod analysis;
pub mod classifiers;
pub mod error;
pub mod geometry;
pub mod io;
pub mod masks;
pub mod phantom;
pub mod pipeline;
pub mod verify;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{ImageVolume, RegionMask, WeightMap};
