//! Exact computation with translational tilings of `Z^d`.
//!
//! The crate verifies tilings and joint tilings by finite sets, searches for
//! periodic joint co-tiles, computes periodic decompositions of co-tiles,
//! checks independence and property (★) of tile tuples, builds brother
//! tiles, and turns piecewise periodic co-tiles into fully periodic ones.
//! All arithmetic is exact.

pub mod analysis;
pub mod construct;
pub mod decompose;
pub mod error;
pub mod function;
pub mod json;
pub mod lattice;
pub mod solve;
pub mod tiles;
pub mod torsion;
pub mod verify;

mod point;

pub use error::{Error, Result};
pub use function::PeriodicFunction;
pub use lattice::{Index, Lattice, PeriodicSet, QuotientGroup};
pub use point::Point;
pub use tiles::{Tile, TileTuple, WeightedTile};
