#![allow(clippy::large_enum_variant, clippy::type_complexity, clippy::needless_range_loop)]

//! Exact, finite-horizon laboratory for chaos on dendrites.
//!
//! Dendrites are modelled by finite metric trees with rational edge lengths
//! ([`metric_tree`]), selfmaps by piecewise-geodesic constant-speed rules
//! ([`tree_map`]). On top of that sit the macroscopic chaos checks
//! ([`chaos`]), length-expanding surjections ([`length_expanding`]), the exact
//! map construction fixing a nowhere dense arc or point ([`exact_builder`]),
//! the 3-adic odometer skew product ([`odometer`]) and a gallery of named
//! spaces and counterexamples ([`gallery`]).
//!
//! All arithmetic is exact over [`rational::Q`].

pub mod chaos;
pub mod error;
pub mod exact_builder;
pub mod experiment;
pub mod gallery;
pub mod length_expanding;
pub mod metric_tree;
pub mod odometer;
pub mod rational;
pub mod tree_map;

pub use error::{Error, Result};
pub use metric_tree::{Dendrite, PointRef, Region};
pub use rational::Q;
pub use tree_map::TreeMap;
