//! Collapsing probabilities of triangulated 3-spheres.
//!
//! A sphere with one facet removed is collapsed along a uniformly random
//! spanning tree of its dual graph; whether the remaining 2-complex collapses
//! to a point is a Bernoulli trial whose success probability measures how
//! easy the sphere is to recognise by collapsing.

pub mod anneal;
pub mod catalog;
pub mod cli;
pub mod collapse;
pub mod complex;
pub mod error;
pub mod estimate;
pub mod invariants;
pub mod spanning;

pub use complex::{Complex3, DualGraph, EdgeTable, FVector};
pub use error::{Error, Result};
