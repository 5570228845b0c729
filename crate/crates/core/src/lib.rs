//! Bohmian trajectories and weak-measurement simulation for a pair of
//! path-entangled photons, each sent through its own double slit.
//!
//! A phase shift applied behind one slit on side A changes the guidance
//! field, and therefore the trajectories, of photon B, while every locally
//! measurable distribution on side B stays put.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod trajectories;
pub mod wavefield;

pub use error::{Error, Result};
pub use wavefield::{Complex, SlitParams, Side, Slit, SpacetimePoint, StateConfig, StateKind};
