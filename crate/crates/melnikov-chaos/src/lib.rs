//! Melnikov-based construction of chaotic orbits for planar piecewise-smooth
//! (Filippov) systems whose saddle lies on the switching curve.

pub mod bernoulli;
pub mod cli;
pub mod config;
pub mod constructor;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod homoclinic;
pub mod melnikov;
pub mod poincare;
pub mod poly;
pub mod system;
pub mod vec2;

pub use error::{Error, Result};
