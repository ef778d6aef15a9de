#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod cones;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod optimality;
pub mod vec2;

pub use error::{Error, Result};
pub use geometry::{Agent, Configuration, ContactPair, Obstacle, PairKind, PairLabel, Scenario};
pub use vec2::Vec2;
