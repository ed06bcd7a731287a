//! Tests of the information structure in discrete games of incomplete
//! information, built on Bayes correlated equilibrium predictions.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the command-line tool uses throughout.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bce_polytope;
pub mod cli_io;
pub mod ego;
pub mod error;
pub mod game_model;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod mc_sim;
pub mod multi_test;
pub mod normal;
pub mod scalar;
pub mod socp;
pub mod support_stat;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GameSpec = game_model::GameSpec<f64>;
pub type DiscretizedGame = game_model::DiscretizedGame<f64>;
pub type BcePolytope = bce_polytope::BcePolytope<f64>;
pub type TestModel = bootstrap_test::TestModel<f64>;
pub type TestConfig = bootstrap_test::TestConfig<f64>;
pub type ThetaDomain = bootstrap_test::ThetaDomain<f64>;
pub type GeometryCache = bootstrap_test::GeometryCache<f64>;
pub type NullDecision = bootstrap_test::NullDecision<f64>;
pub type SignalDgp = mc_sim::SignalDgp<f64>;
pub type PowerConfig = mc_sim::PowerConfig<f64>;
