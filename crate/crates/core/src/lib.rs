//! Two senders compete to persuade a rationally inattentive receiver who
//! visits them in sequence and garbles what they offer.
//!
//! The numerics ([`beliefs`], [`concavify`], [`receiver`]) are generic over
//! [`Scalar`](scalar::Scalar); the equilibrium checkers work in `f64`.

pub mod beliefs;
pub mod cli;
pub mod concavify;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod extensions;
pub mod receiver;
pub mod scalar;

pub use error::{Error, Result};

pub type Belief = beliefs::DiscreteBeliefDistribution<f64>;
pub type Garbling = concavify::GarblingSolution<f64>;
pub type Params = receiver::ModelParams<f64>;
pub type Strategy = receiver::ReceiverStrategy<f64>;
