//! Absolute constants in normal approximation bounds with Esseen- and Rozovskii-type
//! fractions, the fractions themselves, and the characteristic-function majorants behind them.

pub mod chf;
pub mod constants;
pub mod error;
pub mod fractions;
pub mod optimize;
pub mod scalar;
pub mod solver;
pub mod special;
pub mod tables;

pub use error::{Error, Result};

/// Exact rational summand system.
pub type ExactSystem = fractions::SummandSystem<num_rational::BigRational>;
/// Floating-point summand system.
pub type FloatSystem = fractions::SummandSystem<f64>;
/// Exact rational discrete law.
pub type ExactDistribution = fractions::DiscreteDistribution<num_rational::BigRational>;
