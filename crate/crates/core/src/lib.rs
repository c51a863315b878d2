//! Summability toolkit: Cesàro and p-binomial means of real sequences, the
//! binomial kernel behind them, experiments on their implication structure,
//! and Cesàro limits of finite stochastic matrices.

pub mod binomial_kernel;
pub mod cli;
pub mod error;
pub mod markov;
pub mod sequences;
pub mod summation;
pub mod transforms;

pub use error::{Error, Result};
