//! Graph edit distance, quadratic assignment and Weisfeiler-Leman tools
//! whose running time is governed by VC dimension.

pub mod approx;
pub mod error;
pub mod format;
pub mod gen;
pub mod graph;
pub mod lp;
pub mod qap;
pub mod rational;
pub mod setsystem;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{Assignment, Graph, PartialInjection};
pub use qap::QapInstance;
pub use rational::Rational;
