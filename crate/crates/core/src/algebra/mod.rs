//! Rational and univariate polynomial arithmetic: the exact substrate shared
//! by the expansion engine and the interval oracle.

pub mod poly;
pub mod rational;
pub mod refine;
pub mod resultant;
pub mod sturm;

pub use poly::RatPoly;
pub use rational::{format_rational, parse_rational, rat, ratio, Rational};
pub use refine::RootRefiner;
pub use resultant::resultant;
pub use sturm::{sturm_count, SturmSequence};
