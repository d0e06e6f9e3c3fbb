//! Approximate Gauss–Lucas toolkit: closed-form ε-bounds, counting of zeros
//! and critical points near a convex set, a Rouché contour certifier and
//! extremal searches for the sharpest cushion ε.

pub mod bounds;
pub mod certifier;
pub mod cli;
pub mod engine;
pub mod error;
pub mod lab;
pub mod rational;
pub mod region;
pub mod svg;

pub use error::{AglError, Result};
pub use rational::{Complex, Polynomial, RationalFunction, RootSet, Tolerances};
pub use region::{ConvexRegion, OffsetContour};
