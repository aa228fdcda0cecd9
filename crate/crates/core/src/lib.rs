//! Sampling with derivatives in shift-invariant spaces spanned by the
//! integer translates of an exponential B-spline.

pub mod analysis;
pub mod collocation;
pub mod construction;
pub mod error;
pub mod exec;
pub mod expoly;
pub mod gabor;
pub mod io;
pub mod linalg;
pub mod points;
pub mod quadrature;
pub mod reconstruction;
pub mod spline;

pub use error::{Error, Result};
pub use exec::Execution;
pub use points::{PointConfig, SampledSet};
pub use spline::{ExpPolySpline, SplineSpec};
