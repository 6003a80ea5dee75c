//! Vanishing criteria for reduced L_{q,p}-cohomology of twisted cylinders
//! `[a, b) ×_h N`, together with a discrete laboratory that checks the
//! underlying norm formulas and homotopy identities on a grid.

pub mod criteria;
pub mod error;
pub mod integrals;
pub mod lab;
pub mod rational;
pub mod report;
pub mod warping;

pub use error::{Error, Result};
