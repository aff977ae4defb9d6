//! Independent reference computations for `chemrep-core`: a dense
//! brute-force-quadrature implementation of every scheme, sampled property
//! checks of the potential and the element matrices, and the acceptance
//! criteria built on them.

pub mod criteria;
pub mod dense;
pub mod props;
pub mod runs;

pub use criteria::{run, Level, Outcome};
