pub mod error;
pub mod special_fns;
pub mod dist_model;
pub mod edgeworth;
pub mod cornish_fisher;
pub mod lattice_clt;
pub mod sizing_bounds;
pub mod distances;
pub mod binomial_exact;
pub mod case_studies;

pub use error::{Error, Result};
