pub mod belief;
pub mod cli;
pub mod credal;
pub mod error;
pub mod frame;
pub mod inference;
pub mod infosys;
pub mod optim;
pub mod scoring;

pub use credal::{CredalSet, LinearConstraint};
pub use error::{Error, Result};
pub use frame::{Dist, Event, Frame, RandVar};
