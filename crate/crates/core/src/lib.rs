pub mod error;
pub mod geom;
pub mod rng;

pub use error::{Error, Result};
pub mod crossing;
pub mod event;
pub mod stats;
pub mod influence;
pub mod explore;
pub mod arms;
pub mod compare;
pub mod experiments;
pub mod io;
