pub mod circuit;
pub mod classical;
pub mod concat;
pub mod error;
pub mod exec;
pub mod fault;
pub mod field;
pub mod gadgets;
pub mod layout;
pub mod matrix;
pub mod par;
pub mod qcode;
pub mod state;
pub mod threshold;
pub mod univ;

pub use error::{Error, Result};
