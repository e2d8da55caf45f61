pub mod analysis;
pub mod discovery;
pub mod domains;
pub mod error;
pub mod exec;
pub mod maps;
pub mod moebius;
pub mod output;
pub mod planar;

pub use error::{Error, Result};
