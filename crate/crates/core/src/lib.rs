pub mod algebra;
pub mod error;
pub mod flow;
pub mod intertwiner;
pub mod moyal;
pub mod systems;
pub mod transform;

pub use error::{Error, Result};
