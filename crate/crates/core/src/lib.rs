pub mod algebra;
pub mod error;
pub mod numberfield;
pub mod realembed;
pub mod cfexpand;
pub mod families;
pub mod oracle;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
