pub mod classify;
pub mod envelope;
pub mod error;
pub mod expr;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod qnumbers;
pub mod semiclassical;
pub mod special;
pub mod toy;

pub use error::{Error, Result};
