pub mod align;
pub mod bidix;
pub mod corpus;
pub mod error;
pub mod phrase;
pub mod template;

pub use error::{Error, Result};
