pub mod circle2;
pub mod cli;
pub mod deform;
pub mod diagnostics;
pub mod error;
pub mod frw4;
pub mod geometry;
pub mod io;
pub mod numerics;
pub mod series;
pub mod source;

pub use error::{Error, Result};
