pub mod conegeom;
pub mod contfrac;
pub mod deformpoly;
pub mod error;
pub mod fillings;
pub mod matrix;
pub mod poly;
pub mod toricfan;
mod wide;
pub mod zeroseq;

pub use error::{Error, Result};
