//! Critical points of multipliers of periodic orbits of `z^2 + c`.

pub mod boettcher;
pub mod coding;
pub mod critfind;
pub mod cycle;
pub mod equidist;
pub mod error;
pub mod itinerary;
pub mod orbits;
pub mod seqb;

pub use error::{Error, Result};
pub use itinerary::Itinerary;
