//! Energy-optimal design of faulty quantized Min-Sum LDPC decoders.

pub mod cache;
pub mod channel;
pub mod decoder;
pub mod density_evolution;
pub mod energy;
pub mod error;
pub mod finite_length;
pub mod montecarlo;
pub mod optimizer;
pub mod protograph;
pub mod special;

pub use error::{Error, Result};
