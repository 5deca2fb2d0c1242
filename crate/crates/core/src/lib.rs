//! Design, decoding and benchmarking of GF(4) CRC-aided zero-terminated
//! convolutional codes on noncoherent 4-FSK, together with the matching
//! finite-blocklength benchmarks (saddlepoint RCU and normal approximation).

pub mod bounds;
pub mod channel;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod gf4;
pub mod sim;
pub mod special;
pub mod spectrum;

pub use error::Error;
