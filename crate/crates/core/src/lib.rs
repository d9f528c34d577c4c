pub mod cli;
pub mod combinatorics;
pub mod distributions;
pub mod error;
pub mod oracle;
pub mod rng;
pub mod urn;
