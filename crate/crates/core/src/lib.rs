//! Genetic-algorithm building blocks with an emphasis on the geometry of
//! point crossover and on soft selection.
//!
//! - [`genospace`]: schemas, chromosomes, Hamming / `L_p` / `L_inf` distances.
//! - [`crossover`]: k-point crossover, triangle decomposition, generalized
//!   circumference, outcome classification, distance trade-off.
//! - [`selection`]: quartile-scaled arctan/tanh curves, hard and adaptive
//!   thresholds, and a name registry of curve factories.
//! - [`guessgame`]: the higher/lower guessing game, exact and simulated.
//! - [`objective`]: benchmark objectives and their registry.
//! - [`engine`]: the generational loop and its stopping rules.

pub mod crossover;
pub mod engine;
pub mod error;
pub mod genospace;
pub mod guessgame;
pub mod objective;
pub mod selection;

pub use error::{Error, Result};
pub use genospace::{distance, distance_pow, distance_pow_exact, Chromosome, Gene, LocusKind, Metric, Schema};
