//! Exact, asymptotic and simulated win/tie probabilities for the coin game
//! in which A scores at every `HH` and B scores at every `HT`.

pub mod binomial;
pub mod cli;
pub mod error;
pub mod exact;
pub mod excursions;
pub mod montecarlo;
pub mod rational;
pub mod renewal;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{ExactDistribution, FloatDistribution};
pub use sequence::{parse_sequence, Flip, FlipSequence, Pattern, ScoreSeries};
