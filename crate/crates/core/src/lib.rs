//! Pseudosquares and pseudopowers: exact search, counting, and the
//! character-sum identities that govern their distribution.
//!
//! Modules build bottom-up: [`arith`] supplies the integer toolkit,
//! [`pseudosquare`] and [`pseudopower`] search and count, [`charsum`] holds
//! the real character sums and bounds, and [`cli`] wraps everything behind a
//! command-line interface with JSON/CSV reports.

pub mod arith;
pub mod charsum;
pub mod cli;
pub mod decimal;
pub mod error;
pub mod pseudopower;
pub mod pseudosquare;
pub mod window;

pub use error::{Error, Result};
pub use window::{Budget, CountReport, Window};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
