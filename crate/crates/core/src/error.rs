use thiserror::Error;

use crate::arith::ArithError;
use crate::charsum::GrPrecondition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("enumeration needs {needed} symbol evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("search exhausted its bound {bound} without a hit")]
    SearchExhausted { bound: String },
    #[error("Graham-Ringrose precondition failed: {0}")]
    Precondition(GrPrecondition),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
