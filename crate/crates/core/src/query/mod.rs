//! Query parsing and execution: exact answers by full scan, approximate
//! answers from generated or baseline samples.

mod exec;
mod parse;

use std::fmt;

pub use exec::{
    execute_approx, execute_exact, ApproxOptions, ApproxSource, Budget, Diagnostics, EstimateSet,
    GroupEstimate, QueryError, Strategy,
};
pub use parse::{parse, unparse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFn {
    Avg,
    Sum,
    Count,
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggFn::Avg => write!(f, "AVG"),
            AggFn::Sum => write!(f, "SUM"),
            AggFn::Count => write!(f, "COUNT"),
        }
    }
}

/// Range filter `lo <= column <= hi`, both ends inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub column: String,
    pub lo: f64,
    pub hi: f64,
}

/// A parsed query: `SELECT A, AGGR(B) FROM table [WHERE ...] GROUP BY A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub agg: AggFn,
    /// None only for COUNT(*).
    pub agg_column: Option<String>,
    pub group_column: String,
    pub table: String,
    pub predicate: Option<Predicate>,
}
