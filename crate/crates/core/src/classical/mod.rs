//! Classical ground truth: a concrete interpreter, exhaustive enumeration
//! over input domains, an interval abstract interpreter and a program
//! splitter for hybrid runs.

mod domain;
mod enumerate;
mod interp;
mod interval;
mod split;

pub use domain::{DomainSpec, InputDomain};
pub use enumerate::{enumerate, enumerate_weighted, EnumOptions, Enumeration, DEFAULT_CAP};
pub use interp::{eval_expr, eval_pred, interpret, ConcreteEnv, STEP_LIMIT};
pub use interval::{interval_analyze, Interval, IntervalEnv};
pub use split::{live_inputs, split, split_at_line};
