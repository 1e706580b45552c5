//! Runtime prediction and minimum-cost configuration scheduling for batch
//! workflows under precedence, time-window and tiered-pricing constraints.

pub mod bench;
pub mod io;
pub mod cost;
pub mod predictor;
pub mod problem;
pub mod schedule;
pub mod simplex;
pub mod solver;
