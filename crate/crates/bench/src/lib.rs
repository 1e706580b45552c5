//! Independent reference oracles and seeded fixtures used by the test
//! suites and benchmarks. Nothing here calls into the code paths it checks.

pub mod instances;
pub mod minimize;
pub mod random_lp;
pub mod vertex;
