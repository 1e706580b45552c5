//! Synthetic instances and records, the brute-force oracle, and the outlier
//! robustness experiment.

mod generate;
mod oracle;
mod records;
mod robustness;

pub use generate::{generate_problem, GeneratorConfig, GeneratorError};
pub use oracle::{brute_force_optimum, OracleResult, OracleVerdict, TooLarge, MAX_ENUMERATION};
pub use records::{generate_records, PlantedTruth, RecordConfig};
pub use robustness::{robustness_trial, spread_percent, RobustnessConfig, RobustnessError, RobustnessReport};
