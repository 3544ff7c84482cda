//! Synthetic economies and a loop-based reference implementation for
//! checking the shock engine.

pub mod compare;
pub mod economy;
pub mod fixture;
pub mod oracle;

pub use compare::{check_economy, compare, run_engine, Comparison};
pub use economy::{generate, grid_dims, Dims, SyntheticEconomy};
pub use oracle::{oracle_shocks, permutation_p_value, OracleError, OracleOutput};
