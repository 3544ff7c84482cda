//! First-order supply and demand shocks on an industry-occupation network,
//! aggregated to employment, wages and value added.

pub mod aggregation;
pub mod engine;
pub mod matrix;
pub mod pipeline;
pub mod scenario;
pub mod stats;
pub mod taxonomy;

pub use aggregation::{
    aggregate_employment, aggregate_value_added, aggregate_wages, quartile_breakdown, venn_decomposition,
    AggregateError, AggregateReport, AggregateRow, QuartileReport, ValueAddedTable, VennReport, WageTable,
};
pub use engine::{
    compute_shocks, ActivityMap, EmploymentMatrix, EngineError, Level, RemotabilityVector, ShockInputs, ShockKind,
    ShockSet, ShockVector,
};
pub use matrix::DenseMatrix;
pub use scenario::{load_scenario, DemandScenario, ScenarioError, SectorShocks};
pub use stats::{pearson, Correlation};
pub use taxonomy::{parse_code, ClassCode, Concordance, Scheme, TaxonomyError};
