//! Truth tables, tomography and figures of merit.

pub mod metrics;
pub mod montecarlo;
pub mod process;
pub mod records;
pub mod report;
pub mod state;

pub use metrics::{fidelity, flipping_contrast, inquisition, linear_entropy, tangle, truth_table, truth_table_from_records, TruthTable};
pub use montecarlo::{monte_carlo_errors, MonteCarloSummary};
pub use process::{
    chi_of_unitary, default_preparations, preparation_state, process_tomography, process_tomography_from_records,
    ProcessMatrix,
};
pub use records::{group_by_prep, read_records, sample_records, write_records, Basis, CountRecord, MeasurementSetting, Projector};
pub use report::{ReportKind, TomoReport, SCHEMA_VERSION};
pub use state::{least_squares, state_tomography};
