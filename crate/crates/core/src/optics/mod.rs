//! Linear-optics simulation of heralded PPBS gates.

pub mod experiment;
pub mod file;
pub mod fock;
pub mod layouts;
pub mod sampling;
pub mod source;

pub use experiment::{
    basis_preparation, Count, Detector, Element, HeraldPattern, HeraldedMap, HeraldedOutput, OpticalExperiment,
};
pub use file::{parse_experiment, write_experiment};
pub use fock::{apply_linear_layer, FockState, LinearLayer, ModeIndex, ModeSpace, Pol};
pub use layouts::{
    balance_attenuations, balance_search, cu_layout, ppbs_cz_layout, toffoli_layout, toffoli_layout_with,
    toffoli_target, toffoli_unbalanced, BalanceResult, ToffoliVariant,
};
pub use sampling::{basis_inputs, exact_truth_table, heralded_state, sample_counts, toffoli_contrasts};
pub use source::{hom_coincidence, hom_coincidence_fock, spdc_state, Pass, SourceConfig};
