//! Synthesis and verification of finite-time dissipative encoders for
//! stabilizer quantum codes.
//!
//! The pipeline: bring a code's check matrix to standard form, read off
//! logical operators, solve for correction operators, and characterize the
//! basin of attraction; then verify every property of the resulting
//! measure-and-correct channel sequence by exact dense simulation at small
//! size and by sign-tracked tableau simulation at scale.

pub mod channels;
pub mod code;
pub mod codes;
pub mod formats;
pub mod gf2;
pub mod pauli;
pub mod tableau;
pub mod toric;
pub mod verify;

pub use channels::{
    apply_code_projector, cde_generator, embed_logical, embed_state, encoding_map, evolve_cde,
    mix_with_identity, pauli_unitary_map, projector_onto_code, random_density, random_state,
    trace_distance, ChannelError, ComposedEncoder, DensityMatrix, EncodingMap, KrausMap,
    QubitState, Scalar, StateVector, Superoperator, Tolerances,
};
pub use code::{
    basin_dimension, basin_generators, correction_operators, equivalent_mod_stabilizer,
    logical_operators, nominal_gauge_state, standard_form, synthesize_plan, validate_code,
    BasinDimension, CodeError, EncoderPlan, EncoderStep, NominalGaugeState, StabilizerCode,
    StandardForm,
};
pub use formats::{
    read_state_dump, to_json, write_state_dump, CodeFile, FormatError, LatticeFile, PlanFile,
    StateSidecar,
};
pub use pauli::{
    pauli_from_string, solve_symplectic, symplectic_product, CheckMatrix, PauliOperator,
};
pub use tableau::{
    enumerate_branches, tableau_for_plan, tableau_from_product, BranchSet, EnumerationLimits,
    StabilizerTableau, TableauError,
};
pub use toric::{
    build_toric, check_quasi_locality, parallel_schedule, steps_commute_as_channels, toric_basin,
    toric_corrections, toric_logicals, toric_plan, Orientation, Regions, Schedule, ToricBasin,
    ToricError, ToricLattice,
};
pub use verify::{
    check_compatibility, check_e1, check_e2, check_e3, check_noise_tolerance,
    check_order_robustness, check_plan_symplectic, check_range_property,
    construct_tolerant_encoder, encoding_residuals, logical_density_basis, verify_ftde,
    CheckResult, CompatibilityOutcome, LogicalFactor, ReferenceEncoding, SubsystemDecomposition,
    VerificationReport, VerifyError,
};

/// Concrete f64 instantiations of the dense simulation types.
pub type DensityMatrix64 = channels::DensityMatrix<f64>;
pub type StateVector64 = channels::StateVector<f64>;
pub type KrausMap64 = channels::KrausMap<f64>;
pub type Superoperator64 = channels::Superoperator<f64>;
pub type Tolerances64 = channels::Tolerances<f64>;
