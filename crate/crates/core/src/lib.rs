//! Finite-dimensional toolkit for measurement seen from inside the measuring
//! system.
//!
//! The crate models a two-level system `S` measured by an observer `O` whose
//! only accessible observable is a pointer `Q_O`. It provides
//!
//! - dense operators over tensor-factorized spaces ([`linalg`]),
//! - generation and classical spectra of *-subalgebras ([`algebra`]),
//! - ensembles and restriction of states to subalgebras ([`states`]),
//! - premeasurement, Liouville evolution and interference observables ([`dynamics`]),
//! - the doublet-state outcome simulator ([`doublet`]),
//! - scenario files and reports ([`scenario`], [`report`]).

pub mod algebra;
pub mod doublet;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod report;
pub mod scenario;
pub mod states;

pub use algebra::{
    classical_spectrum, generate_algebra, is_commutative, local_subalgebra, pointer_subalgebra, SpectrumPoint,
    StarAlgebra,
};
pub use doublet::{
    compare_pure_mixed, run_experiment, sample_outcome, wigner_friend_views, DoubletState, EventRecord, Experiment,
    RunStatistics,
};
pub use dynamics::{
    build_premeasurement, decohere_triple, evolve_exact, evolve_liouville, interference_observable,
    mixed_final_state, MeasurementModel,
};
pub use error::{Error, Result};
pub use linalg::{eig_hermitian, hs_inner, partial_trace, tensor, DensityState, Factorization, Operator, PureState};
pub use num_complex::Complex64;
pub use report::{emit_report, ComparisonReport, Format, Report};
pub use scenario::{parse_scenario, run_command, Command, Evolution, Mode, Scenario};
pub use states::{
    breuer_indistinguishable, ensemble_to_density, is_extremal, restrict, restrict_classical, ClassicalState,
    Ensemble, RestrictedState,
};
