//! Disturbance-accommodating pitch control.

pub mod augment;
pub mod controller;
pub mod gains_io;
pub mod synth;

pub use augment::{augment_disturbance, check_observability, AugmentedModel};
pub use controller::{steady_state_rejection_test, ControllerState, DacController};
pub use gains_io::{read_gains, write_gains};
pub use synth::{
    build_ladder, certify, closed_loop_matrix, observer_spectrum, regulator_spectrum,
    synthesize_gains, tower_mode_damping, GainSet,
    ObserverWeights, WeightProfile, LADDER_TOWER_SCALES,
};
