//! Reduced-order turbine: parameters, aerodynamics, pitch actuator,
//! nonlinear plant, linearization and wind generation.

pub mod actuator;
pub mod aero;
pub mod linearize;
pub mod params;
pub mod plant;
pub mod wind;

pub use actuator::{pitch_actuator_step, ActuatorState, PitchActuator};
pub use aero::aero_coefficients;
pub use linearize::{linearize, StateSpaceModel};
pub use params::TurbineParams;
pub use plant::{plant_step, Plant, PlantOutputs, PlantState, STATE_DIM};
pub use wind::{gen_wind_profile, WindProfile};
